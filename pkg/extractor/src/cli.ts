#!/usr/bin/env node
/**
 * Usage:
 *   gsft-extract --images photos/ --layers inception3a[,conv2,...] --out features/
 *                [--backend projection | tfjs] [--layer-map config.json]
 *
 * The default projection backend runs without downloaded weights; the tfjs
 * backend needs a layer-map JSON pointing at a user-fetched GraphModel.
 */

import { readFileSync } from 'node:fs'
import { ProjectionBackend, RegionModel, TfjsBackend, TfjsLayerMap } from './backend.js'
import { extract } from './extract.js'

function parseArgs(argv: string[]): Map<string, string> {
  const args = new Map<string, string>()
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i]
    if (!flag.startsWith('--') || i + 1 >= argv.length) {
      throw new Error(`malformed arguments near ${flag}`)
    }
    args.set(flag.slice(2), argv[i + 1])
  }
  return args
}

export async function main(argv: string[]): Promise<number> {
  let args: Map<string, string>
  try {
    args = parseArgs(argv)
  } catch (err) {
    console.error(`error: ${(err as Error).message}`)
    return 2
  }
  const images = args.get('images')
  const out = args.get('out')
  const layers = (args.get('layers') ?? 'inception3a').split(',').map((s) => s.trim())
  if (!images || !out) {
    console.error('error: --images and --out are required')
    return 2
  }
  try {
    let model: RegionModel
    const backend = args.get('backend') ?? 'projection'
    if (backend === 'projection') {
      model = new ProjectionBackend()
    } else if (backend === 'tfjs') {
      const mapPath = args.get('layer-map')
      if (!mapPath) {
        console.error('error: the tfjs backend needs --layer-map <config.json>')
        return 2
      }
      const map = JSON.parse(readFileSync(mapPath, 'utf-8')) as TfjsLayerMap
      model = await TfjsBackend.load(map)
    } else {
      console.error(`error: unknown backend ${backend}`)
      return 2
    }
    const result = extract({ imagesDir: images, outDir: out, layers, model })
    console.log(`wrote ${result.written.size} photos x ${layers.length} layers under ${out}`)
    return 0
  } catch (err) {
    console.error(`error: ${(err as Error).message}`)
    return 2
  }
}

const invokedDirectly = process.argv[1] && import.meta.url.endsWith(process.argv[1].split('/').pop()!)
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => process.exit(code))
}
