/** Batch extraction of .gsft region-feature files from an image directory. */

import { mkdirSync, readdirSync, renameSync, writeFileSync } from 'node:fs'
import { basename, extname, join } from 'node:path'
import { encodeGsft } from './gsft.js'
import { loadImage, resizeBilinear } from './image.js'
import { LayerSpec, resolveLayer, sanitizeLayer } from './layers.js'
import { RegionModel } from './backend.js'

const IMAGE_EXTENSIONS = new Set(['.png', '.jpg', '.jpeg', '.ppm'])

export interface ExtractionJob {
  imagesDir: string
  outDir: string
  layers: string[]
  model: RegionModel
}

export interface ExtractionResult {
  /** photo id -> layer name -> written file path */
  written: Map<string, Map<string, string>>
}

export function listImages(imagesDir: string): string[] {
  return readdirSync(imagesDir)
    .filter((name) => IMAGE_EXTENSIONS.has(extname(name).toLowerCase()))
    .sort()
    .map((name) => join(imagesDir, name))
}

function writeAtomic(path: string, data: Buffer): void {
  const tmp = `${path}.tmp`
  writeFileSync(tmp, data)
  renameSync(tmp, path)
}

export function extract(job: ExtractionJob): ExtractionResult {
  const layers: LayerSpec[] = job.layers.map(resolveLayer)
  const images = listImages(job.imagesDir)
  if (images.length === 0) throw new Error(`no images found under ${job.imagesDir}`)

  for (const layer of layers) {
    mkdirSync(join(job.outDir, sanitizeLayer(layer.name)), { recursive: true })
  }

  const written = new Map<string, Map<string, string>>()
  for (const imagePath of images) {
    const photoId = basename(imagePath, extname(imagePath))
    const input = resizeBilinear(loadImage(imagePath))
    const byLayer = new Map<string, string>()
    for (const layer of layers) {
      const values = job.model.respond(input, layer)
      const blob = encodeGsft({
        layer: layer.name,
        regionCount: layer.gridSize * layer.gridSize,
        dim: layer.dim,
        values,
      })
      const outPath = join(job.outDir, sanitizeLayer(layer.name), `${photoId}.gsft`)
      writeAtomic(outPath, blob)
      byLayer.set(layer.name, outPath)
    }
    written.set(photoId, byLayer)
  }
  return { written }
}
