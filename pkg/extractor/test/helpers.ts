import { mkdtempSync, writeFileSync } from 'node:fs'
import { tmpdir } from 'node:os'
import { join } from 'node:path'
import { PNG } from 'pngjs'

/** deterministic pseudo-random RGBA noise image */
export function writeTestPng(dir: string, name: string, width = 320, height = 240, seed = 1): string {
  const png = new PNG({ width, height })
  let state = seed >>> 0
  const next = () => {
    state = (Math.imul(state, 1664525) + 1013904223) >>> 0
    return state
  }
  for (let i = 0; i < width * height; i++) {
    png.data[i * 4] = next() & 0xff
    png.data[i * 4 + 1] = next() & 0xff
    png.data[i * 4 + 2] = next() & 0xff
    png.data[i * 4 + 3] = 255
  }
  const path = join(dir, name)
  writeFileSync(path, PNG.sync.write(png))
  return path
}

export function writeTestPpm(dir: string, name: string, width = 64, height = 48): string {
  const header = Buffer.from(`P6\n${width} ${height}\n255\n`, 'ascii')
  const body = Buffer.alloc(width * height * 3)
  for (let i = 0; i < body.length; i++) body[i] = (i * 37) & 0xff
  const path = join(dir, name)
  writeFileSync(path, Buffer.concat([header, body]))
  return path
}

export function tempDir(prefix: string): string {
  return mkdtempSync(join(tmpdir(), prefix))
}
