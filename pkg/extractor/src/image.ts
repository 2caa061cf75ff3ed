/** Image decoding (PNG, JPEG, binary PPM) and bilinear resize to the network input size. */

import { readFileSync } from 'node:fs'
import { extname } from 'node:path'
import { PNG } from 'pngjs'
import jpeg from 'jpeg-js'
import { INPUT_SIZE } from './layers.js'

export interface RgbImage {
  width: number
  height: number
  /** interleaved RGB in [0, 1], row-major */
  data: Float32Array
}

function fromRgba(width: number, height: number, rgba: Uint8Array): RgbImage {
  const data = new Float32Array(width * height * 3)
  for (let i = 0; i < width * height; i++) {
    data[i * 3] = rgba[i * 4] / 255
    data[i * 3 + 1] = rgba[i * 4 + 1] / 255
    data[i * 3 + 2] = rgba[i * 4 + 2] / 255
  }
  return { width, height, data }
}

function decodePpm(blob: Buffer): RgbImage {
  // binary PPM (P6): "P6\n<width> <height>\n<maxval>\n" followed by RGB bytes
  const header: number[] = []
  let pos = 0
  let token = ''
  while (header.length < 4 && pos < blob.length) {
    const ch = String.fromCharCode(blob[pos])
    if (ch === '#') {
      while (pos < blob.length && blob[pos] !== 0x0a) pos++
    } else if (/\s/.test(ch)) {
      if (token) {
        header.push(header.length === 0 ? (token === 'P6' ? 6 : NaN) : Number(token))
        token = ''
      }
    } else {
      token += ch
    }
    pos++
  }
  const [magic, width, height, maxval] = header
  if (magic !== 6 || !width || !height || !maxval) throw new Error('unsupported PPM header')
  const data = new Float32Array(width * height * 3)
  for (let i = 0; i < width * height * 3; i++) data[i] = blob[pos + i] / maxval
  return { width, height, data }
}

export function loadImage(path: string): RgbImage {
  const blob = readFileSync(path)
  const ext = extname(path).toLowerCase()
  if (ext === '.png') {
    const png = PNG.sync.read(blob)
    return fromRgba(png.width, png.height, png.data)
  }
  if (ext === '.jpg' || ext === '.jpeg') {
    const img = jpeg.decode(blob, { useTArray: true })
    return fromRgba(img.width, img.height, img.data)
  }
  if (ext === '.ppm') {
    return decodePpm(blob)
  }
  throw new Error(`unsupported image format ${ext || '(none)'}: ${path}`)
}

export function resizeBilinear(image: RgbImage, size: number = INPUT_SIZE): RgbImage {
  if (image.width === size && image.height === size) return image
  const out = new Float32Array(size * size * 3)
  const sx = image.width / size
  const sy = image.height / size
  for (let y = 0; y < size; y++) {
    const fy = Math.min((y + 0.5) * sy - 0.5, image.height - 1)
    const y0 = Math.max(Math.floor(fy), 0)
    const y1 = Math.min(y0 + 1, image.height - 1)
    const wy = fy - y0
    for (let x = 0; x < size; x++) {
      const fx = Math.min((x + 0.5) * sx - 0.5, image.width - 1)
      const x0 = Math.max(Math.floor(fx), 0)
      const x1 = Math.min(x0 + 1, image.width - 1)
      const wx = fx - x0
      for (let c = 0; c < 3; c++) {
        const p00 = image.data[(y0 * image.width + x0) * 3 + c]
        const p01 = image.data[(y0 * image.width + x1) * 3 + c]
        const p10 = image.data[(y1 * image.width + x0) * 3 + c]
        const p11 = image.data[(y1 * image.width + x1) * 3 + c]
        out[(y * size + x) * 3 + c] =
          p00 * (1 - wy) * (1 - wx) + p01 * (1 - wy) * wx + p10 * wy * (1 - wx) + p11 * wy * wx
      }
    }
  }
  return { width: size, height: size, data: out }
}
