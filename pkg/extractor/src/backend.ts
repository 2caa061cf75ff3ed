/**
 * Response backends.
 *
 * A backend turns a 224x224 RGB image into per-region response vectors for a
 * requested layer. `ProjectionBackend` is self-contained and deterministic:
 * it average-pools each region to a small grid and projects the pooled values
 * through fixed pseudo-random weights derived from the layer name. It
 * produces the exact region geometry of each layer without any downloaded
 * weights, so the full extraction path stays testable offline; it is not a
 * trained network, and similarity quality with it is structural only.
 *
 * `TfjsBackend` wraps a user-fetched tfjs GraphModel and reads the
 * intermediate tensors named in a layer-map config (see config/layer-map
 * example). Weights are never vendored.
 */

import { INPUT_SIZE, LayerSpec, resolveLayer } from './layers.js'
import { RgbImage } from './image.js'

export interface RegionModel {
  respond(image: RgbImage, layer: LayerSpec): Float32Array
}

/** fnv-1a 32-bit hash, the seed source for the projection weights */
function fnv1a(text: string): number {
  let h = 0x811c9dc5
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i)
    h = Math.imul(h, 0x01000193) >>> 0
  }
  return h >>> 0
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0
  return () => {
    a = (a + 0x6d2b79f5) >>> 0
    let t = Math.imul(a ^ (a >>> 15), 1 | a)
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}

const POOL_GRID = 4 // pooled patch per region: 4x4x3 values

export class ProjectionBackend implements RegionModel {
  private weights = new Map<string, Float32Array>()

  private weightsFor(layer: LayerSpec): Float32Array {
    let w = this.weights.get(layer.name)
    if (!w) {
      const inputs = POOL_GRID * POOL_GRID * 3
      const rand = mulberry32(fnv1a(`gsft:${layer.name}`))
      w = new Float32Array(layer.dim * inputs)
      for (let i = 0; i < w.length; i++) w[i] = Math.fround(rand() * 2 - 1)
      this.weights.set(layer.name, w)
    }
    return w
  }

  respond(image: RgbImage, layer: LayerSpec): Float32Array {
    if (image.width !== INPUT_SIZE || image.height !== INPUT_SIZE) {
      throw new Error(`backend expects a ${INPUT_SIZE}x${INPUT_SIZE} input`)
    }
    const weights = this.weightsFor(layer)
    const inputs = POOL_GRID * POOL_GRID * 3
    const regions = layer.gridSize * layer.gridSize
    const out = new Float32Array(regions * layer.dim)
    const patch = new Float32Array(inputs)
    const cell = layer.regionPixels / POOL_GRID
    for (let ry = 0; ry < layer.gridSize; ry++) {
      for (let rx = 0; rx < layer.gridSize; rx++) {
        patch.fill(0)
        const baseY = ry * layer.regionPixels
        const baseX = rx * layer.regionPixels
        for (let py = 0; py < layer.regionPixels; py++) {
          const gy = Math.min(Math.floor(py / cell), POOL_GRID - 1)
          for (let px = 0; px < layer.regionPixels; px++) {
            const gx = Math.min(Math.floor(px / cell), POOL_GRID - 1)
            const src = ((baseY + py) * INPUT_SIZE + baseX + px) * 3
            const dst = (gy * POOL_GRID + gx) * 3
            patch[dst] += image.data[src]
            patch[dst + 1] += image.data[src + 1]
            patch[dst + 2] += image.data[src + 2]
          }
        }
        const perCell = cell * cell
        for (let i = 0; i < inputs; i++) patch[i] = Math.fround(patch[i] / perCell)
        const regionBase = (ry * layer.gridSize + rx) * layer.dim
        for (let d = 0; d < layer.dim; d++) {
          let acc = 0
          const wBase = d * inputs
          for (let i = 0; i < inputs; i++) acc += weights[wBase + i] * patch[i]
          out[regionBase + d] = Math.fround(acc)
        }
      }
    }
    return out
  }
}

export interface TfjsLayerMap {
  /** path to the tfjs GraphModel model.json, fetched by the user */
  model: string
  /** canonical layer name -> graph node name emitting [1, H, W, C] or [1, C] */
  nodes: Record<string, string>
}

export class TfjsBackend implements RegionModel {
  private constructor(private model: any, private tf: any, private map: TfjsLayerMap) {}

  static async load(map: TfjsLayerMap): Promise<TfjsBackend> {
    let tf: any
    try {
      tf = await import('@tensorflow/tfjs')
    } catch {
      throw new Error('the tfjs backend needs the optional @tensorflow/tfjs dependency installed')
    }
    const model = await tf.loadGraphModel(`file://${map.model}`)
    return new TfjsBackend(model, tf, map)
  }

  respond(image: RgbImage, layer: LayerSpec): Float32Array {
    const node = this.map.nodes[layer.name]
    if (!node) throw new Error(`layer map has no graph node for ${layer.name}`)
    const out = this.tf.tidy(() => {
      const input = this.tf
        .tensor(image.data, [INPUT_SIZE, INPUT_SIZE, 3])
        .expandDims(0)
      return this.model.execute(input, node)
    })
    const values = out.dataSync()
    out.dispose()
    const expected = layer.gridSize * layer.gridSize * layer.dim
    if (values.length !== expected) {
      throw new Error(
        `node ${node} produced ${values.length} values, expected ${expected} for ${layer.name}`,
      )
    }
    return Float32Array.from(values)
  }
}
