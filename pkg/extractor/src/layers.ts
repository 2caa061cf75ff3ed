/** Geometry of the five extraction layers of the 224x224 classification network. */

export interface LayerSpec {
  /** canonical layer name, as written into .gsft headers */
  name: string
  /** regions per side of the 224x224 input (gridSize^2 regions total) */
  gridSize: number
  /** square region edge in pixels */
  regionPixels: number
  /** response vector length per region */
  dim: number
}

export const LAYERS: LayerSpec[] = [
  { name: 'conv2/norm2', gridSize: 28, regionPixels: 8, dim: 192 },
  { name: 'inception3a/output', gridSize: 28, regionPixels: 8, dim: 256 },
  { name: 'inception4a/output', gridSize: 14, regionPixels: 16, dim: 512 },
  { name: 'inception5a/output', gridSize: 7, regionPixels: 32, dim: 832 },
  { name: 'loss3/classifier', gridSize: 1, regionPixels: 224, dim: 1000 },
]

const ALIASES: Record<string, string> = {
  conv2: 'conv2/norm2',
  inception3a: 'inception3a/output',
  inception4a: 'inception4a/output',
  inception5a: 'inception5a/output',
  loss3: 'loss3/classifier',
}

export function resolveLayer(name: string): LayerSpec {
  const canonical = ALIASES[name] ?? name
  const spec = LAYERS.find((l) => l.name === canonical)
  if (!spec) {
    const known = LAYERS.map((l) => l.name).join(', ')
    throw new Error(`unknown layer ${JSON.stringify(name)}; supported: ${known}`)
  }
  return spec
}

/** Directory-safe spelling used for per-layer output subdirectories. */
export function sanitizeLayer(name: string): string {
  return resolveLayer(name).name.replace(/\//g, '_')
}

export const INPUT_SIZE = 224
