/**
 * Region-feature file codec.
 *
 * Layout (little-endian): magic "GSFT", u16 version = 1, u16 layer-name
 * length + UTF-8 name, u32 region count, u32 dim, then regionCount * dim
 * IEEE-754 float32 values, row-major.
 */

const MAGIC = Buffer.from('GSFT', 'ascii')
export const GSFT_VERSION = 1

export interface RegionFeatures {
  layer: string
  regionCount: number
  dim: number
  /** regionCount * dim values, row-major */
  values: Float32Array
}

export function encodeGsft(features: RegionFeatures): Buffer {
  const { layer, regionCount, dim, values } = features
  if (values.length !== regionCount * dim) {
    throw new Error(`expected ${regionCount * dim} values, got ${values.length}`)
  }
  const name = Buffer.from(layer, 'utf-8')
  if (name.length > 0xffff) throw new Error('layer name too long')
  const header = Buffer.alloc(8 + name.length + 8)
  MAGIC.copy(header, 0)
  header.writeUInt16LE(GSFT_VERSION, 4)
  header.writeUInt16LE(name.length, 6)
  name.copy(header, 8)
  header.writeUInt32LE(regionCount, 8 + name.length)
  header.writeUInt32LE(dim, 12 + name.length)
  const body = Buffer.alloc(values.length * 4)
  for (let i = 0; i < values.length; i++) body.writeFloatLE(values[i], i * 4)
  return Buffer.concat([header, body])
}

export function decodeGsft(blob: Buffer): RegionFeatures {
  if (blob.length < 8 || !blob.subarray(0, 4).equals(MAGIC)) {
    throw new Error('not a region-feature file (bad magic)')
  }
  const version = blob.readUInt16LE(4)
  if (version !== GSFT_VERSION) throw new Error(`unsupported format version ${version}`)
  const nameLen = blob.readUInt16LE(6)
  if (blob.length < 8 + nameLen + 8) throw new Error('truncated header')
  const layer = blob.subarray(8, 8 + nameLen).toString('utf-8')
  const regionCount = blob.readUInt32LE(8 + nameLen)
  const dim = blob.readUInt32LE(12 + nameLen)
  const bodyOffset = 16 + nameLen
  const expected = bodyOffset + regionCount * dim * 4
  if (blob.length !== expected) {
    throw new Error(`body size ${blob.length - bodyOffset} does not match ${regionCount}x${dim} float32 values`)
  }
  const values = new Float32Array(regionCount * dim)
  for (let i = 0; i < values.length; i++) values[i] = blob.readFloatLE(bodyOffset + i * 4)
  return { layer, regionCount, dim, values }
}
