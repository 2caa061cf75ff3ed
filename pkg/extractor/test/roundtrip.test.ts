import { spawnSync } from 'node:child_process'
import { join } from 'node:path'
import { describe, expect, it } from 'vitest'
import { ProjectionBackend } from '../src/backend.js'
import { extract } from '../src/extract.js'
import { tempDir, writeTestPng } from './helpers.js'

const ALL_LAYERS = ['conv2', 'inception3a', 'inception4a', 'inception5a', 'loss3']

function pythonLoaderAvailable(): boolean {
  const probe = spawnSync('python3', ['-c', 'import gallerysync'], { encoding: 'utf-8' })
  return probe.status === 0
}

describe('primary-loader round trip', () => {
  it.skipIf(!pythonLoaderAvailable())(
    'emitted files parse byte-for-byte in the synchronization package',
    () => {
      const images = tempDir('in-')
      writeTestPng(images, 'photo42.png', 300, 200, 11)
      const out = tempDir('out-')
      extract({ imagesDir: images, outDir: out, layers: ALL_LAYERS, model: new ProjectionBackend() })

      const script = `
import json, sys
from gallerysync.features import LAYER_GEOMETRY, canonical_layer, feature_file, read_region_features

out_dir, photo_id = sys.argv[1], sys.argv[2]
report = {}
for layer in ["conv2", "inception3a", "inception4a", "inception5a", "loss3"]:
    rfs = read_region_features(feature_file(out_dir, layer, photo_id))
    expected = LAYER_GEOMETRY[canonical_layer(layer)]
    assert canonical_layer(rfs.layer) == canonical_layer(layer), rfs.layer
    assert (rfs.region_count, rfs.dim) == expected, (rfs.region_count, rfs.dim)
    report[layer] = [rfs.region_count, rfs.dim]
print(json.dumps(report))
`
      const run = spawnSync('python3', ['-c', script, out, 'photo42'], { encoding: 'utf-8' })
      expect(run.stderr).toBe('')
      expect(run.status).toBe(0)
      const report = JSON.parse(run.stdout)
      expect(report['inception3a']).toEqual([784, 256])
      expect(report['loss3']).toEqual([1, 1000])
    },
  )
})
