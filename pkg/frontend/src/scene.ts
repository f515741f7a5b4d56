// Three.js scene layer: converts streamed meshes (model space: right-handed,
// z up) into render-space geometry (y up) and tracks the displayed vertex
// count. Normals are computed here, after decoding; they never travel on
// the wire. Kept renderer-free so it runs headless in tests.

import * as THREE from 'three'
import type { MeshPayload } from './wire.js'

export function toRenderGeometry(mesh: MeshPayload): THREE.BufferGeometry {
  const positions = new Float32Array(mesh.vertices.length * 3)
  mesh.vertices.forEach(([x, y, z], i) => {
    positions[i * 3] = -x
    positions[i * 3 + 1] = z
    positions[i * 3 + 2] = y
  })
  const indices = new Uint32Array(mesh.triangles.length * 3)
  mesh.triangles.forEach(([a, b, c], i) => {
    // winding reversed to keep faces outward under the handedness flip
    indices[i * 3] = a
    indices[i * 3 + 1] = c
    indices[i * 3 + 2] = b
  })
  const geometry = new THREE.BufferGeometry()
  geometry.setAttribute('position', new THREE.BufferAttribute(positions, 3))
  geometry.setIndex(new THREE.BufferAttribute(indices, 1))
  geometry.computeVertexNormals()
  return geometry
}

export class GeometryView {
  readonly group = new THREE.Group()
  private material: THREE.Material

  constructor(material?: THREE.Material) {
    this.material = material ??
      new THREE.MeshStandardMaterial({ color: 0x8899cc, side: THREE.DoubleSide })
  }

  update(meshes: MeshPayload[]): void {
    for (const child of [...this.group.children]) {
      this.group.remove(child)
      const old = child as THREE.Mesh
      if (old.geometry) old.geometry.dispose()
    }
    for (const payload of meshes) {
      this.group.add(new THREE.Mesh(toRenderGeometry(payload), this.material))
    }
  }

  vertexCount(): number {
    let total = 0
    for (const child of this.group.children) {
      const geometry = (child as THREE.Mesh).geometry
      total += geometry.getAttribute('position').count
    }
    return total
  }
}
