// Binary codec for the session protocol.
//
// Layout (little-endian): magic "PARA" | version u8 | kind u8 | payload.
// Strings are u32 length + UTF-8, lists u32 count + elements; slider
// numerics are 32-bit floats, geo anchors 64-bit. Stream transports frame
// each message with a u32 length prefix; over the browser socket every
// binary frame carries one or more such framed messages.

export type Accuracy = 'Float' | 'Integer' | 'Even' | 'Odd'
const ACCURACIES: Accuracy[] = ['Float', 'Integer', 'Even', 'Odd']

export interface SliderDescriptor {
  type: 'NumberSlider'
  name: string
  guid: string
  value: number
  accuracy: Accuracy
  min: number
  max: number
  epsilon: number
  decimalPlaces: number
}

export interface ToggleDescriptor {
  type: 'BooleanToggle'
  name: string
  guid: string
  value: boolean
}

export interface ListDescriptor {
  type: 'ListParameter'
  name: string
  guid: string
  items: string[]
  selected: number
}

export type Descriptor = SliderDescriptor | ToggleDescriptor | ListDescriptor

export interface MeshPayload {
  vertices: number[][]
  triangles: number[][]
}

export interface GeoAnchor {
  lat: number
  lon: number
  heading: number
}

export type UpdateValue =
  | { type: 'NumberSlider'; value: number }
  | { type: 'BooleanToggle'; value: boolean }
  | { type: 'ListParameter'; selected: number }

export type Role = 'designer' | 'viewer'

export type Message =
  | { kind: 'Components'; items: Descriptor[] }
  | { kind: 'MeshData'; guid: string; meshes: MeshPayload[]; geo: GeoAnchor | null }
  | { kind: 'ParameterUpdate'; guid: string; value: UpdateValue }
  | { kind: 'Control'; control: 'Hello'; role: Role }
  | { kind: 'Control'; control: 'HostAssign'; you: boolean; address: string }
  | { kind: 'Control'; control: 'HostChanged'; address: string }
  | { kind: 'Control'; control: 'LockRequest'; guid: string }
  | { kind: 'Control'; control: 'LockGrant'; guid: string }
  | { kind: 'Control'; control: 'LockDeny'; guid: string; holder: string }
  | { kind: 'Control'; control: 'LockRelease'; guid: string }
  | { kind: 'Control'; control: 'Reject'; guid: string; reason: string }
  | { kind: 'Control'; control: 'Presence'; data: Uint8Array }

const MAGIC = [0x50, 0x41, 0x52, 0x41] // "PARA"
const VERSION = 1

const KIND_COMPONENTS = 1
const KIND_MESH_DATA = 2
const KIND_PARAMETER_UPDATE = 3
const KIND_CONTROL = 4

const CONTROL_NAMES = ['Hello', 'HostAssign', 'HostChanged', 'LockRequest',
  'LockGrant', 'LockDeny', 'LockRelease', 'Reject', 'Presence'] as const

export class WireError extends Error {}
export class Truncated extends WireError {}

class Reader {
  private view: DataView
  private pos = 0

  constructor(private data: Uint8Array) {
    this.view = new DataView(data.buffer, data.byteOffset, data.byteLength)
  }

  private need(n: number): void {
    if (this.pos + n > this.data.byteLength) {
      throw new Truncated(`needed ${n} bytes at offset ${this.pos}`)
    }
  }

  u8(): number {
    this.need(1)
    return this.view.getUint8(this.pos++)
  }

  u32(): number {
    this.need(4)
    const v = this.view.getUint32(this.pos, true)
    this.pos += 4
    return v
  }

  i16(): number {
    this.need(2)
    const v = this.view.getInt16(this.pos, true)
    this.pos += 2
    return v
  }

  f32(): number {
    this.need(4)
    const v = this.view.getFloat32(this.pos, true)
    this.pos += 4
    return v
  }

  f64(): number {
    this.need(8)
    const v = this.view.getFloat64(this.pos, true)
    this.pos += 8
    return v
  }

  bytes(n: number): Uint8Array {
    this.need(n)
    const out = this.data.subarray(this.pos, this.pos + n)
    this.pos += n
    return out
  }

  string(): string {
    const n = this.u32()
    return new TextDecoder().decode(this.bytes(n))
  }

  done(): void {
    if (this.pos !== this.data.byteLength) {
      throw new WireError(`${this.data.byteLength - this.pos} trailing bytes`)
    }
  }
}

class Writer {
  private chunks: number[] = []

  u8(v: number): void {
    this.chunks.push(v & 0xff)
  }

  u32(v: number): void {
    this.chunks.push(v & 0xff, (v >>> 8) & 0xff, (v >>> 16) & 0xff, (v >>> 24) & 0xff)
  }

  i16(v: number): void {
    this.chunks.push(v & 0xff, (v >> 8) & 0xff)
  }

  f32(v: number): void {
    const buf = new DataView(new ArrayBuffer(4))
    buf.setFloat32(0, v, true)
    for (let i = 0; i < 4; i++) this.chunks.push(buf.getUint8(i))
  }

  f64(v: number): void {
    const buf = new DataView(new ArrayBuffer(8))
    buf.setFloat64(0, v, true)
    for (let i = 0; i < 8; i++) this.chunks.push(buf.getUint8(i))
  }

  bytes(data: Uint8Array): void {
    for (const b of data) this.chunks.push(b)
  }

  string(s: string): void {
    const raw = new TextEncoder().encode(s)
    this.u32(raw.byteLength)
    this.bytes(raw)
  }

  finish(): Uint8Array<ArrayBuffer> {
    return Uint8Array.from(this.chunks)
  }
}

function readDescriptor(r: Reader): Descriptor {
  const tag = r.u8()
  const name = tag >= 1 && tag <= 3 ? r.string() : ''
  if (tag === 1) {
    return { type: 'BooleanToggle', name, guid: r.string(), value: r.u8() !== 0 }
  }
  if (tag === 2) {
    const guid = r.string()
    const value = r.f32()
    const accByte = r.u8()
    const accuracy = ACCURACIES[accByte]
    if (accuracy === undefined) throw new WireError(`bad accuracy ${accByte}`)
    return {
      type: 'NumberSlider', name, guid, value, accuracy,
      min: r.f32(), max: r.f32(), epsilon: r.f32(), decimalPlaces: r.i16(),
    }
  }
  if (tag === 3) {
    const guid = r.string()
    const count = r.u32()
    const items: string[] = []
    for (let i = 0; i < count; i++) items.push(r.string())
    return { type: 'ListParameter', name, guid, items, selected: r.u32() }
  }
  throw new WireError(`unknown component tag ${tag}`)
}

function writeDescriptor(w: Writer, d: Descriptor): void {
  if (d.type === 'BooleanToggle') {
    w.u8(1)
    w.string(d.name)
    w.string(d.guid)
    w.u8(d.value ? 1 : 0)
  } else if (d.type === 'NumberSlider') {
    w.u8(2)
    w.string(d.name)
    w.string(d.guid)
    w.f32(d.value)
    w.u8(ACCURACIES.indexOf(d.accuracy))
    w.f32(d.min)
    w.f32(d.max)
    w.f32(d.epsilon)
    w.i16(d.decimalPlaces)
  } else {
    w.u8(3)
    w.string(d.name)
    w.string(d.guid)
    w.u32(d.items.length)
    for (const item of d.items) w.string(item)
    w.u32(d.selected)
  }
}

function readUpdateValue(r: Reader): UpdateValue {
  const tag = r.u8()
  if (tag === 1) return { type: 'BooleanToggle', value: r.u8() !== 0 }
  if (tag === 2) return { type: 'NumberSlider', value: r.f32() }
  if (tag === 3) return { type: 'ListParameter', selected: r.u32() }
  throw new WireError(`unknown update tag ${tag}`)
}

function writeUpdateValue(w: Writer, v: UpdateValue): void {
  if (v.type === 'BooleanToggle') {
    w.u8(1)
    w.u8(v.value ? 1 : 0)
  } else if (v.type === 'NumberSlider') {
    w.u8(2)
    w.f32(v.value)
  } else {
    w.u8(3)
    w.u32(v.selected)
  }
}

export function decode(data: Uint8Array): Message {
  const r = new Reader(data)
  const magic = r.bytes(4)
  for (let i = 0; i < 4; i++) {
    if (magic[i] !== MAGIC[i]) throw new WireError('bad magic')
  }
  const version = r.u8()
  if (version !== VERSION) throw new WireError(`unsupported version ${version}`)
  const kind = r.u8()
  let message: Message
  if (kind === KIND_COMPONENTS) {
    const count = r.u32()
    const items: Descriptor[] = []
    for (let i = 0; i < count; i++) items.push(readDescriptor(r))
    message = { kind: 'Components', items }
  } else if (kind === KIND_MESH_DATA) {
    const guid = r.string()
    const meshCount = r.u32()
    const meshes: MeshPayload[] = []
    for (let m = 0; m < meshCount; m++) {
      const vcount = r.u32()
      const vertices: number[][] = []
      for (let i = 0; i < vcount; i++) vertices.push([r.f32(), r.f32(), r.f32()])
      const tcount = r.u32()
      const triangles: number[][] = []
      for (let i = 0; i < tcount; i++) triangles.push([r.u32(), r.u32(), r.u32()])
      meshes.push({ vertices, triangles })
    }
    const geo = r.u8() ? { lat: r.f64(), lon: r.f64(), heading: r.f64() } : null
    message = { kind: 'MeshData', guid, meshes, geo }
  } else if (kind === KIND_PARAMETER_UPDATE) {
    const guid = r.string()
    message = { kind: 'ParameterUpdate', guid, value: readUpdateValue(r) }
  } else if (kind === KIND_CONTROL) {
    message = readControl(r)
  } else {
    throw new WireError(`unknown message kind ${kind}`)
  }
  r.done()
  return message
}

function readControl(r: Reader): Message {
  const sub = r.u8()
  const name = CONTROL_NAMES[sub - 1]
  switch (name) {
    case 'Hello': {
      const role = r.u8()
      if (role !== 1 && role !== 2) throw new WireError(`bad role ${role}`)
      return { kind: 'Control', control: 'Hello', role: role === 1 ? 'designer' : 'viewer' }
    }
    case 'HostAssign':
      return { kind: 'Control', control: 'HostAssign', you: r.u8() !== 0, address: r.string() }
    case 'HostChanged':
      return { kind: 'Control', control: 'HostChanged', address: r.string() }
    case 'LockRequest':
    case 'LockGrant':
    case 'LockRelease':
      return { kind: 'Control', control: name, guid: r.string() }
    case 'LockDeny':
      return { kind: 'Control', control: 'LockDeny', guid: r.string(), holder: r.string() }
    case 'Reject':
      return { kind: 'Control', control: 'Reject', guid: r.string(), reason: r.string() }
    case 'Presence':
      return { kind: 'Control', control: 'Presence', data: new Uint8Array(r.bytes(r.u32())) }
    default:
      throw new WireError(`unknown control sub-kind ${sub}`)
  }
}

export function encode(message: Message): Uint8Array<ArrayBuffer> {
  const w = new Writer()
  for (const b of MAGIC) w.u8(b)
  w.u8(VERSION)
  if (message.kind === 'Components') {
    w.u8(KIND_COMPONENTS)
    w.u32(message.items.length)
    for (const item of message.items) writeDescriptor(w, item)
  } else if (message.kind === 'MeshData') {
    w.u8(KIND_MESH_DATA)
    w.string(message.guid)
    w.u32(message.meshes.length)
    for (const mesh of message.meshes) {
      w.u32(mesh.vertices.length)
      for (const v of mesh.vertices) {
        w.f32(v[0])
        w.f32(v[1])
        w.f32(v[2])
      }
      w.u32(mesh.triangles.length)
      for (const t of mesh.triangles) {
        w.u32(t[0])
        w.u32(t[1])
        w.u32(t[2])
      }
    }
    if (message.geo) {
      w.u8(1)
      w.f64(message.geo.lat)
      w.f64(message.geo.lon)
      w.f64(message.geo.heading)
    } else {
      w.u8(0)
    }
  } else if (message.kind === 'ParameterUpdate') {
    w.u8(KIND_PARAMETER_UPDATE)
    w.string(message.guid)
    writeUpdateValue(w, message.value)
  } else {
    w.u8(KIND_CONTROL)
    w.u8(CONTROL_NAMES.indexOf(message.control) + 1)
    switch (message.control) {
      case 'Hello':
        w.u8(message.role === 'designer' ? 1 : 2)
        break
      case 'HostAssign':
        w.u8(message.you ? 1 : 0)
        w.string(message.address)
        break
      case 'HostChanged':
        w.string(message.address)
        break
      case 'LockRequest':
      case 'LockGrant':
      case 'LockRelease':
        w.string(message.guid)
        break
      case 'LockDeny':
        w.string(message.guid)
        w.string(message.holder)
        break
      case 'Reject':
        w.string(message.guid)
        w.string(message.reason)
        break
      case 'Presence':
        w.u32(message.data.byteLength)
        w.bytes(message.data)
        break
    }
  }
  return w.finish()
}

// u32 length-prefix framing used on stream transports

export function frame(payload: Uint8Array): Uint8Array<ArrayBuffer> {
  const out = new Uint8Array(payload.byteLength + 4)
  new DataView(out.buffer).setUint32(0, payload.byteLength, true)
  out.set(payload, 4)
  return out
}

export class FrameSplitter {
  private buffer = new Uint8Array(0)

  feed(data: Uint8Array): Uint8Array[] {
    const joined = new Uint8Array(this.buffer.byteLength + data.byteLength)
    joined.set(this.buffer, 0)
    joined.set(data, this.buffer.byteLength)
    this.buffer = joined
    const frames: Uint8Array[] = []
    for (;;) {
      if (this.buffer.byteLength < 4) return frames
      const view = new DataView(this.buffer.buffer, this.buffer.byteOffset, 4)
      const length = view.getUint32(0, true)
      if (this.buffer.byteLength < 4 + length) return frames
      frames.push(this.buffer.slice(4, 4 + length))
      this.buffer = this.buffer.slice(4 + length)
    }
  }
}

export function hexToBytes(hex: string): Uint8Array {
  const out = new Uint8Array(hex.length / 2)
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(i * 2, i * 2 + 2), 16)
  }
  return out
}

export function bytesToHex(data: Uint8Array): string {
  return Array.from(data, (b) => b.toString(16).padStart(2, '0')).join('')
}
