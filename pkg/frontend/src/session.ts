// Client session: speaks the framed binary protocol over a browser socket,
// mirrors Components into widgets, forwards committed widget changes as
// ParameterUpdate messages (one in flight per widget), and surfaces rejects.

import { FrameSplitter, decode, encode, frame } from './wire.js'
import type { Message, Role, UpdateValue } from './wire.js'
import { ParameterPanel } from './widgets.js'

/** The slice of WebSocket the session relies on (substitutable in tests). */
export interface SocketLike {
  binaryType: string
  send(data: Uint8Array<ArrayBuffer>): void
  close(): void
  addEventListener(type: string, handler: (event: any) => void): void
}

export interface SessionUi {
  panelContainer: HTMLElement | null
  notify(text: string): void
  onMeshes?(meshes: Message & { kind: 'MeshData' }): void
  onHost?(label: string): void
}

interface Gate {
  inFlight: boolean
  queued: UpdateValue | null
}

export class ClientSession {
  readonly panel: ParameterPanel | null
  private splitter = new FrameSplitter()
  private gates = new Map<string, Gate>()
  private meshVertexCount = 0
  updatesSent = 0

  constructor(private socket: SocketLike, private role: Role,
              private ui: SessionUi) {
    this.panel = ui.panelContainer && role === 'designer'
      ? new ParameterPanel(ui.panelContainer,
                           (guid, value) => this.commit(guid, value))
      : null
    socket.binaryType = 'arraybuffer'
    socket.addEventListener('open', () => {
      this.sendMessage({ kind: 'Control', control: 'Hello', role: this.role })
    })
    socket.addEventListener('message', (event) => {
      const data = event.data instanceof ArrayBuffer
        ? new Uint8Array(event.data)
        : (event.data as Uint8Array)
      this.feed(data)
    })
    socket.addEventListener('close', () => ui.notify('connection closed'))
  }

  /** Test/driver entry: process raw stream bytes. */
  feed(data: Uint8Array): void {
    for (const payload of this.splitter.feed(data)) {
      this.handle(decode(payload))
    }
  }

  private sendMessage(message: Message): void {
    this.socket.send(frame(encode(message)))
  }

  private commit(guid: string, value: UpdateValue): void {
    const gate = this.gates.get(guid) ?? { inFlight: false, queued: null }
    this.gates.set(guid, gate)
    if (gate.inFlight) {
      gate.queued = value
      return
    }
    gate.inFlight = true
    this.updatesSent += 1
    this.sendMessage({ kind: 'ParameterUpdate', guid, value })
  }

  /** Geometry receipt acts as the ack that releases pending widget sends. */
  private releaseGates(): void {
    for (const [guid, gate] of this.gates) {
      gate.inFlight = false
      if (gate.queued) {
        const value = gate.queued
        gate.queued = null
        gate.inFlight = true
        this.updatesSent += 1
        this.sendMessage({ kind: 'ParameterUpdate', guid, value })
      }
    }
  }

  vertexCount(): number {
    return this.meshVertexCount
  }

  private handle(message: Message): void {
    switch (message.kind) {
      case 'Components':
        this.panel?.render(message.items)
        break
      case 'MeshData':
        this.meshVertexCount = message.meshes.reduce(
          (sum, mesh) => sum + mesh.vertices.length, 0)
        this.ui.onMeshes?.(message)
        this.releaseGates()
        break
      case 'ParameterUpdate':
        // echo of another designer's accepted change: follow it
        this.panel?.applyConfirmed(message.guid, message.value)
        break
      case 'Control':
        this.handleControl(message)
        break
    }
  }

  private handleControl(message: Message & { kind: 'Control' }): void {
    switch (message.control) {
      case 'Reject': {
        const gate = this.gates.get(message.guid)
        if (gate) {
          gate.inFlight = false
          gate.queued = null
        }
        this.panel?.revert(message.guid)
        this.ui.notify(`change rejected: ${message.reason}`)
        break
      }
      case 'HostAssign':
        this.ui.onHost?.(message.you ? 'you are the host'
                                     : `host: ${message.address}`)
        break
      case 'HostChanged':
        this.ui.onHost?.(`host: ${message.address}`)
        break
      case 'LockDeny':
        this.ui.notify(`lock denied: held by ${message.holder}`)
        break
      default:
        break
    }
  }
}
