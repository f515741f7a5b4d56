// Browser bootstrap: connect to the relay's browser listener, show widgets
// on the left and the streamed geometry in a 3D viewport.

import * as THREE from 'three'
import { ClientSession } from './session.js'
import { GeometryView } from './scene.js'
import type { Role } from './wire.js'

function notify(text: string): void {
  const host = document.getElementById('notifications')!
  const entry = document.createElement('div')
  entry.className = 'note'
  entry.textContent = text
  host.prepend(entry)
  setTimeout(() => entry.remove(), 6000)
}

function start(): void {
  const params = new URLSearchParams(window.location.search)
  const role = (params.get('role') === 'viewer' ? 'viewer' : 'designer') as Role
  const wsUrl = params.get('ws') ??
    `ws://${window.location.hostname}:${window.location.port}/`

  const viewport = document.getElementById('viewport')!
  const renderer = new THREE.WebGLRenderer({ antialias: true })
  renderer.setSize(viewport.clientWidth, viewport.clientHeight)
  viewport.append(renderer.domElement)

  const scene = new THREE.Scene()
  scene.background = new THREE.Color(0x10141c)
  const camera = new THREE.PerspectiveCamera(
    50, viewport.clientWidth / viewport.clientHeight, 0.01, 1000)
  camera.position.set(16, 14, 24)
  camera.lookAt(0, 6, 0)
  scene.add(new THREE.AmbientLight(0xffffff, 0.45))
  const sun = new THREE.DirectionalLight(0xffffff, 1.2)
  sun.position.set(10, 20, 10)
  scene.add(sun)
  scene.add(new THREE.GridHelper(40, 40, 0x334455, 0x222a33))

  const view = new GeometryView()
  scene.add(view.group)

  const panelContainer = document.getElementById('panel')!
  if (role === 'viewer') panelContainer.classList.add('hidden')

  const socket = new WebSocket(wsUrl)
  const session = new ClientSession(socket, role, {
    panelContainer: role === 'designer' ? panelContainer : null,
    notify,
    onMeshes: (message) => {
      view.update(message.meshes)
      const counter = document.getElementById('stats')!
      counter.textContent = `${view.vertexCount()} vertices`
    },
    onHost: (label) => {
      document.getElementById('host')!.textContent = label
    },
  })
  void session

  window.addEventListener('resize', () => {
    renderer.setSize(viewport.clientWidth, viewport.clientHeight)
    camera.aspect = viewport.clientWidth / viewport.clientHeight
    camera.updateProjectionMatrix()
  })

  renderer.setAnimationLoop(() => renderer.render(scene, camera))
}

start()
