// Parameter widgets: sliders for numbers, a switch for booleans, a dropdown
// for list parameters. The widget set always mirrors the last Components
// message; values clamp to descriptor ranges and revert on a server reject.

import type { Descriptor, UpdateValue } from './wire.js'

export type CommitHandler = (guid: string, value: UpdateValue) => void

export interface Widget {
  guid: string
  root: HTMLElement
  descriptor: Descriptor
  confirmed: UpdateValue
  /** last value the server confirmed (set on echo); display follows it */
  setConfirmed(value: UpdateValue): void
  revert(): void
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value))
}

function sliderStep(decimalPlaces: number, accuracy: string): number {
  if (accuracy !== 'Float') return accuracy === 'Integer' ? 1 : 2
  return decimalPlaces > 0 ? Math.pow(10, -decimalPlaces) : 0.01
}

class SliderWidget implements Widget {
  guid: string
  root: HTMLElement
  confirmed: UpdateValue
  private input: HTMLInputElement
  private readout: HTMLElement

  constructor(public descriptor: Extract<Descriptor, { type: 'NumberSlider' }>,
              doc: Document, onCommit: CommitHandler) {
    this.guid = descriptor.guid
    this.confirmed = { type: 'NumberSlider', value: descriptor.value }
    this.root = doc.createElement('label')
    this.root.className = 'widget widget-slider'
    const caption = doc.createElement('span')
    caption.textContent = descriptor.name
    this.input = doc.createElement('input')
    this.input.type = 'range'
    this.input.min = String(descriptor.min)
    this.input.max = String(descriptor.max)
    this.input.step = String(sliderStep(descriptor.decimalPlaces,
                                        descriptor.accuracy))
    this.input.value = String(descriptor.value)
    this.readout = doc.createElement('output')
    this.refreshReadout()
    this.input.addEventListener('input', () => this.refreshReadout())
    this.input.addEventListener('change', () => {
      const value = clamp(Number(this.input.value),
                          descriptor.min, descriptor.max)
      this.input.value = String(value)
      this.refreshReadout()
      onCommit(this.guid, { type: 'NumberSlider', value })
    })
    this.root.append(caption, this.input, this.readout)
  }

  private refreshReadout(): void {
    const places = Math.max(0, this.descriptor.decimalPlaces)
    this.readout.textContent = Number(this.input.value).toFixed(places)
  }

  setConfirmed(value: UpdateValue): void {
    if (value.type !== 'NumberSlider') return
    this.confirmed = value
    this.input.value = String(value.value)
    this.refreshReadout()
  }

  revert(): void {
    this.setConfirmed(this.confirmed)
  }
}

class ToggleWidget implements Widget {
  guid: string
  root: HTMLElement
  confirmed: UpdateValue
  private input: HTMLInputElement

  constructor(public descriptor: Extract<Descriptor, { type: 'BooleanToggle' }>,
              doc: Document, onCommit: CommitHandler) {
    this.guid = descriptor.guid
    this.confirmed = { type: 'BooleanToggle', value: descriptor.value }
    this.root = doc.createElement('label')
    this.root.className = 'widget widget-toggle'
    const caption = doc.createElement('span')
    caption.textContent = descriptor.name
    this.input = doc.createElement('input')
    this.input.type = 'checkbox'
    this.input.checked = descriptor.value
    this.input.addEventListener('change', () => {
      onCommit(this.guid, { type: 'BooleanToggle', value: this.input.checked })
    })
    this.root.append(caption, this.input)
  }

  setConfirmed(value: UpdateValue): void {
    if (value.type !== 'BooleanToggle') return
    this.confirmed = value
    this.input.checked = value.value
  }

  revert(): void {
    this.setConfirmed(this.confirmed)
  }
}

class ListWidget implements Widget {
  guid: string
  root: HTMLElement
  confirmed: UpdateValue
  private select: HTMLSelectElement

  constructor(public descriptor: Extract<Descriptor, { type: 'ListParameter' }>,
              doc: Document, onCommit: CommitHandler) {
    this.guid = descriptor.guid
    this.confirmed = { type: 'ListParameter', selected: descriptor.selected }
    this.root = doc.createElement('label')
    this.root.className = 'widget widget-list'
    const caption = doc.createElement('span')
    caption.textContent = descriptor.name
    this.select = doc.createElement('select')
    descriptor.items.forEach((item, index) => {
      const option = doc.createElement('option')
      option.value = String(index)
      option.textContent = item
      this.select.append(option)
    })
    this.select.selectedIndex = clamp(descriptor.selected, 0,
                                      Math.max(0, descriptor.items.length - 1))
    this.select.addEventListener('change', () => {
      onCommit(this.guid,
               { type: 'ListParameter', selected: this.select.selectedIndex })
    })
    this.root.append(caption, this.select)
  }

  setConfirmed(value: UpdateValue): void {
    if (value.type !== 'ListParameter') return
    this.confirmed = value
    this.select.selectedIndex = clamp(value.selected, 0,
                                      Math.max(0, this.descriptor.items.length - 1))
  }

  revert(): void {
    this.setConfirmed(this.confirmed)
  }
}

export class ParameterPanel {
  readonly widgets = new Map<string, Widget>()

  constructor(private container: HTMLElement, private onCommit: CommitHandler,
              private doc: Document = container.ownerDocument) {}

  /** Rebuild so the widget set mirrors the message exactly. */
  render(items: Descriptor[]): void {
    this.widgets.clear()
    this.container.replaceChildren()
    for (const descriptor of items) {
      const widget = this.build(descriptor)
      this.widgets.set(descriptor.guid, widget)
      this.container.append(widget.root)
    }
  }

  private build(descriptor: Descriptor): Widget {
    if (descriptor.type === 'NumberSlider') {
      return new SliderWidget(descriptor, this.doc, this.onCommit)
    }
    if (descriptor.type === 'BooleanToggle') {
      return new ToggleWidget(descriptor, this.doc, this.onCommit)
    }
    return new ListWidget(descriptor, this.doc, this.onCommit)
  }

  applyConfirmed(guid: string, value: UpdateValue): void {
    this.widgets.get(guid)?.setConfirmed(value)
  }

  revert(guid: string): void {
    this.widgets.get(guid)?.revert()
  }
}
