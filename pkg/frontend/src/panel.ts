/**
 * DOM renderer for the switch panel: one momentary button and one
 * indicator per port, mirroring the physical front panel layout.
 *
 * The renderer never decides which port is routed. Indicators follow
 * the store, and the store follows state pushes from the service.
 */

import { ApiClient } from "./api.js";
import { PanelStore, PanelViewModel, assertAtMostOneLit } from "./model.js";

export const TOAST_MS = 4000;

export class Panel {
  private readonly root: HTMLElement;
  private readonly doc: Document;
  private readonly store: PanelStore;
  private readonly api: ApiClient;
  private readonly body: HTMLElement;
  private readonly toastArea: HTMLElement;

  /** Promise for the most recent click's request, for callers that await it. */
  inFlight: Promise<void> | null = null;

  constructor(root: HTMLElement, store: PanelStore, api: ApiClient) {
    this.root = root;
    this.doc = root.ownerDocument;
    this.store = store;
    this.api = api;

    this.body = this.doc.createElement("div");
    this.body.className = "panel-body";
    this.toastArea = this.doc.createElement("div");
    this.toastArea.className = "toast-area";
    this.root.appendChild(this.body);
    this.root.appendChild(this.toastArea);

    store.subscribe((vm) => this.render(vm));
    this.render(store.state);
  }

  render(vm: PanelViewModel): void {
    assertAtMostOneLit(vm);
    this.body.innerHTML = "";

    const title = this.doc.createElement("h1");
    title.className = "panel-title";
    title.textContent = vm.topologyName;
    this.body.appendChild(title);

    if (vm.connection === "lost") {
      const banner = this.doc.createElement("div");
      banner.className = "banner";
      banner.textContent = "connection lost";
      this.body.appendChild(banner);
    }

    const row = this.doc.createElement("div");
    row.className = "ports";
    for (const port of vm.ports) {
      const cell = this.doc.createElement("div");
      cell.className = "port-cell";

      const led = this.doc.createElement("span");
      led.className = port.lit ? "led lit" : "led";
      cell.appendChild(led);

      const button = this.doc.createElement("button");
      button.className = "port-button";
      if (vm.pending === port.index) {
        button.className += " pending";
      }
      button.textContent = port.label;
      button.setAttribute("data-port", String(port.index));
      button.disabled = vm.connection === "lost";
      button.addEventListener("click", () => {
        this.inFlight = this.onButton(port.index);
      });
      cell.appendChild(button);

      row.appendChild(cell);
    }
    this.body.appendChild(row);
  }

  /**
   * Handle a button press: mark it pending and post the selection. The
   * indicator lights only when the service pushes the new state back.
   */
  async onButton(n: number): Promise<void> {
    if (this.store.state.connection === "lost") {
      return;
    }
    this.store.setPending(n);
    try {
      await this.api.select(n);
    } catch (err) {
      this.store.setPending(null);
      this.toast(err instanceof Error ? err.message : String(err));
    }
  }

  toast(message: string): void {
    const note = this.doc.createElement("div");
    note.className = "toast";
    note.textContent = message;
    this.toastArea.appendChild(note);
    setTimeout(() => {
      if (note.parentNode === this.toastArea) {
        this.toastArea.removeChild(note);
      }
    }, TOAST_MS);
  }
}
