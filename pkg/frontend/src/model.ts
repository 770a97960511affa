/**
 * Panel view model. The device owns the truth; this module only mirrors
 * the last state pushed by the service plus transient UI bookkeeping
 * (pending click, connection health).
 */

export interface PortView {
  index: number;
  label: string;
  lit: boolean;
}

export type Connection = "ok" | "lost";

export interface PanelViewModel {
  topologyName: string;
  ports: PortView[];
  connection: Connection;
  pending: number | null;
}

export function createViewModel(topologyName: string, nPorts: number): PanelViewModel {
  if (!Number.isInteger(nPorts) || nPorts < 1) {
    throw new Error(`port count must be a positive integer, got ${nPorts}`);
  }
  const ports: PortView[] = [];
  for (let i = 1; i <= nPorts; i++) {
    ports.push({ index: i, label: String(i), lit: false });
  }
  return { topologyName, ports, connection: "ok", pending: null };
}

/** Index of the lit port, or null when nothing is routed. */
export function litPort(vm: PanelViewModel): number | null {
  const lit = vm.ports.filter((p) => p.lit);
  return lit.length > 0 ? lit[0].index : null;
}

/** The one structural invariant the renderer relies on. */
export function assertAtMostOneLit(vm: PanelViewModel): void {
  const lit = vm.ports.filter((p) => p.lit).map((p) => p.index);
  if (lit.length > 1) {
    throw new Error(`view model has ${lit.length} lit ports: ${lit.join(", ")}`);
  }
}

type Listener = (vm: PanelViewModel) => void;

/**
 * Mutable store wrapping the view model. Every mutation notifies
 * subscribers with the updated model so the renderer stays in sync.
 */
export class PanelStore {
  private vm: PanelViewModel;
  private listeners: Listener[] = [];

  constructor(topologyName: string, nPorts: number) {
    this.vm = createViewModel(topologyName, nPorts);
  }

  get state(): PanelViewModel {
    return this.vm;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  /**
   * Apply a state push from the service. Ports not mentioned go dark and
   * any in-flight click is considered resolved, whether or not the push
   * matches what was requested.
   */
  applyDeviceState(selected: number | null): void {
    for (const p of this.vm.ports) {
      p.lit = p.index === selected;
    }
    this.vm.pending = null;
    this.emit();
  }

  setPending(port: number | null): void {
    this.vm.pending = port;
    this.emit();
  }

  setConnection(connection: Connection): void {
    if (this.vm.connection === connection) {
      return;
    }
    this.vm.connection = connection;
    if (connection === "lost") {
      this.vm.pending = null;
    }
    this.emit();
  }

  private emit(): void {
    assertAtMostOneLit(this.vm);
    for (const listener of this.listeners.slice()) {
      listener(this.vm);
    }
  }
}
