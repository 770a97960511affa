/**
 * Browser entry point. Wires the store, renderer, REST client and the
 * state push subscription together.
 *
 * Query parameters:
 *   api    base URL of the controller service (default: page origin)
 *   ports  number of panel buttons (default 9)
 *   name   heading text, normally the topology name
 */

import { ApiClient } from "./api.js";
import { EventStream } from "./events.js";
import { PanelStore } from "./model.js";
import { Panel } from "./panel.js";

function wsUrl(apiBase: string): string {
  return apiBase.replace(/^http/, "ws").replace(/\/+$/, "") + "/events";
}

export function bootPanel(root: HTMLElement, search: string): { stream: EventStream } {
  const params = new URLSearchParams(search);
  const win = root.ownerDocument.defaultView;
  const origin = win !== null ? win.location.origin : "http://127.0.0.1:8000";
  const apiBase = params.get("api") ?? origin;
  const nPorts = parseInt(params.get("ports") ?? "9", 10);
  const name = params.get("name") ?? "switch panel";

  const store = new PanelStore(name, nPorts);
  const api = new ApiClient(apiBase);
  new Panel(root, store, api);

  const resync = () => {
    api
      .getState()
      .then((state) => store.applyDeviceState(state.selected))
      .catch(() => {
        // the push channel will notice if the service is really gone
      });
  };

  const stream = new EventStream(wsUrl(apiBase), {
    onState: (msg) => store.applyDeviceState(msg.selected),
    onConnection: (connection) => store.setConnection(connection),
    onResync: resync,
  });
  stream.start();
  resync();
  return { stream };
}

const rootElement = typeof document !== "undefined" ? document.getElementById("panel") : null;
if (rootElement !== null) {
  bootPanel(rootElement, window.location.search);
}
