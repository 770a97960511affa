/** HTTP client for the switch controller REST endpoints. */

export interface DeviceState {
  selected: number | null;
  source: "shadow" | "queried";
}

/** Raised for any non-success HTTP response; carries the status code. */
export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

const defaultFetch: FetchLike = (input, init) => fetch(input, init);

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn: FetchLike = defaultFetch) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  async getState(): Promise<DeviceState> {
    const resp = await this.fetchFn(`${this.baseUrl}/state`);
    if (!resp.ok) {
      throw new ApiError(resp.status, `GET /state returned ${resp.status}`);
    }
    return (await resp.json()) as DeviceState;
  }

  /**
   * Ask the controller to route the given port. Resolves on 204; any
   * other status raises ApiError with the server's error detail.
   */
  async select(port: number): Promise<void> {
    const resp = await this.fetchFn(`${this.baseUrl}/select`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ port }),
    });
    if (resp.status === 204) {
      return;
    }
    let detail = "";
    try {
      detail = await resp.text();
    } catch {
      // some environments drop the body on error responses; status is enough
    }
    throw new ApiError(resp.status, detail || `select returned ${resp.status}`);
  }
}
