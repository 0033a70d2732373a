// Thin typed client for the session gateway. The gateway is authoritative
// for every rule; this module only shapes requests and surfaces errors.

export interface StatusBody {
  session: string;
  phase: string;
  roster_size: number;
  mechanism_id: string;
  mechanism_params: Record<string, unknown>;
  interactive_slots_left: number;
}

export interface TicketBody {
  session: string;
  token: string;
  state: string;
}

export interface OutcomeView {
  decision: unknown;
  own_tax: string;
  own_transfers: [number, number, string][];
  roster_size: number;
}

export interface PollBody {
  state: string;
  phase: string;
  outcome: OutcomeView | null;
  reason: string | null;
}

export class GatewayHttpError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

async function parseOrThrow<T>(resp: Response): Promise<T> {
  if (resp.ok) {
    return (await resp.json()) as T;
  }
  let detail = resp.statusText;
  try {
    const body = await resp.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // keep the status text
  }
  throw new GatewayHttpError(resp.status, detail);
}

export class GatewayClient {
  constructor(
    private baseUrl: string,
    private session: string,
    private fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}/sessions/${this.session}${path}`;
  }

  status(): Promise<StatusBody> {
    return this.fetchFn(this.url("/status")).then((r) => parseOrThrow<StatusBody>(r));
  }

  register(credentials: string): Promise<TicketBody> {
    return this.fetchFn(this.url("/players"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ credentials }),
    }).then((r) => parseOrThrow<TicketBody>(r));
  }

  submitType(token: string, typeValue: unknown): Promise<{ ok: boolean; state: string }> {
    return this.fetchFn(this.url(`/players/${token}/type`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ type_value: typeValue }),
    }).then((r) => parseOrThrow<{ ok: boolean; state: string }>(r));
  }

  poll(token: string): Promise<PollBody> {
    return this.fetchFn(this.url(`/players/${token}`)).then((r) =>
      parseOrThrow<PollBody>(r),
    );
  }
}
