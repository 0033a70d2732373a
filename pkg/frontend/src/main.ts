// Wiring: read the gateway location, build the client + state machine,
// render on every change, poll at one-second cadence.

import { GatewayClient } from "./api.js";
import { formSchema } from "./forms.js";
import { SessionModel, Snapshot } from "./state.js";
import * as view from "./view.js";

export interface AppHandle {
  model: SessionModel;
  tick(): Promise<void>;
  stop(): void;
}

export function startApp(
  root: Document,
  baseUrl: string,
  session: string,
  fetchFn: typeof fetch = fetch,
  pollMs = 1000,
): AppHandle {
  const els = view.findElements(root);
  const client = new GatewayClient(baseUrl, session, fetchFn);
  const model = new SessionModel(client);

  const render = (snap: Snapshot) => {
    view.renderPhase(els, snap);
    if (snap.state === "idle" || snap.state === "registering") {
      view.renderRegisterForm(els, (name) => void model.register(name));
    } else if (snap.state === "registered") {
      view.renderWaiting(els, "Registered. Waiting for the round to open…");
    } else if (snap.state === "awaiting-type" || snap.state === "submitting") {
      const schema = formSchema(
        snap.status?.mechanism_id ?? "vickrey",
        snap.status?.mechanism_params ?? {},
      );
      view.renderTypeForm(els, schema, snap.canSubmit, (values) => {
        try {
          void model.submit(schema.toTypeValue(values));
        } catch (err) {
          els.message.textContent = err instanceof Error ? err.message : String(err);
        }
      });
    } else if (snap.state === "computing") {
      view.renderWaiting(els, "Type submitted. Computing the decision…");
    } else if (snap.state === "done") {
      view.renderDone(els, snap);
    } else if (snap.state === "excluded") {
      view.renderExcluded(els, snap);
    }
  };

  model.onChange(render);
  render(model.snapshot());
  void model.refreshStatus();

  const tick = async () => {
    await model.refreshStatus();
    await model.pollOnce();
  };
  const timer = setInterval(() => void tick(), pollMs);
  return { model, tick, stop: () => clearInterval(timer) };
}

declare global {
  interface Window {
    mdpApp?: AppHandle;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined" &&
    document.getElementById("panel")) {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("gateway") ?? "http://127.0.0.1:8000";
  const session = params.get("session") ?? "interactive-vickrey";
  window.mdpApp = startApp(document, base, session);
}
