// DOM rendering: everything shown comes straight from gateway responses;
// the UI never synthesizes numbers of its own.

import { Snapshot } from "./state.js";
import { FormSchema } from "./forms.js";
import { displayRational } from "./rational.js";

export interface Elements {
  phase: HTMLElement;
  panel: HTMLElement;
  message: HTMLElement;
}

export function findElements(root: Document): Elements {
  const get = (id: string): HTMLElement => {
    const el = root.getElementById(id);
    if (!el) throw new Error(`missing #${id}`);
    return el;
  };
  return { phase: get("phase"), panel: get("panel"), message: get("message") };
}

export function renderPhase(els: Elements, snap: Snapshot): void {
  const roster = snap.status ? ` · ${snap.status.roster_size} registered` : "";
  els.phase.textContent = `phase: ${snap.phase || "connecting"}${roster}`;
  els.message.textContent = snap.message;
}

export function renderRegisterForm(els: Elements, onSubmit: (name: string) => void): void {
  els.panel.innerHTML = "";
  const label = document.createElement("label");
  label.textContent = "Your name";
  const input = document.createElement("input");
  input.id = "credentials";
  const button = document.createElement("button");
  button.id = "register";
  button.textContent = "Register";
  button.addEventListener("click", () => onSubmit(input.value.trim()));
  els.panel.append(label, input, button);
}

export function renderWaiting(els: Elements, text: string): void {
  els.panel.innerHTML = "";
  const p = document.createElement("p");
  p.className = "waiting";
  p.textContent = text;
  els.panel.appendChild(p);
}

export function renderTypeForm(
  els: Elements,
  schema: FormSchema,
  enabled: boolean,
  onSubmit: (values: Record<string, string>) => void,
): void {
  els.panel.innerHTML = "";
  const title = document.createElement("h2");
  title.textContent = schema.title;
  els.panel.appendChild(title);
  const inputs: Record<string, HTMLInputElement> = {};
  for (const field of schema.fields) {
    const label = document.createElement("label");
    label.textContent = field.label;
    const input = document.createElement("input");
    input.id = `field-${field.name}`;
    input.disabled = !enabled;
    inputs[field.name] = input;
    els.panel.append(label, input);
  }
  const button = document.createElement("button");
  button.id = "submit-type";
  button.textContent = "Submit (one shot)";
  button.disabled = !enabled;
  button.addEventListener("click", () => {
    const values: Record<string, string> = {};
    for (const [name, input] of Object.entries(inputs)) values[name] = input.value;
    onSubmit(values);
  });
  els.panel.appendChild(button);
  if (!enabled) {
    const note = document.createElement("p");
    note.className = "note";
    note.textContent = "Types are submitted once per round; the form is closed.";
    els.panel.appendChild(note);
  }
}

export function renderDone(els: Elements, snap: Snapshot): void {
  els.panel.innerHTML = "";
  const out = snap.outcome;
  if (!out) return;
  const h = document.createElement("h2");
  h.textContent = "Round complete";
  const decision = document.createElement("p");
  decision.id = "decision";
  decision.textContent = `decision: ${JSON.stringify(out.decision)}`;
  const tax = document.createElement("p");
  tax.id = "own-tax";
  const d = displayRational(out.own_tax);
  tax.textContent = `your tax: ${d.exact}${d.hint ? ` (${d.hint})` : ""}`;
  const list = document.createElement("ul");
  list.id = "transfers";
  for (const [payer, payee, amount] of out.own_transfers) {
    const li = document.createElement("li");
    const who = (k: number) => (k === 0 ? "the tax collector" : `player ${k}`);
    li.textContent = `${who(payer)} pays ${displayRational(amount).exact} to ${who(payee)}`;
    list.appendChild(li);
  }
  const roster = document.createElement("p");
  roster.textContent = `${out.roster_size} participants`;
  els.panel.append(h, decision, tax, list, roster);
}

export function renderExcluded(els: Elements, snap: Snapshot): void {
  els.panel.innerHTML = "";
  const h = document.createElement("h2");
  h.textContent = "You are not part of this round";
  const p = document.createElement("p");
  p.id = "excluded-reason";
  p.textContent = snap.message;
  els.panel.append(h, p);
}
