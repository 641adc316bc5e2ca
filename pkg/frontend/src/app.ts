// Three-panel browser client: dialog transcript (1), suggested questions (2),
// prompt + graph upload (3).  All state is server-authoritative; this file is
// DOM wiring over the typed client, editor, poller, and monitor models.

import { ApiClient, ApiError } from "./api.js";
import { ChainEditor } from "./chainEditor.js";
import { labelSummary, previewGraph } from "./graphPreview.js";
import { MonitorModel } from "./monitor.js";
import { EventPoller } from "./poller.js";
import type { SessionView } from "./types.js";

const client = new ApiClient("");

const el = (id: string) => document.getElementById(id)!;
const dialog = () => el("dialog-panel");

let graphDocument = "";
let currentSession: SessionView | null = null;
let editor: ChainEditor | null = null;
let knownApis = new Set<string>();

function say(role: "user" | "system", text: string): HTMLElement {
  const bubble = document.createElement("div");
  bubble.className = `bubble ${role}`;
  bubble.textContent = text;
  dialog().appendChild(bubble);
  bubble.scrollIntoView({ block: "end" });
  return bubble;
}

function sayError(err: unknown): void {
  const message = err instanceof ApiError ? `${err.status}: ${err.message}` : String(err);
  const bubble = say("system", message);
  bubble.classList.add("error");
}

// -- panel 3: prompt + upload ------------------------------------------------

async function onGraphChosen(file: File): Promise<void> {
  graphDocument = await file.text();
  const preview = previewGraph(graphDocument);
  el("graph-preview").textContent =
    `${preview.name || "(unnamed)"}: ${preview.nodes} nodes, ${preview.edges} edges` +
    (preview.nodes ? `  labels: ${labelSummary(preview)}` : "");
  try {
    const { questions } = await client.suggest(graphDocument);
    renderSuggestions(questions);
  } catch (err) {
    sayError(err);
  }
}

function renderSuggestions(questions: string[]): void {
  const box = el("suggestions");
  box.textContent = "";
  for (const q of questions) {
    const button = document.createElement("button");
    button.className = "suggestion";
    button.textContent = q;
    button.onclick = () => {
      (el("question") as HTMLInputElement).value = q;
    };
    box.appendChild(button);
  }
}

async function onSubmit(): Promise<void> {
  const question = (el("question") as HTMLInputElement).value.trim();
  if (!question || !graphDocument) {
    say("system", "Pick a graph file and type a question first.");
    return;
  }
  say("user", question);
  try {
    currentSession = await client.submitSession(question, graphDocument);
    const { apis } = await client.apis();
    knownApis = new Set(apis.map((a) => a.id));
    editor = new ChainEditor(currentSession.chain, knownApis);
    say("system", `Proposed a ${currentSession.chain.length}-step chain. Review and confirm:`);
    renderEditor();
  } catch (err) {
    sayError(err);
  }
}

// -- panel 1: editable chain + confirmation ----------------------------------

function renderEditor(): void {
  if (!editor || !currentSession) return;
  const host = document.createElement("div");
  host.className = "chain-editor";
  host.id = "chain-editor";
  el("chain-editor")?.remove();

  editor.list().forEach((step, i) => {
    const row = document.createElement("div");
    row.className = "chain-row";
    const args = Object.entries(step.args)
      .map(([k, v]) => `${k}=${v}`)
      .join(" ");
    const label = document.createElement("span");
    label.textContent = `${i}. ${step.api}${args ? " " + args : ""}`;
    row.appendChild(label);

    row.appendChild(rowButton("up", () => i > 0 && mutate(() => editor!.moveStep(i, i - 1))));
    row.appendChild(rowButton("del", () => mutate(() => editor!.deleteStep(i))));
    row.appendChild(
      rowButton("bind", () => {
        const entry = prompt("binding as name=value ($k references step k's output)", "");
        if (!entry) return;
        const [name, ...rest] = entry.split("=");
        mutate(() => editor!.setBinding(i, name, rest.join("=")));
      }),
    );
    host.appendChild(row);
  });

  const insert = document.createElement("div");
  insert.className = "chain-row";
  const picker = document.createElement("select");
  for (const api of [...knownApis].sort()) {
    const opt = document.createElement("option");
    opt.value = api;
    opt.textContent = api;
    picker.appendChild(opt);
  }
  insert.appendChild(picker);
  insert.appendChild(
    rowButton("insert at end", () => mutate(() => editor!.insertStep(editor!.length, picker.value))),
  );
  host.appendChild(insert);

  const confirm = document.createElement("button");
  confirm.className = "confirm";
  confirm.textContent = "Confirm and execute";
  confirm.onclick = () => void confirmAndExecute();
  host.appendChild(confirm);

  dialog().appendChild(host);
}

function rowButton(text: string, onClick: () => void): HTMLButtonElement {
  const button = document.createElement("button");
  button.textContent = text;
  button.onclick = onClick;
  return button;
}

function mutate(op: () => void): void {
  try {
    op();
  } catch (err) {
    sayError(err);
  }
  renderEditor();
}

// -- panel 1: execution timeline ----------------------------------------------

async function confirmAndExecute(): Promise<void> {
  if (!editor || !currentSession) return;
  let view: SessionView;
  try {
    view = await client.confirm(currentSession.id, editor.toPayload());
    el("chain-editor")?.remove();
    view = await client.execute(view.id);
  } catch (err) {
    sayError(err);
    return;
  }
  currentSession = view;

  const monitor = new MonitorModel(view.chain);
  const timeline = document.createElement("div");
  timeline.className = "timeline";
  dialog().appendChild(timeline);

  const render = () => {
    timeline.textContent = "";
    for (const row of monitor.rows) {
      const div = document.createElement("div");
      div.className = `step ${row.state}`;
      div.textContent = `${row.index}. ${row.api} [${row.state}]` +
        (row.payload ? ` ${row.payload.slice(0, 120)}` : "");
      timeline.appendChild(div);
    }
  };
  render();

  const poller = new EventPoller(client, view.id, {
    intervalMs: 250,
    onEvent: (event) => {
      monitor.apply(event);
      render();
    },
    onConnectionError: () => say("system", "connection lost; retrying from last event"),
  });
  const finalStatus = await poller.run();
  if (finalStatus) monitor.finish(finalStatus);
  render();

  const final = await client.getSession(view.id);
  say("system", final.status === "done"
    ? final.final_payload ?? "done"
    : `execution ${final.status}`);
}

// -- wiring -------------------------------------------------------------------

export function start(): void {
  (el("graph-file") as HTMLInputElement).addEventListener("change", (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (file) void onGraphChosen(file);
  });
  el("submit").addEventListener("click", () => void onSubmit());
  (el("question") as HTMLInputElement).addEventListener("keydown", (e) => {
    if (e.key === "Enter") void onSubmit();
  });
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  start();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", start);
}
