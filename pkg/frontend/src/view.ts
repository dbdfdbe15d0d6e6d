// DOM construction and rendering. One createView() call builds the static
// two-pane layout; render() projects a PlaygroundState onto it. The RDF
// pane always shows the service text byte-for-byte (textContent, never
// markup).

import type { ExampleInfo } from "./api.js";
import { highlightTurtle } from "./highlight.js";
import {
  PlaygroundState,
  canRun,
  errorCount,
  renderedTripleCount,
  warningCount,
} from "./state.js";

export interface Handlers {
  onEdit(text: string): void;
  onSelectExample(id: string): void;
  onUpload(file: File): void;
  onRun(): void;
  onDismissBanner(): void;
}

export interface View {
  root: HTMLElement;
  editor: HTMLTextAreaElement;
  overlay: HTMLElement;
  examplePicker: HTMLSelectElement;
  uploadInput: HTMLInputElement;
  runButton: HTMLButtonElement;
  banner: HTMLElement;
  bannerText: HTMLElement;
  rdfPane: HTMLElement;
  diagnosticsBody: HTMLElement;
  diagnosticsBadge: HTMLElement;
  statsLine: HTMLElement;
  workbookLabel: HTMLElement;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function createView(root: HTMLElement, handlers: Handlers): View {
  const doc = root.ownerDocument;
  root.classList.add("playground");

  const banner = el(doc, "div", "banner hidden");
  const bannerText = el(doc, "span", "banner-text");
  const bannerClose = el(doc, "button", "banner-close", "dismiss");
  bannerClose.addEventListener("click", () => handlers.onDismissBanner());
  banner.append(bannerText, bannerClose);

  const toolbar = el(doc, "div", "toolbar");
  const examplePicker = el(doc, "select", "example-picker");
  examplePicker.id = "example-picker";
  const placeholder = el(doc, "option", undefined, "Load an example…");
  placeholder.value = "";
  examplePicker.append(placeholder);
  examplePicker.addEventListener("change", () => {
    if (examplePicker.value) handlers.onSelectExample(examplePicker.value);
  });

  const uploadInput = el(doc, "input") as HTMLInputElement;
  uploadInput.type = "file";
  uploadInput.accept = ".xlsx";
  uploadInput.id = "workbook-upload";
  uploadInput.addEventListener("change", () => {
    const file = uploadInput.files && uploadInput.files[0];
    if (file) handlers.onUpload(file);
  });
  const workbookLabel = el(doc, "span", "workbook-label", "no workbook");

  const runButton = el(doc, "button", "run-button", "Run");
  runButton.id = "run";
  runButton.addEventListener("click", () => handlers.onRun());

  toolbar.append(examplePicker, uploadInput, workbookLabel, runButton);

  const panes = el(doc, "div", "panes");

  const editorPane = el(doc, "section", "pane editor-pane");
  editorPane.append(el(doc, "h2", undefined, "Mapping"));
  const editorWrap = el(doc, "div", "editor-wrap");
  const overlay = el(doc, "pre", "editor-overlay");
  overlay.setAttribute("aria-hidden", "true");
  const editor = el(doc, "textarea", "editor-input") as HTMLTextAreaElement;
  editor.id = "mapping-editor";
  editor.spellcheck = false;
  editor.addEventListener("input", () => handlers.onEdit(editor.value));
  editor.addEventListener("scroll", () => {
    overlay.scrollTop = editor.scrollTop;
    overlay.scrollLeft = editor.scrollLeft;
  });
  editorWrap.append(overlay, editor);
  editorPane.append(editorWrap);

  const resultPane = el(doc, "section", "pane result-pane");
  const resultHeader = el(doc, "div", "result-header");
  resultHeader.append(el(doc, "h2", undefined, "Result"));
  const diagnosticsBadge = el(doc, "span", "diag-badge");
  diagnosticsBadge.id = "diag-badge";
  resultHeader.append(diagnosticsBadge);
  const statsLine = el(doc, "div", "stats-line");
  statsLine.id = "stats-line";
  const rdfPane = el(doc, "pre", "rdf-pane");
  rdfPane.id = "rdf-pane";
  const diagTable = el(doc, "table", "diagnostics");
  const head = el(doc, "thead");
  const headRow = el(doc, "tr");
  for (const title of ["severity", "code", "message", "map", "cell"]) {
    headRow.append(el(doc, "th", undefined, title));
  }
  head.append(headRow);
  const diagnosticsBody = el(doc, "tbody");
  diagnosticsBody.id = "diagnostics-body";
  diagTable.append(head, diagnosticsBody);
  resultPane.append(resultHeader, statsLine, rdfPane, diagTable);

  panes.append(editorPane, resultPane);
  root.append(banner, toolbar, panes);

  return {
    root, editor, overlay, examplePicker, uploadInput, runButton,
    banner, bannerText, rdfPane, diagnosticsBody, diagnosticsBadge,
    statsLine, workbookLabel,
  };
}

export function setExamples(view: View, examples: ExampleInfo[]): void {
  const doc = view.root.ownerDocument;
  for (const example of examples) {
    const option = el(doc, "option", undefined, example.title);
    option.value = example.id;
    option.title = example.description;
    view.examplePicker.append(option);
  }
}

export function render(view: View, state: PlaygroundState): void {
  const doc = view.root.ownerDocument;

  if (view.editor.value !== state.mappingText) {
    view.editor.value = state.mappingText;
  }
  view.overlay.innerHTML = highlightTurtle(state.mappingText) + "\n";

  view.runButton.disabled = !canRun(state);
  view.runButton.textContent = state.running ? "Running…" : "Run";
  view.examplePicker.value = state.selectedExampleId ?? "";
  view.workbookLabel.textContent = state.uploadedWorkbookName
    ?? (state.selectedExampleId ? "example workbook" : "no workbook");

  view.banner.classList.toggle("hidden", state.banner === null);
  view.bannerText.textContent = state.banner ?? "";

  const response = state.lastResponse;
  view.rdfPane.textContent = response ? response.rdf : "";
  view.diagnosticsBody.textContent = "";
  if (response) {
    for (const diag of response.diagnostics) {
      const row = el(doc, "tr", `diag-row diag-${diag.severity}`);
      const badge = el(doc, "td");
      badge.append(el(doc, "span", `severity-badge severity-${diag.severity}`,
                      diag.severity));
      row.append(badge);
      row.append(el(doc, "td", "diag-code", diag.code));
      row.append(el(doc, "td", "diag-message", diag.message));
      row.append(el(doc, "td", "diag-map", diag.triplesMap ?? ""));
      row.append(el(doc, "td", "diag-cell", diag.cell ?? ""));
      view.diagnosticsBody.append(row);
    }
    const errors = errorCount(state);
    const warnings = warningCount(state);
    view.diagnosticsBadge.textContent =
      `${errors} error${errors === 1 ? "" : "s"}, ` +
      `${warnings} warning${warnings === 1 ? "" : "s"}`;
    view.diagnosticsBadge.className =
      `diag-badge ${errors ? "has-errors" : warnings ? "has-warnings" : "clean"}`;
    const s = response.stats;
    view.statsLine.textContent =
      `${renderedTripleCount(state)} triples shown · visited ${s.cellsVisited} cells, ` +
      `matched ${s.cellsMatched}, emitted ${s.triplesEmitted} triples ` +
      `in ${s.elapsedMillis} ms`;
  } else {
    view.diagnosticsBadge.textContent = "";
    view.diagnosticsBadge.className = "diag-badge";
    view.statsLine.textContent = "";
  }
}
