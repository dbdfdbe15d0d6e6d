// Playground state and its transitions. Pure functions: the view layer
// re-renders from whatever these return.

import type { ExampleInfo, MapResponse } from "./api.js";

export interface PlaygroundState {
  mappingText: string;
  selectedExampleId: string | null;
  uploadedWorkbookName: string | null;
  uploadedWorkbook: File | null;
  lastResponse: MapResponse | null;
  running: boolean;
  banner: string | null;
}

export function initialState(): PlaygroundState {
  return {
    mappingText: "",
    selectedExampleId: null,
    uploadedWorkbookName: null,
    uploadedWorkbook: null,
    lastResponse: null,
    running: false,
    banner: null,
  };
}

export function canRun(state: PlaygroundState): boolean {
  if (state.running) return false;
  if (state.mappingText.trim() === "") return false;
  return state.selectedExampleId !== null || state.uploadedWorkbook !== null;
}

export function loadExample(state: PlaygroundState, example: ExampleInfo): PlaygroundState {
  // Picking an example fills the editor and empties the result pane.
  return {
    ...state,
    mappingText: example.mappingText,
    selectedExampleId: example.id,
    uploadedWorkbookName: null,
    uploadedWorkbook: null,
    lastResponse: null,
    banner: null,
  };
}

export function editMapping(state: PlaygroundState, text: string): PlaygroundState {
  return { ...state, mappingText: text };
}

export function attachWorkbook(state: PlaygroundState, file: File): PlaygroundState {
  // An upload replaces the example workbook (exactly one source at a time).
  return {
    ...state,
    uploadedWorkbook: file,
    uploadedWorkbookName: file.name,
    selectedExampleId: null,
  };
}

export function startRun(state: PlaygroundState): PlaygroundState {
  return { ...state, running: true, banner: null };
}

export function finishRun(state: PlaygroundState, response: MapResponse): PlaygroundState {
  return { ...state, running: false, lastResponse: response };
}

export function failRun(state: PlaygroundState, message: string): PlaygroundState {
  // Editor content and the previous result stay untouched.
  return { ...state, running: false, banner: message };
}

export function dismissBanner(state: PlaygroundState): PlaygroundState {
  return { ...state, banner: null };
}

export function errorCount(state: PlaygroundState): number {
  return countBySeverity(state, "error");
}

export function warningCount(state: PlaygroundState): number {
  return countBySeverity(state, "warning");
}

function countBySeverity(state: PlaygroundState, severity: string): number {
  if (!state.lastResponse) return 0;
  return state.lastResponse.diagnostics.filter((d) => d.severity === severity).length;
}

export function renderedTripleCount(state: PlaygroundState): number {
  if (!state.lastResponse) return 0;
  return state.lastResponse.rdf.split("\n").filter(
    (line) => line.trim() !== "" && !line.startsWith("@prefix"),
  ).length;
}
