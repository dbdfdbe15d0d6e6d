// Wires state, API, and view into the playground loop. Kept separate from
// main.ts so tests can mount the app against a fake fetch.

import { ApiError, ExampleInfo, fetchExamples, runMap } from "./api.js";
import {
  PlaygroundState,
  attachWorkbook,
  dismissBanner,
  editMapping,
  failRun,
  finishRun,
  initialState,
  loadExample,
  startRun,
} from "./state.js";
import { Handlers, View, createView, render, setExamples } from "./view.js";

export interface App {
  view: View;
  examples: ExampleInfo[];
  state(): PlaygroundState;
  /** Resolves when the in-flight run (if any) settles. */
  whenIdle(): Promise<void>;
}

export async function mountApp(
  root: HTMLElement,
  baseUrl = "",
  fetchFn: typeof fetch = fetch,
): Promise<App> {
  let state = initialState();
  let pending: Promise<void> = Promise.resolve();
  let examples: ExampleInfo[] = [];

  const update = (next: PlaygroundState) => {
    state = next;
    render(view, state);
  };

  const handlers: Handlers = {
    onEdit(text) {
      update(editMapping(state, text));
    },
    onSelectExample(id) {
      const example = examples.find((e) => e.id === id);
      if (example) update(loadExample(state, example));
    },
    onUpload(file) {
      update(attachWorkbook(state, file));
    },
    onRun() {
      if (state.running) return; // single in-flight request
      update(startRun(state));
      pending = runMap(
        {
          mappingText: state.mappingText,
          exampleId: state.selectedExampleId,
          workbook: state.uploadedWorkbook,
        },
        baseUrl,
        fetchFn,
      ).then(
        (response) => update(finishRun(state, response)),
        (error: unknown) => {
          const message =
            error instanceof ApiError
              ? error.message
              : `network failure: ${error instanceof Error ? error.message : error}`;
          update(failRun(state, message));
        },
      );
    },
    onDismissBanner() {
      update(dismissBanner(state));
    },
  };

  const view = createView(root, handlers);
  try {
    examples = await fetchExamples(baseUrl, fetchFn);
    setExamples(view, examples);
  } catch (error) {
    state = failRun(state, "could not load examples from the service");
  }
  render(view, state);

  return {
    view,
    examples,
    state: () => state,
    whenIdle: () => pending,
  };
}
