// Typed client for the mapping service. The playground talks only to
// /api/map, /api/examples, and /healthz.

export interface MapOptions {
  format: "ntriples" | "turtle";
  strict: boolean;
  includeBlank: boolean;
  baseIri: string;
}

export interface Diagnostic {
  severity: "error" | "warning";
  code: string;
  message: string;
  triplesMap?: string | null;
  cell?: string | null;
}

export interface MapStats {
  cellsVisited: number;
  cellsMatched: number;
  triplesEmitted: number;
  elapsedMillis: number;
}

export interface MapResponse {
  rdf: string;
  diagnostics: Diagnostic[];
  stats: MapStats;
}

export interface ExampleInfo {
  id: string;
  title: string;
  description: string;
  mappingText: string;
  workbookUrl: string;
}

export const DEFAULT_OPTIONS: MapOptions = {
  format: "ntriples",
  strict: false,
  includeBlank: false,
  baseIri: "http://example.org/",
};

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export interface MapRequest {
  mappingText: string;
  exampleId?: string | null;
  workbook?: File | null;
  options?: Partial<MapOptions>;
}

type FetchLike = typeof fetch;

async function errorDetail(response: Response): Promise<string> {
  if (response.status === 413) return "workbook too large";
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") return body.detail;
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return `request failed with status ${response.status}`;
}

export async function fetchExamples(
  baseUrl = "",
  fetchFn: FetchLike = fetch,
): Promise<ExampleInfo[]> {
  const response = await fetchFn(`${baseUrl}/api/examples`);
  if (!response.ok) throw new ApiError(response.status, await errorDetail(response));
  return (await response.json()) as ExampleInfo[];
}

export async function runMap(
  request: MapRequest,
  baseUrl = "",
  fetchFn: FetchLike = fetch,
): Promise<MapResponse> {
  const options = { ...DEFAULT_OPTIONS, ...(request.options ?? {}) };
  let response: Response;
  if (request.workbook) {
    const form = new FormData();
    form.set("mapping", request.mappingText);
    form.set("workbook", request.workbook, request.workbook.name);
    form.set("format", options.format);
    form.set("strict", String(options.strict));
    form.set("includeBlank", String(options.includeBlank));
    form.set("baseIri", options.baseIri);
    response = await fetchFn(`${baseUrl}/api/map`, { method: "POST", body: form });
  } else {
    response = await fetchFn(`${baseUrl}/api/map`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        mappingText: request.mappingText,
        exampleId: request.exampleId ?? null,
        options,
      }),
    });
  }
  if (!response.ok) throw new ApiError(response.status, await errorDetail(response));
  return (await response.json()) as MapResponse;
}
