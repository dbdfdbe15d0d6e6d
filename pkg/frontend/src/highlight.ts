// Lightweight Turtle syntax coloring for the editor overlay. Tokenizes the
// raw text into classified spans; concatenating span texts always
// reproduces the input, so the overlay lines up with the textarea.

export interface Span {
  text: string;
  cls: string | null; // css class suffix, e.g. "iri" -> .tok-iri
}

const PUNCT = new Set([".", ";", ",", "[", "]", "(", ")"]);

export function tokenizeTurtle(text: string): Span[] {
  const spans: Span[] = [];
  let i = 0;
  const push = (end: number, cls: string | null) => {
    if (end > i) {
      spans.push({ text: text.slice(i, end), cls });
      i = end;
    }
  };
  while (i < text.length) {
    const c = text[i];
    if (c === "#") {
      let end = text.indexOf("\n", i);
      if (end < 0) end = text.length;
      push(end, "comment");
    } else if (c === "<") {
      let end = text.indexOf(">", i + 1);
      end = end < 0 ? text.length : end + 1;
      push(end, "iri");
    } else if (c === '"' || c === "'") {
      let end = i + 1;
      while (end < text.length && text[end] !== c) {
        if (text[end] === "\\") end += 1;
        end += 1;
      }
      end = end < text.length ? end + 1 : text.length;
      push(end, "string");
    } else if (c === "@") {
      let end = i + 1;
      while (end < text.length && /[a-zA-Z-]/.test(text[end])) end += 1;
      push(end, "keyword");
    } else if (PUNCT.has(c)) {
      push(i + 1, "punct");
    } else if (/\s/.test(c)) {
      let end = i;
      while (end < text.length && /\s/.test(text[end])) end += 1;
      push(end, null);
    } else {
      let end = i;
      while (end < text.length && !/[\s<>"'#;,.()[\]]/.test(text[end])) end += 1;
      if (end === i) end = i + 1; // lone unexpected char
      const word = text.slice(i, end);
      let cls: string | null = null;
      if (word === "a" || word === "true" || word === "false" || word === "PREFIX"
          || word === "BASE") {
        cls = "keyword";
      } else if (/^[+-]?[0-9]/.test(word)) {
        cls = "number";
      } else if (word.includes(":")) {
        cls = "pname";
      }
      push(end, cls);
    }
  }
  return spans;
}

function escapeHtml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function highlightTurtle(text: string): string {
  return tokenizeTurtle(text)
    .map((span) => {
      const escaped = escapeHtml(span.text);
      return span.cls ? `<span class="tok-${span.cls}">${escaped}</span>` : escaped;
    })
    .join("");
}
