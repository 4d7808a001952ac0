// Token-based highlighter mirroring the model grammar.  Purely lexical:
// semantic errors come from the server, never from here.

const KEYWORDS = new Set([
  "agent", "local", "init", "relabel", "repeat", "rep", "system",
  "enums", "channels",
]);
const HYPHEN_KEYWORDS = ["receive-guard", "message-structure", "communication-variables"];
const CONSTANTS = new Set(["star", "empty", "undef", "TRUE", "FALSE", "ch"]);
const OPERATORS = ["==", "!=", "<=", ">=", ":=", "<-", "&&", "||", "->", ".."];
const PUNCT = "(){}[]<>,;:+-*!?=|&";

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function span(cls: string, text: string): string {
  return `<span class="tok-${cls}">${esc(text)}</span>`;
}

export function highlight(source: string): string {
  let out = "";
  let i = 0;
  const n = source.length;
  while (i < n) {
    const c = source[i];
    if (c === "#") {
      let j = i;
      while (j < n && source[j] !== "\n") j++;
      out += span("comment", source.slice(i, j));
      i = j;
      continue;
    }
    if (/\s/.test(c)) {
      out += esc(c);
      i++;
      continue;
    }
    if (/[A-Za-z_]/.test(c)) {
      const hyph = HYPHEN_KEYWORDS.find((k) => source.startsWith(k, i));
      if (hyph) {
        out += span("keyword", hyph);
        i += hyph.length;
        continue;
      }
      let j = i;
      while (j < n && /[A-Za-z0-9_]/.test(source[j])) j++;
      const word = source.slice(i, j);
      // a trailing colon right after an identifier marks a command label
      const isLabel = source[j] === ":" && !KEYWORDS.has(word);
      out += span(
        KEYWORDS.has(word) ? "keyword"
          : CONSTANTS.has(word) ? "constant"
          : isLabel ? "label"
          : "ident",
        word,
      );
      i = j;
      continue;
    }
    if (/[0-9]/.test(c)) {
      let j = i;
      while (j < n && /[0-9]/.test(source[j])) j++;
      out += span("number", source.slice(i, j));
      i = j;
      continue;
    }
    const two = source.slice(i, i + 2);
    if (OPERATORS.includes(two)) {
      out += span("op", two);
      i += 2;
      continue;
    }
    if (PUNCT.includes(c)) {
      out += span("op", c);
      i++;
      continue;
    }
    out += span("error", c);
    i++;
  }
  return out;
}
