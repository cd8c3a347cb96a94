/**
 * Mock annotator: deterministic keyed-pattern and dictionary answers.
 *
 * Two rules, mirroring the engine's built-in extractors so transcripts are
 * reproducible without model weights:
 *  - keyed rule: a field named `court` answers from `Court: <value>` /
 *    `Court - <value>` markers in the text (underscores in the field name
 *    match spaces, case-insensitive);
 *  - dictionary rule: terms passed via --dictionary are matched as token
 *    phrases and returned in first-occurrence order.
 */

import type { FieldPrompt } from "./protocol.js";

// Same token definition as the engine: numbers (with , . groups) or letters.
const TOKEN_RE = /\d+(?:[.,]\d+)*|\p{L}+/gu;

export function tokenize(text: string): string[] {
  return text.toLowerCase().match(TOKEN_RE) ?? [];
}

function escapeRegex(raw: string): string {
  return raw.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
}

export function keyedValues(fieldName: string, text: string): string[] {
  const label = escapeRegex(fieldName.replace(/_/g, " "));
  // A dot stays inside the value only when followed by a digit, so decimal
  // amounts survive while sentences still terminate the capture.
  const pattern = new RegExp(
    `\\b${label}(?:\\s*:|\\s+[-–—])\\s*((?:[^\\n.;]|\\.(?=\\d))+)`,
    "gi",
  );
  const values: string[] = [];
  for (const match of text.matchAll(pattern)) {
    values.push(match[1].trim());
  }
  return values;
}

function phrasePosition(tokens: string[], phrase: string[]): number {
  if (phrase.length === 0 || phrase.length > tokens.length) {
    return -1;
  }
  outer: for (let i = 0; i <= tokens.length - phrase.length; i++) {
    for (let j = 0; j < phrase.length; j++) {
      if (tokens[i + j] !== phrase[j]) {
        continue outer;
      }
    }
    return i;
  }
  return -1;
}

export function dictionaryValues(terms: string[], text: string): string[] {
  const tokens = tokenize(text);
  const hits: Array<[number, string]> = [];
  for (const term of terms) {
    const position = phrasePosition(tokens, tokenize(term));
    if (position >= 0) {
      hits.push([position, term]);
    }
  }
  hits.sort((a, b) => (a[0] - b[0]) || (a[1] < b[1] ? -1 : a[1] > b[1] ? 1 : 0));
  return hits.map(([, term]) => term);
}

export interface MockOptions {
  dictionary: string[];
}

export function mockAnnotate(
  fields: FieldPrompt[],
  text: string,
  options: MockOptions,
): Record<string, string[]> {
  const values: Record<string, string[]> = {};
  for (const field of fields) {
    const keyed = keyedValues(field.name, text);
    if (keyed.length > 0) {
      values[field.name] = keyed;
      continue;
    }
    if (options.dictionary.length > 0) {
      values[field.name] = dictionaryValues(options.dictionary, text);
      continue;
    }
    values[field.name] = [];
  }
  return values;
}
