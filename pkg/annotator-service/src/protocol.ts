/**
 * Wire protocol v1: JSON Lines over stdio.
 *
 * request:  {"v":1, "doc_id":"...", "text":"...", "fields":[{"name","type","description"}]}
 * response: {"v":1, "doc_id":"...", "values":{"field":["...", ...]}}
 * error:    {"v":1, "error":"..."}   (malformed request; the loop continues)
 */

export const PROTOCOL_VERSION = 1;
export const MAX_VALUES_PER_FIELD = 16;

export interface FieldPrompt {
  name: string;
  type: string;
  description: string;
}

export interface AnnotateRequest {
  v: number;
  doc_id: string;
  text: string;
  fields: FieldPrompt[];
}

export interface AnnotateResponse {
  v: number;
  doc_id: string;
  values: Record<string, string[]>;
}

export interface ErrorResponse {
  v: number;
  error: string;
}

export function parseRequest(line: string): AnnotateRequest {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch {
    throw new Error("invalid JSON");
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new Error("request must be a JSON object");
  }
  const req = obj as Record<string, unknown>;
  if (req.v !== PROTOCOL_VERSION) {
    throw new Error(`unsupported protocol version ${String(req.v)}`);
  }
  if (typeof req.doc_id !== "string" || req.doc_id.length === 0) {
    throw new Error("missing doc_id");
  }
  if (typeof req.text !== "string") {
    throw new Error("missing text");
  }
  if (!Array.isArray(req.fields)) {
    throw new Error("missing fields array");
  }
  const fields: FieldPrompt[] = [];
  for (const raw of req.fields) {
    if (typeof raw !== "object" || raw === null) {
      throw new Error("field prompt must be an object");
    }
    const f = raw as Record<string, unknown>;
    if (typeof f.name !== "string" || f.name.length === 0) {
      throw new Error("field prompt needs a name");
    }
    fields.push({
      name: f.name,
      type: typeof f.type === "string" ? f.type : "string",
      description: typeof f.description === "string" ? f.description : "",
    });
  }
  return { v: PROTOCOL_VERSION, doc_id: req.doc_id, text: req.text, fields };
}

export function makeResponse(
  docId: string,
  values: Record<string, string[]>,
): AnnotateResponse {
  const capped: Record<string, string[]> = {};
  for (const [name, list] of Object.entries(values)) {
    capped[name] = list.slice(0, MAX_VALUES_PER_FIELD);
  }
  return { v: PROTOCOL_VERSION, doc_id: docId, values: capped };
}

export function makeError(message: string): ErrorResponse {
  return { v: PROTOCOL_VERSION, error: message };
}
