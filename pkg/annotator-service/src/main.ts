#!/usr/bin/env node
/**
 * Stdio entry point: one JSON request per line in, one response per line out.
 *
 * Modes:
 *   --mock                      deterministic keyed/dictionary answers (no model)
 *   --dictionary a,b,c          extra dictionary terms for mock answers
 *   --model <path-or-id>        wrap a local span-extraction model (optional dep)
 *
 * Malformed request lines produce {"v":1,"error":...} and the loop continues.
 */

import { createInterface } from "node:readline";
import process from "node:process";

import { mockAnnotate, type MockOptions } from "./mock.js";
import { makeError, makeResponse, parseRequest, type FieldPrompt } from "./protocol.js";

interface Cli {
  mock: boolean;
  dictionary: string[];
  model: string | null;
}

function parseArgv(argv: string[]): Cli {
  const cli: Cli = { mock: false, dictionary: [], model: null };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--mock") {
      cli.mock = true;
    } else if (arg === "--dictionary") {
      const raw = argv[++i];
      if (!raw) {
        throw new Error("--dictionary needs a comma-separated term list");
      }
      cli.dictionary = raw.split(",").map((t) => t.trim()).filter(Boolean);
    } else if (arg === "--model") {
      cli.model = argv[++i] ?? null;
      if (!cli.model) {
        throw new Error("--model needs a path or identifier");
      }
    } else {
      throw new Error(`unknown flag ${arg}`);
    }
  }
  return cli;
}

type Annotate = (fields: FieldPrompt[], text: string) => Promise<Record<string, string[]>>;

async function loadModelAnnotator(model: string): Promise<Annotate> {
  // The model runtime is an optional dependency so mock mode (the CI default)
  // never needs weights. Any module exposing extractSpans(text, labels) works.
  let runtime: { extractSpans(text: string, labels: string[]): Promise<Record<string, string[]>> };
  try {
    const mod = await import(model);
    runtime = mod.default ?? mod;
  } catch (err) {
    throw new Error(
      `model ${model} is not loadable (${String(err)}); run with --mock instead`,
    );
  }
  return async (fields, text) => {
    const spans = await runtime.extractSpans(text, fields.map((f) => f.name));
    const values: Record<string, string[]> = {};
    for (const field of fields) {
      values[field.name] = spans[field.name] ?? [];
    }
    return values;
  };
}

export async function serveStdio(annotate: Annotate): Promise<void> {
  const rl = createInterface({ input: process.stdin, terminal: false });
  for await (const line of rl) {
    if (!line.trim()) {
      continue;
    }
    let payload: string;
    try {
      const request = parseRequest(line);
      const values = await annotate(request.fields, request.text);
      payload = JSON.stringify(makeResponse(request.doc_id, values));
    } catch (err) {
      payload = JSON.stringify(makeError(err instanceof Error ? err.message : String(err)));
    }
    process.stdout.write(payload + "\n");
  }
}

async function run(): Promise<number> {
  let cli: Cli;
  try {
    cli = parseArgv(process.argv.slice(2));
  } catch (err) {
    process.stderr.write(`usage error: ${err instanceof Error ? err.message : err}\n`);
    return 64;
  }
  let annotate: Annotate;
  if (cli.mock) {
    const options: MockOptions = { dictionary: cli.dictionary };
    annotate = async (fields, text) => mockAnnotate(fields, text, options);
  } else if (cli.model) {
    try {
      annotate = await loadModelAnnotator(cli.model);
    } catch (err) {
      process.stderr.write(`${err instanceof Error ? err.message : err}\n`);
      return 1;
    }
  } else {
    process.stderr.write("no model configured; pass --mock or --model <id>\n");
    return 64;
  }
  await serveStdio(annotate);
  return 0;
}

const isMain = import.meta.url === `file://${process.argv[1]}`;
if (isMain) {
  run().then(
    (code) => process.exit(code),
    (err) => {
      process.stderr.write(`fatal: ${String(err)}\n`);
      process.exit(1);
    },
  );
}
