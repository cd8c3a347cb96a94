import assert from "node:assert/strict";
import { spawn } from "node:child_process";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { test } from "node:test";
import { fileURLToPath } from "node:url";

import { makeResponse, parseRequest } from "../src/protocol.js";

const here = dirname(fileURLToPath(import.meta.url));
const MAIN = join(here, "..", "src", "main.js");
const FIXTURE = join(here, "..", "..", "tests", "fixtures", "malformed.jsonl");

function runServer(args: string[], input: string): Promise<string[]> {
  return new Promise((resolve, reject) => {
    const proc = spawn(process.execPath, [MAIN, ...args], {
      stdio: ["pipe", "pipe", "pipe"],
    });
    let out = "";
    proc.stdout.on("data", (chunk) => (out += chunk));
    proc.on("error", reject);
    proc.on("close", () =>
      resolve(out.split("\n").filter((line) => line.trim().length > 0)),
    );
    proc.stdin.write(input);
    proc.stdin.end();
  });
}

function request(docId: string, text: string, fieldNames: string[]): string {
  return JSON.stringify({
    v: 1,
    doc_id: docId,
    text,
    fields: fieldNames.map((name) => ({ name, type: "string", description: "" })),
  });
}

test("parseRequest validates shape", () => {
  assert.throws(() => parseRequest("not json"), /invalid JSON/);
  assert.throws(() => parseRequest('{"v":2,"doc_id":"a","text":"t","fields":[]}'), /version/);
  assert.throws(() => parseRequest('{"v":1,"text":"t","fields":[]}'), /doc_id/);
  const ok = parseRequest('{"v":1,"doc_id":"a","text":"t","fields":[]}');
  assert.equal(ok.doc_id, "a");
});

test("makeResponse truncates to 16 values per field", () => {
  const many = Array.from({ length: 30 }, (_v, i) => `v${i}`);
  const response = makeResponse("d", { f: many });
  assert.equal(response.values.f.length, 16);
});

test("mock mode answers keyed fields", async () => {
  const lines = await runServer(
    ["--mock"],
    request("d1", "Court: X", ["court"]) + "\n",
  );
  assert.equal(lines.length, 1);
  const response = JSON.parse(lines[0]);
  assert.equal(response.doc_id, "d1");
  assert.deepEqual(response.values, { court: ["X"] });
});

test("zero requested fields yields empty values object", async () => {
  const lines = await runServer(["--mock"], request("d1", "text", []) + "\n");
  assert.deepEqual(JSON.parse(lines[0]).values, {});
});

test("three requests produce three responses with doc_ids preserved", async () => {
  const input =
    request("a", "Court: P", ["court"]) + "\n" +
    request("b", "Court: Q", ["court"]) + "\n" +
    request("c", "Court: R", ["court"]) + "\n";
  const lines = await runServer(["--mock"], input);
  assert.deepEqual(
    lines.map((line) => JSON.parse(line).doc_id),
    ["a", "b", "c"],
  );
});

test("malformed fixture lines produce error objects and the loop continues", async () => {
  const fixture = readFileSync(FIXTURE, "utf-8");
  const lines = await runServer(["--mock"], fixture);
  const parsed = lines.map((line) => JSON.parse(line));
  assert.equal(parsed.length, 7);
  const errors = parsed.filter((obj) => "error" in obj);
  const answers = parsed.filter((obj) => "values" in obj);
  assert.equal(errors.length, 4);
  assert.deepEqual(
    answers.map((obj) => obj.doc_id),
    ["good-1", "good-2", "good-3"],
  );
});

test("no mode flag is a usage error", async () => {
  const proc = spawn(process.execPath, [MAIN], { stdio: ["pipe", "pipe", "pipe"] });
  const code: number = await new Promise((resolve) => {
    proc.on("close", (c) => resolve(c ?? -1));
    proc.stdin.end();
  });
  assert.equal(code, 64);
});
