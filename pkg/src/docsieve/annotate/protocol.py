"""Wire protocol v1 for external annotators.

JSON Lines, one object per line, over a subprocess's stdio or an HTTP POST
body. Requests carry doc_id, text and the requested field prompts; each
response line must answer one requested doc_id with values for requested
fields only. The client validates strictly: unknown fields, missing
doc_ids, or a foreign protocol version are errors, not warnings.

    request:  {"v":1, "doc_id":"...", "text":"...", "fields":[{"name":..., "type":..., "description":...}]}
    response: {"v":1, "doc_id":"...", "values":{"field":["...", ...]}}
"""

from __future__ import annotations

import json
import subprocess
import urllib.request
from dataclasses import dataclass

from ..corpus import Document
from ..errors import AnnotatorTimeout, ProtocolError, VersionMismatch
from ..schema import FieldSpec

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT_SECONDS = 60.0


def encode_request(doc: Document, fields: list[FieldSpec]) -> str:
    return json.dumps(
        {
            "v": PROTOCOL_VERSION,
            "doc_id": doc.doc_id,
            "text": doc.text,
            "fields": [
                {"name": f.name, "type": f.value_type, "description": f.description}
                for f in fields
            ],
        },
        ensure_ascii=False,
        sort_keys=True,
    )


def decode_response(line: str, requested_fields: set[str]) -> tuple[str, dict[str, list[str]]]:
    """Parse and validate one response line."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid JSON: {exc.msg}", line) from exc
    if not isinstance(obj, dict):
        raise ProtocolError("response must be an object", line)
    if obj.get("v") != PROTOCOL_VERSION:
        raise VersionMismatch(f"expected v{PROTOCOL_VERSION}, got {obj.get('v')!r}")
    if "error" in obj:
        raise ProtocolError(f"annotator error: {obj['error']}", line)
    doc_id = obj.get("doc_id")
    values = obj.get("values")
    if not isinstance(doc_id, str) or not isinstance(values, dict):
        raise ProtocolError("response needs string 'doc_id' and object 'values'", line)
    for name in values:
        if name not in requested_fields:
            raise ProtocolError(f"unrequested field {name!r} in response", line)
    out = {}
    for name, vals in values.items():
        if not isinstance(vals, list):
            raise ProtocolError(f"values for {name!r} must be a list", line)
        out[name] = [str(v) for v in vals]
    return doc_id, out


def validate_transcript(
    request_lines: list[str], response_lines: list[str]
) -> list[str]:
    """Protocol-conformance check over a recorded exchange.

    Returns a list of problems (empty == conformant). Used to vet external
    annotators from fixture transcripts without running them.
    """
    problems: list[str] = []
    requested: dict[str, set[str]] = {}
    for i, line in enumerate(request_lines):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            problems.append(f"request {i}: invalid JSON ({exc.msg})")
            continue
        if obj.get("v") != PROTOCOL_VERSION:
            problems.append(f"request {i}: bad version {obj.get('v')!r}")
        doc_id = obj.get("doc_id")
        if not isinstance(doc_id, str):
            problems.append(f"request {i}: missing doc_id")
            continue
        fields = obj.get("fields", [])
        if not isinstance(fields, list) or any(
            not isinstance(f, dict) or "name" not in f for f in fields
        ):
            problems.append(f"request {i}: malformed fields")
            continue
        requested[doc_id] = {f["name"] for f in fields}
    answered: set[str] = set()
    for i, line in enumerate(response_lines):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            problems.append(f"response {i}: invalid JSON ({exc.msg})")
            continue
        if obj.get("v") != PROTOCOL_VERSION:
            problems.append(f"response {i}: bad version {obj.get('v')!r}")
        if "error" in obj:
            continue  # error responses answer malformed requests
        doc_id = obj.get("doc_id")
        if doc_id not in requested:
            problems.append(f"response {i}: unknown doc_id {doc_id!r}")
            continue
        if doc_id in answered:
            problems.append(f"response {i}: duplicate doc_id {doc_id!r}")
        answered.add(doc_id)
        for name in obj.get("values", {}):
            if name not in requested[doc_id]:
                problems.append(f"response {i}: unrequested field {name!r}")
    for doc_id in requested:
        if doc_id not in answered:
            problems.append(f"missing response for doc_id {doc_id!r}")
    return problems


@dataclass
class SubprocessAnnotatorClient:
    """Drives an external annotator over stdio, one batch per invocation."""

    argv: list[str]
    timeout_seconds: float = DEFAULT_TIMEOUT_SECONDS

    def annotate(
        self, docs: list[Document], fields: list[FieldSpec]
    ) -> dict[str, dict[str, list[str]]]:
        payload = "".join(encode_request(doc, fields) + "\n" for doc in docs)
        try:
            proc = subprocess.run(
                self.argv,
                input=payload.encode("utf-8"),
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                timeout=self.timeout_seconds,
            )
        except subprocess.TimeoutExpired as exc:
            raise AnnotatorTimeout(
                f"annotator exceeded {self.timeout_seconds}s"
            ) from exc
        except OSError as exc:
            raise ProtocolError(f"cannot start annotator: {exc}") from exc
        return _collect_responses(proc.stdout.decode("utf-8"), docs, fields)


@dataclass
class HttpAnnotatorClient:
    """POSTs the request JSONL body to an HTTP endpoint, reads JSONL back."""

    url: str
    timeout_seconds: float = DEFAULT_TIMEOUT_SECONDS

    def annotate(
        self, docs: list[Document], fields: list[FieldSpec]
    ) -> dict[str, dict[str, list[str]]]:
        payload = "".join(encode_request(doc, fields) + "\n" for doc in docs)
        req = urllib.request.Request(
            self.url,
            data=payload.encode("utf-8"),
            headers={"Content-Type": "application/x-ndjson"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_seconds) as resp:
                body = resp.read().decode("utf-8")
        except OSError as exc:
            raise ProtocolError(f"endpoint unreachable: {exc}") from exc
        return _collect_responses(body, docs, fields)


def _collect_responses(
    body: str, docs: list[Document], fields: list[FieldSpec]
) -> dict[str, dict[str, list[str]]]:
    requested_ids = {d.doc_id for d in docs}
    requested_fields = {f.name for f in fields}
    out: dict[str, dict[str, list[str]]] = {}
    for line in body.splitlines():
        if not line.strip():
            continue
        doc_id, values = decode_response(line, requested_fields)
        if doc_id not in requested_ids:
            raise ProtocolError(f"response for unrequested doc_id {doc_id!r}", line)
        if doc_id in out:
            raise ProtocolError(f"duplicate response for doc_id {doc_id!r}", line)
        out[doc_id] = values
    missing = sorted(requested_ids - set(out))
    if missing:
        raise ProtocolError(f"missing doc_id {missing[0]!r} in responses")
    return out
