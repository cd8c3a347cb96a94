"""HTTP transport for the external-annotator protocol."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from docsieve.annotate.protocol import HttpAnnotatorClient
from docsieve.corpus import Document
from docsieve.errors import ProtocolError
from docsieve.schema import FieldSpec


class _EchoHandler(BaseHTTPRequestHandler):
    mode = "ok"

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length).decode("utf-8")
        lines = []
        for line in body.splitlines():
            if not line.strip():
                continue
            req = json.loads(line)
            if self.mode == "drop_last" and req["doc_id"] == "d2":
                continue
            values = {f["name"]: [] for f in req["fields"]}
            if self.mode == "unrequested":
                values["bogus"] = ["x"]
            lines.append(json.dumps({"v": 1, "doc_id": req["doc_id"], "values": values}))
        payload = ("\n".join(lines) + "\n").encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/x-ndjson")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):  # keep test output clean
        pass


@pytest.fixture
def http_server():
    server = HTTPServer(("127.0.0.1", 0), _EchoHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/annotate"
    server.shutdown()


def _docs():
    return [Document.make(f"d{i}", f"text {i}") for i in range(3)]


def _fields():
    return [FieldSpec("entity", "external entity", "string", "sem")]


def test_http_round_trip(http_server):
    _EchoHandler.mode = "ok"
    client = HttpAnnotatorClient(url=http_server, timeout_seconds=10)
    values = client.annotate(_docs(), _fields())
    assert set(values) == {"d0", "d1", "d2"}
    assert all(v == {"entity": []} for v in values.values())


def test_http_missing_response_rejected(http_server):
    _EchoHandler.mode = "drop_last"
    client = HttpAnnotatorClient(url=http_server, timeout_seconds=10)
    with pytest.raises(ProtocolError) as err:
        client.annotate(_docs(), _fields())
    assert "missing doc_id" in str(err.value)


def test_http_unrequested_field_rejected(http_server):
    _EchoHandler.mode = "unrequested"
    client = HttpAnnotatorClient(url=http_server, timeout_seconds=10)
    with pytest.raises(ProtocolError):
        client.annotate(_docs(), _fields())


def test_http_unreachable_endpoint():
    client = HttpAnnotatorClient(url="http://127.0.0.1:9/nothing", timeout_seconds=2)
    with pytest.raises(ProtocolError):
        client.annotate(_docs(), _fields())
