import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from threatrag.embeddings import DeterministicEmbedder, WordVectorTable


@pytest.fixture
def det_embedder():
    return DeterministicEmbedder(dim=16, unit_normalize=True)


@pytest.fixture
def word_table():
    vectors = {
        "polazert": [1.0, 0.0, 0.0],
        "solarmarker": [0.0, 1.0, 0.0],
        "yellow": [0.0, 0.0, 1.0],
        "cockatoo": [0.5, 0.5, 0.0],
        "attack": [0.2, 0.8, 0.1],
        "kaseya": [0.9, 0.1, 0.3],
    }
    return WordVectorTable(vectors, 3)


class _Handler(BaseHTTPRequestHandler):
    routes = {}

    def log_message(self, *args):
        pass

    def _respond(self, method):
        handler = self.routes.get((method, self.path.split("?")[0]))
        if handler is None:
            self.send_response(404)
            self.end_headers()
            return
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length) if length else b""
        status, headers, payload = handler(self, body)
        self.send_response(status)
        for key, value in headers.items():
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(payload)

    def do_GET(self):
        self._respond("GET")

    def do_POST(self):
        self._respond("POST")


class LocalServer:
    """Tiny loopback HTTP server for loader and provider tests."""

    def __init__(self):
        handler = type("Handler", (_Handler,), {"routes": {}})
        self._handler = handler
        self.server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    @property
    def base_url(self):
        host, port = self.server.server_address
        return f"http://{host}:{port}"

    def route(self, method, path, fn):
        self._handler.routes[(method, path)] = fn

    def html(self, path, body, content_type="text/html"):
        payload = body.encode("utf-8")
        self.route("GET", path,
                   lambda h, b: (200, {"Content-Type": content_type}, payload))

    def json_post(self, path, fn):
        def wrapped(handler, body):
            request = json.loads(body) if body else {}
            status, payload = fn(request)
            return status, {"Content-Type": "application/json"}, json.dumps(payload).encode()
        self.route("POST", path, wrapped)

    def close(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def local_server():
    server = LocalServer()
    yield server
    server.close()
