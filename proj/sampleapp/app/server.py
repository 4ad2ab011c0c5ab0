#!/usr/bin/env python3
"""Toy QA app: serves a small product catalog from memory.

Everything is loaded before the socket opens, so the process keeps serving
even if its workspace directory is cleaned up underneath it.
"""
import json
import os
import signal
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

CATALOG = [
    {"id": 1, "name": "anvil", "price": 49.99},
    {"id": 2, "name": "rocket skates", "price": 129.5},
    {"id": 3, "name": "tunnel paint", "price": 15.0},
]

STARTUP = {
    "ref": os.environ.get("REF_NAME", "unknown"),
    "commit": os.environ.get("COMMIT", "unknown"),
    "mode": os.environ.get("APP_MODE", "dev"),
}


class Handler(BaseHTTPRequestHandler):
    def _reply(self, status, payload):
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/api/data":
            self._reply(200, {"catalog": CATALOG, "deployment": STARTUP})
        elif self.path == "/healthz":
            self._reply(200, {"status": "ok"})
        else:
            self._reply(404, {"error": "no such route"})

    def log_message(self, fmt, *args):
        sys.stderr.write("%s - %s\n" % (self.address_string(), fmt % args))


def main() -> int:
    port = int(os.environ.get("PORT", "8000"))
    server = ThreadingHTTPServer(("127.0.0.1", port), Handler)
    signal.signal(signal.SIGTERM, lambda *_: sys.exit(0))
    print(f"listening on 127.0.0.1:{port} for {STARTUP['ref']}@{STARTUP['commit']}")
    server.serve_forever()
    return 0


if __name__ == "__main__":
    sys.exit(main())
