#!/usr/bin/env python3
"""The deployed app answers its health probe."""
import _harness as h


def healthz_ok():
    status, body = h.get_json("/healthz")
    assert status == 200, f"expected 200 got {status}"
    assert body.get("status") == "ok", f"unexpected body {body}"


h.run("t01_health", [("healthz_ok", healthz_ok)])
