#!/usr/bin/env python3
"""The deployed app reports the ref and commit it was started for."""
import os

import _harness as h


def deployment_matches_run():
    _, body = h.get_json("/api/data")
    deployment = body.get("deployment", {})
    expect_ref = os.environ.get("REF_NAME")
    expect_commit = os.environ.get("COMMIT")
    if expect_ref:
        assert deployment.get("ref") == expect_ref, \
            f"app deployed for {deployment.get('ref')!r}, test run is for {expect_ref!r}"
    if expect_commit:
        assert deployment.get("commit") == expect_commit, \
            f"app at {deployment.get('commit')!r}, test run wants {expect_commit!r}"


h.run("t05_deployment_meta", [("deployment_matches_run", deployment_matches_run)])
