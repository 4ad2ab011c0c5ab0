#!/usr/bin/env python3
"""Toy build step: byte-compiles the app and drops a manifest per target.

The orchestrator launches one build task per target with BUILD_TARGET set.
"""
import argparse
import compileall
import json
import os
import pathlib
import sys


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=os.environ.get("WORKSPACE", ".") + "/out")
    args = parser.parse_args()

    target = os.environ.get("BUILD_TARGET", "all")
    src_root = pathlib.Path(__file__).resolve().parent
    out_dir = pathlib.Path(args.out) / target
    out_dir.mkdir(parents=True, exist_ok=True)

    if not compileall.compile_dir(str(src_root / "app"), quiet=1):
        print("byte-compilation failed", file=sys.stderr)
        return 1

    manifest = {
        "target": target,
        "commit": os.environ.get("COMMIT", "unknown"),
        "ref": os.environ.get("REF_NAME", "unknown"),
        "inputs": sorted(p.name for p in (src_root / "app").glob("*.py")),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"built {target}: {manifest['inputs']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
