#!/usr/bin/env python3
"""
Run every job file in a directory and write one JSON result per job plus a summary.

Default behavior:
  - Reads data/jobs/*.toml
  - Writes data/output/<job>.json and data/output/batch_summary.json

Usage:
  PYTHONPATH=. python3 scripts/run_batch.py
  PYTHONPATH=. python3 scripts/run_batch.py --input-dir data/jobs --output-dir data/output --verify
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List

from dotenv import load_dotenv

from src import __version__
from src.errors import TqftkitError
from src.jobs import JobRunner, error_document, parse_job
from src.parallel import configure_threads


def _write_json(path: Path, payload: Dict[str, Any], indent: int) -> None:
    with path.open("w", encoding="utf-8") as f:
        json.dump(payload, f, indent=indent, sort_keys=True, ensure_ascii=False)
        f.write("\n")


def run_directory(input_dir: Path, output_dir: Path, verify: bool, indent: int, skip_slow: bool) -> Dict[str, Any]:
    runner = JobRunner(verify=verify)
    entries: List[Dict[str, Any]] = []
    for path in sorted(input_dir.glob("*.toml")):
        if skip_slow and path.stem.endswith("_slow"):
            print(f"⏭️  Skipping {path.name}")
            continue
        print(f"📄 {path.name}")
        started = time.perf_counter()
        command = None
        try:
            job = parse_job(path.read_text(encoding="utf-8"))
            command = job.command
            document = runner.run_job(job)
            failed = sorted(name for name, ok in document["checks"].items() if not ok)
            status = "checks_failed" if failed else "ok"
            exit_code = 0
        except TqftkitError as e:
            document = error_document(e, command)
            failed, status, exit_code = [], e.code, e.exit_code
            print(f"   ❌ [{e.code}] {e.message}")
        elapsed = time.perf_counter() - started
        _write_json(output_dir / f"{path.stem}.json", document, indent)
        if status == "ok":
            print(f"   ✅ {command} in {elapsed:.2f}s")
        elif failed:
            print(f"   ⚠️ failed checks: {', '.join(failed)}")
        entries.append({
            "job": path.name,
            "command": command,
            "status": status,
            "exit_code": exit_code,
            "failed_checks": failed,
            "seconds": round(elapsed, 3),
        })
    return {
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
        "verify": verify,
        "jobs": entries,
        "ok": sum(1 for e in entries if e["status"] == "ok"),
        "total": len(entries),
    }


def main():
    parser = argparse.ArgumentParser(description="Run a directory of tqftkit job files")
    parser.add_argument("--input-dir", default="data/jobs", help="Directory of *.toml jobs (default: data/jobs)")
    parser.add_argument("--output-dir", default="data/output", help="Where results go (default: data/output)")
    parser.add_argument("--verify", action="store_true", help="Run every applicable cross-check")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads (default: TQFTKIT_THREADS or 1)")
    parser.add_argument("--json-indent", type=int, default=2, help="Indentation of written JSON (default: 2)")
    parser.add_argument("--skip-slow", action="store_true", help="Skip jobs whose name ends in _slow")
    parser.add_argument("--log-level", default="WARNING", help="Logging level (default: WARNING)")
    args = parser.parse_args()

    logging.basicConfig(level=args.log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    load_dotenv()
    threads = args.threads
    if threads is None and os.getenv("TQFTKIT_THREADS"):
        threads = int(os.getenv("TQFTKIT_THREADS"))
    threads = configure_threads(threads)

    input_dir = Path(args.input_dir)
    if not input_dir.is_dir():
        raise SystemExit(f"Input directory not found: {input_dir}")
    output_dir = Path(args.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    print(f"🚀 Running jobs in {input_dir} (threads={threads}, verify={args.verify})")
    summary = run_directory(input_dir, output_dir, args.verify, args.json_indent, args.skip_slow)
    summary_path = output_dir / "batch_summary.json"
    _write_json(summary_path, summary, args.json_indent)

    print(f"\n📊 {summary['ok']}/{summary['total']} jobs ok")
    print(f"💾 Summary written to {summary_path}")
    if summary["ok"] != summary["total"]:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
