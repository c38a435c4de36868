#!/usr/bin/env python3
"""
Run one tqftkit job file and print its JSON result

Usage:
  PYTHONPATH=. python3 scripts/tqftkit.py data/jobs/milgram_semion.toml
  PYTHONPATH=. python3 scripts/tqftkit.py data/jobs/anomaly4_k3_a1_slow.toml --verify --threads 4
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from dotenv import load_dotenv

from src.errors import INPUT_EXIT_CODE, TqftkitError
from src.jobs import JobRunner, error_document, parse_job
from src.parallel import configure_threads


def main():
    parser = argparse.ArgumentParser(description="Compute exact TQFT invariants from a TOML job file")
    parser.add_argument("jobfile", help="Path to the TOML job file")
    parser.add_argument("--verify", action="store_true",
                        help="Run every applicable cross-check and fail on mismatch")
    parser.add_argument("--threads", type=int, default=None,
                        help="Worker threads for exhaustive sums (default: TQFTKIT_THREADS or 1)")
    parser.add_argument("--json-indent", type=int, default=2,
                        help="Indentation of the JSON output (default: 2)")
    parser.add_argument("--log-level", default="WARNING",
                        help="Logging level (default: WARNING)")
    args = parser.parse_args()

    logging.basicConfig(level=args.log_level.upper(), stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    load_dotenv()

    threads = args.threads
    if threads is None and os.getenv("TQFTKIT_THREADS"):
        threads = int(os.getenv("TQFTKIT_THREADS"))
    threads = configure_threads(threads)

    path = Path(args.jobfile)
    if not path.exists():
        print(f"❌ Job file not found: {path}", file=sys.stderr)
        raise SystemExit(INPUT_EXIT_CODE)

    print(f"🚀 Running {path} (threads={threads}, verify={args.verify})", file=sys.stderr)
    command = None
    try:
        job = parse_job(path.read_text(encoding="utf-8"))
        command = job.command
        document = JobRunner(verify=args.verify).run_job(job)
    except TqftkitError as e:
        kind = "input" if e.exit_code == INPUT_EXIT_CODE else "domain"
        print(f"❌ {kind} error [{e.code}]: {e.message}", file=sys.stderr)
        json.dump(error_document(e, command), sys.stdout, indent=args.json_indent, sort_keys=True, ensure_ascii=False)
        sys.stdout.write("\n")
        raise SystemExit(e.exit_code)

    json.dump(document, sys.stdout, indent=args.json_indent, sort_keys=True, ensure_ascii=False)
    sys.stdout.write("\n")
    failed = [name for name, ok in document["checks"].items() if not ok]
    if failed:
        print(f"⚠️ Checks failed: {', '.join(failed)}", file=sys.stderr)
    else:
        print(f"✅ {document['command']} done ({len(document['checks'])} checks passed)", file=sys.stderr)


if __name__ == "__main__":
    main()
