"""annohub-wrapper: run an extension activation against a platform instance.

Activation file (JSON): {"websiteId", "adapterId", "config": {...},
"frequency": seconds}. With --once the activation runs a single time and the
RunReport is printed as JSON; otherwise the scheduler keeps it running at the
configured frequency.

Exit codes: 0 ok, 2 usage or configuration problem, 3 source or platform
unreachable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone

from annohub.wrapper.adapters import build_adapter
from annohub.wrapper.client import PlatformClient, PlatformClientError
from annohub.wrapper.framework import ExtensionActivation, WrapperError, run_extension
from annohub.wrapper.scheduler import Scheduler


def _load_activation(path: str) -> ExtensionActivation:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        return ExtensionActivation(
            website_id=raw["websiteId"],
            adapter_id=raw["adapterId"],
            config=dict(raw.get("config", {})),
            frequency_seconds=int(raw.get("frequency", 24 * 60 * 60)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise WrapperError("ConfigInvalid", f"bad activation file: {exc}") from exc


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="annohub-wrapper", description="Run a platform extension")
    parser.add_argument("--endpoint", default=os.environ.get("ANNOHUB_ENDPOINT"),
                        help="platform base URL (or ANNOHUB_ENDPOINT)")
    parser.add_argument("--activation", required=True, help="path to the activation JSON file")
    parser.add_argument("--once", action="store_true", help="run once and print the report")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(levelname)s %(message)s")
    if not args.endpoint:
        print("--endpoint (or ANNOHUB_ENDPOINT) is required", file=sys.stderr)
        return 2

    try:
        activation = _load_activation(args.activation)
        adapter = build_adapter(activation.adapter_id)
    except (WrapperError, OSError, json.JSONDecodeError) as exc:
        print(str(exc), file=sys.stderr)
        return 2

    clock = lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    with PlatformClient(args.endpoint) as client:
        if args.once:
            try:
                report = run_extension(activation, client, adapter, clock=clock)
            except WrapperError as exc:
                print(str(exc), file=sys.stderr)
                return 2 if exc.code == "ConfigInvalid" else 3
            except PlatformClientError as exc:
                print(str(exc), file=sys.stderr)
                return 3
            json.dump(report.to_json(), sys.stdout, indent=2)
            print()
            return 0

        scheduler = Scheduler()
        scheduler.add(
            activation.adapter_id,
            activation.frequency_seconds,
            lambda: run_extension(activation, client, adapter, clock=clock),
        )
        scheduler.start()
        print(f"scheduled {activation.adapter_id} every ~{activation.frequency_seconds}s", file=sys.stderr)
        try:
            while True:
                import time

                time.sleep(3600)
        except KeyboardInterrupt:
            scheduler.stop()
            return 0


if __name__ == "__main__":
    sys.exit(main())
