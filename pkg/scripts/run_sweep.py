"""Run a configured sweep and print a per-check pass count."""

import argparse
import collections
import json
from pathlib import Path

from anisohardy import suite


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default="configs/default.yaml")
    ap.add_argument("--out")
    args = ap.parse_args()
    cfg = suite.RunConfig.from_yaml(args.config)
    if args.out:
        cfg.out = args.out
    records = suite.run_checks(cfg)
    path = suite.write_report(records, Path(cfg.out) / "report.jsonl")
    tally = collections.defaultdict(lambda: [0, 0])
    for r in records:
        tally[r["check"]][0] += r["pass"]
        tally[r["check"]][1] += 1
    for name, (ok, total) in sorted(tally.items()):
        print(f"{name:26s} {ok:4d}/{total}")
    print(json.dumps(suite.summary(records)["summary"]))
    print(path)


if __name__ == "__main__":
    main()
