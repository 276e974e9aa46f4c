"""Run every pinnet subcommand for one configuration, stopping at the first failure.

    python3 scripts/run_pipeline.py CONFIG [OUT] [--skip search] [--set key=value ...]
"""

import argparse
import sys

from pinnet.cli import SUBCOMMANDS, main


def parse_args(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("out", nargs="?")
    ap.add_argument("--skip", action="append", default=[], choices=SUBCOMMANDS)
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return ap.parse_args(argv)


def run(args) -> int:
    for sub in SUBCOMMANDS:
        if sub in args.skip:
            continue
        argv = [sub, "--config", args.config, "-v"]
        if args.out:
            argv += ["--out", args.out]
        for s in args.set:
            argv += ["--set", s]
        code = main(argv)
        print(f"{sub:<14} exit {code}")
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run(parse_args()))
