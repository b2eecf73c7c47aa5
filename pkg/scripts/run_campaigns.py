"""Run every CLI campaign with one configuration and summarize the exit codes."""

import argparse
import sys

from nonharm.cli import COMMANDS, run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--out", default="reports")
    parser.add_argument("--format", default="csv", choices=("csv", "json"))
    args = parser.parse_args()

    codes = {}
    for name in COMMANDS:
        argv = [name] + (["selftest"] if name == "oracle" else [])
        argv += ["--out", args.out, "--format", args.format]
        if args.config:
            argv += ["--config", args.config]
        codes[name] = run(argv)
    print()
    for name, code in codes.items():
        print(f"{name:18s} {'ok' if code == 0 else f'exit {code}'}")
    sys.exit(max(codes.values()))


if __name__ == "__main__":
    main()
