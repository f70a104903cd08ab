"""Command-line interface: ``export`` and ``stub`` subcommands."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ExportError
from .export import export_encoders
from .stub import make_stub_fixtures

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="ddr-export",
        description="Convert CLIP ViT-B/32 weights into the serialized encoder "
        "asset directory, or emit tiny stub fixtures for tests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="export encoder graphs + tokenizer assets")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument(
        "--weights",
        metavar="PATH",
        help="local transformers checkpoint dir; omitted -> seeded random "
        "weights with the same architecture (offline testing)",
    )
    p.add_argument(
        "--bpe",
        metavar="PATH",
        help="published merges file to ship; omitted -> synthetic stand-in",
    )
    p.add_argument("--seed", type=int, default=0, metavar="N")

    p = sub.add_parser("stub", help="emit tiny random-weight stub assets")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "export":
            manifest = export_encoders(
                args.out,
                weights_path=args.weights,
                bpe_path=args.bpe,
                seed=args.seed,
            )
            summary = {
                "command": "export",
                "out": args.out,
                "model_id": manifest.model_id,
                "bpe_source": manifest.bpe_source,
                "parity": manifest.parity,
            }
            if manifest.bpe_source == "synthetic":
                sys.stderr.write(
                    "note: no --bpe file given; shipped a synthetic merges file "
                    "(structure-identical, ids differ from the published release)\n"
                )
        else:
            hashes = make_stub_fixtures(args.out, seed=args.seed)
            summary = {
                "command": "stub",
                "out": args.out,
                "seed": args.seed,
                "files": sorted(hashes),
            }
        sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    except ExportError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAILED


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
