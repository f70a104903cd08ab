"""Command-line surface.

Subcommands: score (quality score for one image), eval (dataset rank
correlation), degrade (pixel-domain synthesis to files), correlate
(descriptor correlation table), objective (restoration objective value).

Exit codes are a stable contract: 0 success, 1 usage/config error, 2 asset
error, 3 data error. Reports are canonical JSON (sorted keys, two-space
indent, trailing newline) or CSV; with ``--out`` the report path also gets
matplotlib figures rendered next to it unless ``--no-figures`` is passed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import Config, resolve_config
from .degrade import DegradationKind, apply as apply_degradation, ladder, parse_spec
from .encoders.session import AssetBundle, build_degradation_set, load_assets
from .evaluation import (
    correlate_descriptors,
    evaluate_biqa,
    load_manifest,
    objective_breakdown,
    score_image_file,
)
from .exceptions import (
    AssetError,
    ConfigurationError,
    DataError,
    DdrError,
    SessionError,
    TokenizationError,
)
from .images import load_image, save_image
from .metrics import sharpness_proxy

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ASSET = 2
EXIT_DATA = 3

FAILURE_RATE_LIMIT = 0.10


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract reserves 2 for assets."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def canonical_json(doc: dict) -> str:
    """Stable serialization used for reports and golden comparisons."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _finite_or_none(value: float) -> float | None:
    return value if math.isfinite(value) else None


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--assets", metavar="DIR", help="model assets directory")
    parser.add_argument("--config", metavar="FILE", help="YAML config document")
    parser.add_argument(
        "--set",
        dest="set_name",
        choices=["biqa", "restoration", "custom"],
        help="degradation set to use (default: config file, else biqa)",
    )
    parser.add_argument("--lambda-d", type=float, dest="lambda_d", help="objective weight")
    parser.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
    parser.add_argument("--format", choices=["json", "csv"], dest="output_format")
    parser.add_argument("--parallelism", type=int, metavar="N")
    parser.add_argument("--seed", type=int, metavar="N")
    parser.add_argument(
        "--figures",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="render figures next to --out (default: on when --out is given)",
    )


def build_parser() -> _Parser:
    parser = _Parser(
        prog="ddr",
        description="Deep degradation response: zero-shot image descriptors and "
        "a no-reference quality score.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="quality score for one image")
    p.add_argument("image", help="image file (PNG/JPEG)")
    _add_common_options(p)

    p = sub.add_parser("eval", help="rank-correlation evaluation over a manifest")
    p.add_argument("manifest", help="CSV manifest with header path,mos")
    _add_common_options(p)

    p = sub.add_parser("degrade", help="synthesize pixel-domain degradation")
    p.add_argument("image", help="input image")
    p.add_argument("--spec", help="one degradation as kind:level[:seed]")
    p.add_argument("--ladder", dest="ladder_kind", help="degradation kind for a ladder")
    p.add_argument("--levels", help="comma-separated ascending levels for --ladder")
    p.add_argument("--out-dir", required=True, help="directory for degraded images")
    _add_common_options(p)

    p = sub.add_parser("correlate", help="descriptor correlation table over a manifest")
    p.add_argument("manifest", help="CSV manifest with header path,mos")
    _add_common_options(p)

    p = sub.add_parser("objective", help="restoration objective value for a pair")
    p.add_argument("restored", help="restored/output image")
    p.add_argument("gt", help="ground-truth image")
    _add_common_options(p)

    return parser


def _resolve(args) -> Config:
    return resolve_config(
        config_path=args.config,
        set_name=args.set_name,
        assets_dir=args.assets,
        lambda_d=args.lambda_d,
        output_format=args.output_format,
        parallelism=args.parallelism,
        seed=args.seed,
    )


def _load_bundle(config: Config) -> AssetBundle:
    if config.assets_dir is None:
        raise AssetError(
            "no assets directory: pass --assets, set model_assets_dir in the "
            "config, or export DDR_ASSETS_DIR"
        )
    return load_assets(config.assets_dir)


def _build_set(bundle: AssetBundle, config: Config):
    return build_degradation_set(
        config.prompt_pairs, bundle.text_session, bundle.tokenizer
    )


def _figures_enabled(args) -> bool:
    if args.figures is None:
        return args.out is not None
    if args.figures and args.out is None:
        raise ConfigurationError("--figures requires --out to anchor file names")
    return args.figures


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_score(args) -> int:
    config = _resolve(args)
    bundle = _load_bundle(config)
    degradation_set = _build_set(bundle, config)
    per_type = score_image_file(args.image, degradation_set, bundle.image_session)
    report = {
        "command": "score",
        "image": args.image,
        "model_id": bundle.manifest.model_id,
        "degradation_set": list(per_type),
        "ddr": per_type,
        "q_ddr": float(np.mean(list(per_type.values()))),
    }
    if config.output_format == "csv":
        rows = [[name, value] for name, value in per_type.items()]
        rows.append(["q_ddr", report["q_ddr"]])
        _emit(_csv_text(["degradation", "value"], rows), args.out)
    else:
        _emit(canonical_json(report), args.out)
    if _figures_enabled(args):
        from .plotting import render_score_figure

        render_score_figure(report, Path(args.out).with_suffix(".png"))
    return EXIT_OK


def _cmd_eval(args) -> int:
    config = _resolve(args)
    bundle = _load_bundle(config)
    degradation_set = _build_set(bundle, config)
    manifest = load_manifest(args.manifest)
    result = evaluate_biqa(
        manifest, degradation_set, bundle.image_session, parallelism=config.parallelism
    )
    report = {
        "command": "eval",
        "model_id": bundle.manifest.model_id,
        **result.to_dict(),
    }
    if config.output_format == "csv":
        rows = [[s.path, s.q_ddr, s.mos] for s in result.per_image]
        _emit(_csv_text(["path", "q_ddr", "mos"], rows), args.out)
    else:
        _emit(canonical_json(report), args.out)
    if _figures_enabled(args):
        from .plotting import render_eval_figures

        render_eval_figures(report, Path(args.out))
    failure_rate = len(result.failures) / len(manifest.records)
    if failure_rate > FAILURE_RATE_LIMIT:
        sys.stderr.write(
            f"error: {len(result.failures)}/{len(manifest.records)} records failed\n"
        )
        return EXIT_DATA
    return EXIT_OK


def _cmd_degrade(args) -> int:
    config = _resolve(args)
    if bool(args.spec) == bool(args.ladder_kind):
        raise ConfigurationError("pass exactly one of --spec or --ladder")
    img = load_image(args.image)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.image).stem
    written: list[str] = []
    levels: list[float] = []
    if args.spec:
        spec = parse_spec(args.spec)
        result = apply_degradation(img, spec)
        name = f"{stem}_{spec.as_string().replace(':', '-')}.png"
        save_image(result, out_dir / name)
        written.append(name)
        rungs = [result]
        levels = [spec.level]
        kind = spec.kind
    else:
        if not args.levels:
            raise ConfigurationError("--ladder requires --levels L1,L2,...")
        kind = DegradationKind.parse(args.ladder_kind)
        try:
            levels = [float(v) for v in args.levels.split(",")]
        except ValueError:
            raise ConfigurationError(f"bad --levels value: {args.levels!r}") from None
        seed = config.seed
        rungs = ladder(img, kind, levels, seed=seed)
        for level, rung in zip(levels, rungs):
            name = f"{stem}_{kind.value}_{level:g}.png"
            save_image(rung, out_dir / name)
            written.append(name)
    report = {
        "command": "degrade",
        "image": args.image,
        "kind": kind.value,
        "levels": levels,
        "out_dir": str(out_dir),
        "outputs": written,
        "seed": config.seed,
    }
    _emit(canonical_json(report), args.out)
    if _figures_enabled(args):
        from .plotting import render_ladder_figure

        sharpness = [sharpness_proxy(r) for r in rungs]
        render_ladder_figure(
            levels, sharpness, "sharpness proxy", Path(args.out).with_suffix(".png")
        )
    return EXIT_OK


def _cmd_correlate(args) -> int:
    config = _resolve(args)
    bundle = _load_bundle(config)
    degradation_set = _build_set(bundle, config)
    manifest = load_manifest(args.manifest)
    table = correlate_descriptors(
        manifest, degradation_set, bundle.image_session, parallelism=config.parallelism
    )
    report = {
        "command": "correlate",
        "model_id": bundle.manifest.model_id,
        **table.to_dict(),
    }
    if config.output_format == "csv":
        rows = [
            [row["degradation"], row["colorfulness"], row["sharpness"], row["quality"]]
            for row in report["rows"]
        ]
        _emit(
            _csv_text(["degradation", "colorfulness", "sharpness", "quality"], rows),
            args.out,
        )
    else:
        _emit(canonical_json(report), args.out)
    if _figures_enabled(args):
        from .plotting import render_correlation_figure

        render_correlation_figure(report, Path(args.out).with_suffix(".png"))
    return EXIT_OK


def _cmd_objective(args) -> int:
    config = _resolve(args)
    bundle = _load_bundle(config)
    degradation_set = _build_set(bundle, config)
    restored = load_image(args.restored)
    gt = load_image(args.gt)
    breakdown = objective_breakdown(
        restored, gt, degradation_set, bundle.image_session, lambda_d=config.lambda_d
    )
    report = {
        "command": "objective",
        "restored": args.restored,
        "gt": args.gt,
        "model_id": bundle.manifest.model_id,
        "lambda_d": breakdown.lambda_d,
        "identical_inputs": breakdown.identical_inputs,
        "psnr_db": _finite_or_none(-breakdown.reconstruction),
        "reconstruction": _finite_or_none(breakdown.reconstruction),
        "ddr": breakdown.ddr_terms,
        "ddr_total": breakdown.ddr_total,
        "objective": _finite_or_none(breakdown.objective),
    }
    _emit(canonical_json(report), args.out)
    if _figures_enabled(args):
        from .plotting import render_objective_figure

        render_objective_figure(report, Path(args.out).with_suffix(".png"))
    return EXIT_OK


_HANDLERS = {
    "score": _cmd_score,
    "eval": _cmd_eval,
    "degrade": _cmd_degrade,
    "correlate": _cmd_correlate,
    "objective": _cmd_objective,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ConfigurationError, TokenizationError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (AssetError, SessionError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ASSET
    except DdrError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
