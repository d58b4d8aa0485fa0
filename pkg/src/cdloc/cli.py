"""Command line interface: ``cdloc {catalog,jet,invariants,compare,sweep,specht}``.

Every subcommand takes an optional YAML/JSON config document; flags override
the corresponding config keys.  Exit codes for ``compare``, ``sweep`` and
``specht``: 0 equivalent, 1 inequivalent, 2 inconclusive, 3 error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .compare import (
    CompareOptions,
    ComparisonRequest,
    compare_localizations,
    compare_via_metric,
    grid_points,
    sweep,
)
from .kernels import catalog, jet_at, jet_at_numeric
from .localization import extract_invariants, normalize, oracle_invariants_direct
from .serialization import (
    ConfigError,
    decode_complex,
    decode_point,
    invariants_to_dict,
    jet_to_dict,
    load_document,
    model_from_config,
    point_to_dict,
    report_to_dict,
    tuple_from_config,
    verdict_to_dict,
)
from .specht import DEFAULT_MAX_WORDS, Status, specht_test

log = logging.getLogger("cdloc")

EXIT = {Status.EQUIVALENT: 0, Status.INEQUIVALENT: 1, Status.INCONCLUSIVE: 2}
EXIT_ERROR = 3


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    doc = load_document(Path(path).read_text(encoding="utf-8"))
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    return doc


def _model_arg(text: str):
    """Catalog name, or an inline JSON/YAML model mapping."""
    text = text.strip()
    if text.startswith("{"):
        return load_document(text)
    return text


def _point_arg(text: str) -> list:
    return [decode_complex(tok) for tok in text.split(",")]


def _grid_arg(text: str) -> list:
    axes = []
    for part in text.split(";"):
        lo, hi, count = part.split(",")
        axes.append([float(lo), float(hi), int(count)])
    return axes


def _options(cfg: dict, args) -> CompareOptions:
    tols = cfg.get("tolerances", {}) or {}
    return CompareOptions(
        tol=float(args.tol if args.tol is not None else tols.get("comparison", 1e-8)),
        cert_tol=float(args.cert_tol if args.cert_tol is not None else tols.get("certificate", 1e-6)),
        word_bound=args.word_bound if args.word_bound is not None else cfg.get("word_bound"),
        max_words=int(args.max_words if args.max_words is not None else cfg.get("max_words", DEFAULT_MAX_WORDS)),
        seed=int(args.seed if args.seed is not None else cfg.get("seed", 0)),
        keep_invariants=bool(getattr(args, "dump_invariants", False) or cfg.get("dump_invariants", False)),
    )


def _pick(args, cfg: dict, attr: str, key: str, default=None):
    val = getattr(args, attr, None)
    return val if val is not None else cfg.get(key, default)


def _single_point(args, cfg: dict) -> np.ndarray:
    if args.point is not None:
        return np.array(args.point, dtype=complex)
    if "point" not in cfg:
        raise ConfigError("no basepoint given (use --point or 'point:')")
    return decode_point(cfg["point"])


def _emit(doc: Any, output: Optional[str]):
    text = json.dumps(doc, indent=2)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_catalog(args, cfg) -> int:
    for name, model in catalog().items():
        print(f"{name:<20} m={model.m} n={model.n}  {model!r}")
    return 0


def cmd_jet(args, cfg) -> int:
    model = model_from_config(_pick(args, cfg, "model", "model"))
    z = _single_point(args, cfg)
    d = int(_pick(args, cfg, "order", "order", 1))
    if args.numeric or cfg.get("numeric", False):
        jet = jet_at_numeric(model, z, d, r=args.radius, N=args.nodes)
    else:
        jet = jet_at(model, z, d)
    if args.normalized:
        jet, _ = normalize(jet)
    _emit(jet_to_dict(jet), args.output)
    return 0


def cmd_invariants(args, cfg) -> int:
    model = model_from_config(_pick(args, cfg, "model", "model"))
    z = _single_point(args, cfg)
    k = int(_pick(args, cfg, "k", "k", model.n + 1))
    jet, _ = normalize(jet_at(model, z, k - 1))
    inv = oracle_invariants_direct(jet, k) if args.oracle else extract_invariants(jet, k)
    _emit(invariants_to_dict(inv), args.output)
    return 0


def _models(args, cfg):
    a = _pick(args, cfg, "model_a", "model_a")
    b = _pick(args, cfg, "model_b", "model_b")
    if a is None or b is None:
        raise ConfigError("two models are required (model_a / model_b)")
    return model_from_config(a), model_from_config(b)


def cmd_compare(args, cfg) -> int:
    a, b = _models(args, cfg)
    z = _single_point(args, cfg)
    k = _pick(args, cfg, "k", "k")
    path = _pick(args, cfg, "path", "path", "localization")
    fn = compare_localizations if path == "localization" else compare_via_metric
    res = fn(a, b, z, k, _options(cfg, args))
    v = res.verdict
    msg = f"{v.status.value} (k={res.k}, path={path}): {v.reason}"
    if v.witness_text:
        x, y = v.witness_values
        msg += f"; witness '{v.witness_text}': {x:.10g} vs {y:.10g}"
    if v.residual is not None:
        msg += f"; certificate residual {v.residual:.3e}"
    print(msg)
    if args.output:
        _emit(point_to_dict(res, include_timing=args.timing), args.output)
    return EXIT[v.status]


def _points(args, cfg) -> list:
    if args.grid is not None:
        return grid_points(args.grid)
    if args.point is not None:
        return [np.array(args.point, dtype=complex)]
    if "grid" in cfg:
        return grid_points(cfg["grid"])
    if "points" in cfg:
        return [decode_point(p) for p in cfg["points"]]
    if "point" in cfg:
        return [decode_point(cfg["point"])]
    return []


def cmd_sweep(args, cfg) -> int:
    a, b = _models(args, cfg)
    request = ComparisonRequest(
        a, b, _points(args, cfg),
        k=_pick(args, cfg, "k", "k"),
        options=_options(cfg, args),
        path=_pick(args, cfg, "path", "path", "localization"),
        workers=int(_pick(args, cfg, "workers", "workers", 1)),
    )
    report = sweep(request)
    print(report.to_text())
    if args.output:
        _emit(report_to_dict(report, include_timing=args.timing), args.output)
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    counts = report.counts
    if report.all_equivalent:
        return 0
    if counts[Status.INEQUIVALENT.value]:
        return 1
    return 2


def cmd_specht(args, cfg) -> int:
    if "A" not in cfg or "B" not in cfg:
        raise ConfigError("specht input needs tuples 'A' and 'B'")
    tA, tB = tuple_from_config(cfg["A"]), tuple_from_config(cfg["B"])
    opts = _options(cfg, args)
    v = specht_test(
        tA, tB, _pick(args, cfg, "max_len", "max_len"), opts.tol,
        bound=opts.word_bound, cert_tol=opts.cert_tol, seed=opts.seed, max_words=opts.max_words,
    )
    print(f"{v.status.value}: {v.reason}")
    _emit(verdict_to_dict(v), args.output)
    return EXIT[v.status]


def _add_common(p: argparse.ArgumentParser, pair: bool):
    if pair:
        p.add_argument("--model-a", type=_model_arg, help="catalog name or inline model mapping")
        p.add_argument("--model-b", type=_model_arg)
    p.add_argument("--point", type=_point_arg, help="comma-separated complex coordinates, e.g. 0.5+0.2j")
    p.add_argument("--k", type=int, help="localization order (default n+1)")
    p.add_argument("--tol", type=float, help="trace comparison tolerance (default 1e-8)")
    p.add_argument("--cert-tol", type=float, help="certificate residual tolerance (default 1e-6)")
    p.add_argument("--word-bound", type=int, help="word length accepted as sufficient (default 2p^2)")
    p.add_argument("--max-words", type=int, help="word budget when choosing the enumeration length")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", help="write the machine-readable document here")
    p.add_argument("--timing", action="store_true", help="include per-point timings in the output document")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cdloc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list the built-in models")
    p.set_defaults(func=cmd_catalog, config=None)

    p = sub.add_parser("jet", help="dump a model's kernel jet at a point")
    p.add_argument("config", nargs="?")
    p.add_argument("--model", type=_model_arg)
    p.add_argument("--point", type=_point_arg)
    p.add_argument("--order", type=int)
    p.add_argument("--normalized", action="store_true", help="dump the jet in the normalized frame")
    p.add_argument("--numeric", action="store_true", help="use Cauchy quadrature")
    p.add_argument("--radius", type=float)
    p.add_argument("--nodes", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_jet)

    p = sub.add_parser("invariants", help="dump the invariant matrices M^{IJ}")
    p.add_argument("config", nargs="?")
    p.add_argument("--model", type=_model_arg)
    p.add_argument("--point", type=_point_arg)
    p.add_argument("--k", type=int)
    p.add_argument("--oracle", action="store_true", help="use the direct operator-product route")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("compare", help="compare two models at one point")
    p.add_argument("config", nargs="?")
    _add_common(p, pair=True)
    p.add_argument("--path", choices=["localization", "metric"])
    p.add_argument("--dump-invariants", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="compare two models over a list or grid of points")
    p.add_argument("config", nargs="?")
    _add_common(p, pair=True)
    p.add_argument("--grid", type=_grid_arg, help="'lo,hi,count;...' per real axis (Re z1, Im z1, ...)")
    p.add_argument("--path", choices=["localization", "metric"])
    p.add_argument("--workers", type=int)
    p.add_argument("--csv", help="write per-point distances as CSV")
    p.add_argument("--dump-invariants", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("specht", help="compare two raw matrix tuples from a file")
    p.add_argument("config", help="document with tuples 'A' and 'B'")
    p.add_argument("--max-len", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--cert-tol", type=float)
    p.add_argument("--word-bound", type=int)
    p.add_argument("--max-words", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_specht)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load_config(args.config)
        return args.func(args, cfg)
    except (ConfigError, ValueError, RuntimeError, OSError) as exc:
        log.debug("failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
