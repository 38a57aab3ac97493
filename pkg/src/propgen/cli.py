"""Command-line front end: ``propgen synth | fit | generate | expand | evaluate``.

Every command writes ``<out>.manifest.json`` next to its outputs. Exit codes:
0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .augmentation import (
    AugmentationConfig,
    augment,
    pgm_augmented,
    scheme_for,
    strip_label,
)
from .dataio import (
    bundle_paths,
    default_role_affinity,
    generate_heavy_tailed,
    generate_role_based,
    load_affinity,
    load_bundle,
    role_schema,
    save_bundle,
)
from .errors import PropgenError
from .estimation import (
    estimate_edge_distribution,
    estimate_label_distribution,
    fit,
    load_model,
    save_model,
    total_variation,
)
from .generation import GenerationConfig, generate_from_model, scaled_sizes
from .metrics import degree_pmf, jsd, pmf_from_degrees, write_ccdf_csv

log = logging.getLogger("propgen")

SEED_ENV = "PROPGEN_SEED"


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _manifest_path(out) -> str:
    out = str(out)
    if out.endswith(".json"):
        out = out[:-5]
    return out + ".manifest.json"


def _write_manifest(out, args, payload: dict) -> str:
    manifest = {
        "command": args.command,
        "argv": list(args.argv),
        "config": {k: v for k, v in vars(args).items() if k not in ("func", "argv")},
        "version": __version__,
        "backend": kernels.backend(),
    }
    manifest.update(payload)
    path = _manifest_path(out)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, Path):
        return str(x)
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")


def _ensure_parent(path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_synth(args) -> dict:
    t0 = time.perf_counter()
    if args.kind == "role":
        schema = role_schema()
        affinity = load_affinity(args.affinity, schema) if args.affinity else default_role_affinity(schema)
        g = generate_role_based(args.vertices, args.edges, schema, affinity, args.seed)
    else:
        if args.affinity:
            raise UsageError("--affinity only applies to --kind role")
        g = generate_heavy_tailed(args.vertices, args.edges, n_labels=args.labels, seed=args.seed)
    paths = save_bundle(g, args.out)
    return {
        "outputs": list(paths),
        "seed": args.seed,
        "vertices": g.vertex_count,
        "edges": g.edge_count,
        "timings": {"total_s": time.perf_counter() - t0},
    }


def cmd_fit(args) -> dict:
    t0 = time.perf_counter()
    g = load_bundle(args.source)
    augmentation = None
    if args.augment:
        scheme = scheme_for(g, args.augment, args.scale)
        g = augment(g, args.augment, scheme=scheme)
        augmentation = {"n_a": args.augment, "scheme": scheme.to_dict(), "label_index": len(g.schema) - 1}
    model = fit(g, augmentation)
    _ensure_parent(args.out)
    save_model(model, args.out)
    return {
        "outputs": [str(args.out)],
        "categories": model.schema.n_categories,
        "edge_categories": int(model.edge_dist.pairs.shape[0]),
        "augmentation": augmentation,
        "timings": {"total_s": time.perf_counter() - t0},
    }


def _target_sizes(args, n_src: int, m_src: int) -> tuple[int, int]:
    if args.vertices_scale is not None or args.edges_scale is not None:
        if args.vertices is not None or args.edges is not None:
            raise UsageError("give either absolute sizes or scales, not both")
        return scaled_sizes(n_src, m_src, args.vertices_scale or 1.0, args.edges_scale or 1.0)
    return (args.vertices if args.vertices is not None else n_src,
            args.edges if args.edges is not None else m_src)


def _write_trace(path, trace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n_a", "jsd"])
        for n_a, err in trace:
            w.writerow([n_a, repr(float(err))])


def cmd_generate(args) -> dict:
    t0 = time.perf_counter()
    if (args.model is None) == (args.source is None):
        raise UsageError("give exactly one of --model or --source")
    payload: dict = {"seed": args.seed}
    source = None
    if args.model is not None:
        if args.augment is not None:
            raise UsageError("--augment needs --source; fit the model with --augment instead")
        model = load_model(args.model)
        n_t, m_t = _target_sizes(args, model.source_vertices, model.source_edges)
        cfg = GenerationConfig(n_t, m_t, args.seed, args.max_attempt_factor, args.threads)
        report = generate_from_model(model, cfg)
        aug = model.augmentation
        if aug and not args.keep_augmented:
            report.graph = strip_label(report.graph, aug.get("label_index", -1))
        payload["n_a"] = aug["n_a"] if aug else 0
        src_pmf = None if model.degree_counts is None else model.degree_counts / model.degree_counts.sum()
        n_src, m_src = model.source_vertices, model.source_edges
    else:
        source = load_bundle(args.source)
        n_t, m_t = _target_sizes(args, source.vertex_count, source.edge_count)
        cfg_kw = dict(n_t=n_t, m_t=m_t, seed=args.seed,
                      max_attempt_factor=args.max_attempt_factor, threads=args.threads)
        if args.augment == "auto":
            acfg = AugmentationConfig(tolerance=args.tolerance, max_na=args.max_na, scale=args.scale, **cfg_kw)
            result = pgm_augmented(source, acfg, keep_augmented=args.keep_augmented)
            report = result.report
            payload["n_a"] = result.n_a
            payload["trace"] = [[n, e] for n, e in result.trace]
            payload["scheme"] = result.scheme.to_dict()
            trace_path = str(args.out) + ".trace.csv"
            _ensure_parent(trace_path)
            _write_trace(trace_path, result.trace)
            payload["trace_csv"] = trace_path
        else:
            n_a = int(args.augment or 0)
            cfg = GenerationConfig(**cfg_kw)
            from .augmentation import generate_with_augmentation

            report = generate_with_augmentation(source, n_a, cfg, args.scale, args.keep_augmented)
            payload["n_a"] = n_a
        src_pmf = degree_pmf(source).probs
        n_src, m_src = source.vertex_count, source.edge_count

    g = report.graph
    paths = save_bundle(g, args.out)
    payload.update({
        "outputs": list(paths),
        "vertices": g.vertex_count,
        "edges": g.edge_count,
        "report": report.summary(),
    })
    if src_pmf is not None:
        payload["jsd"] = jsd(src_pmf, degree_pmf(g))
        md_src = 2.0 * m_src / n_src
        md_tgt = 2.0 * g.edge_count / g.vertex_count
        degrees = np.bincount(g.edges.ravel(), minlength=g.vertex_count)
        payload["normalized_jsd"] = jsd(src_pmf, pmf_from_degrees(np.rint(degrees * md_src / md_tgt).astype(np.int64)))
    payload["timings"] = {"total_s": time.perf_counter() - t0}
    return payload


def cmd_evaluate(args) -> dict:
    t0 = time.perf_counter()
    src = load_bundle(args.source)
    tgt = load_bundle(args.target)
    p_src, p_tgt = degree_pmf(src), degree_pmf(tgt)
    out = str(args.out)
    _ensure_parent(out)
    src_csv, tgt_csv = out + ".source.ccdf.csv", out + ".target.ccdf.csv"
    write_ccdf_csv(p_src, src_csv)
    write_ccdf_csv(p_tgt, tgt_csv)
    from .metrics import normalized_degree_jsd

    result = {
        "jsd": jsd(p_src, p_tgt),
        "normalized_jsd": normalized_degree_jsd(src, tgt),
        "tv_label": None,
        "tv_edge": None,
    }
    if src.schema == tgt.schema:
        result["tv_label"] = total_variation(estimate_label_distribution(src), estimate_label_distribution(tgt))
        if src.edge_count and tgt.edge_count:
            result["tv_edge"] = total_variation(estimate_edge_distribution(src), estimate_edge_distribution(tgt))
    report_path = out + ".json"
    with open(report_path, "w") as fh:
        json.dump(result, fh, indent=1, sort_keys=True)
        fh.write("\n")
    result.update({
        "outputs": [src_csv, tgt_csv, report_path],
        "timings": {"total_s": time.perf_counter() - t0},
    })
    return result


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _positive_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{s!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"{s!r} must be positive")
    return v


def _augment_arg(s: str):
    if s == "auto":
        return s
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError("--augment takes an integer or 'auto'") from None
    if v < 0:
        raise argparse.ArgumentTypeError("--augment must be non-negative")
    return v


def _add_generation_flags(p: argparse.ArgumentParser, scale_defaults=(None, None)) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--model", help="model JSON written by 'fit'")
    src.add_argument("--source", help="source bundle prefix")
    p.add_argument("--vertices", type=_positive_int, help="target vertex count")
    p.add_argument("--edges", type=_positive_int, help="target edge count")
    p.add_argument("--vertices-scale", type=float, default=scale_defaults[0])
    p.add_argument("--edges-scale", type=float, default=scale_defaults[1])
    p.add_argument("--augment", type=_augment_arg, help="degree-bucket count, or 'auto' to search")
    p.add_argument("--tolerance", type=float, default=0.05, help="JSD target for --augment auto")
    p.add_argument("--max-na", type=int, default=16)
    p.add_argument("--scale", choices=("log", "linear"), default="log", help="bucket spacing")
    p.add_argument("--keep-augmented", action="store_true", help="keep the degree-bucket label in the output")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--max-attempt-factor", type=_positive_int, default=100)
    p.add_argument("--out", required=True, help="output bundle prefix")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="propgen", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--seed", type=int, default=None, help=f"RNG seed (default ${SEED_ENV} or 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic source bundle")
    p.add_argument("--vertices", type=_positive_int, required=True)
    p.add_argument("--edges", type=_positive_int, required=True)
    p.add_argument("--kind", choices=("role", "heavy-tailed"), default="role")
    p.add_argument("--labels", type=_positive_int, default=4, help="binary label count for heavy-tailed")
    p.add_argument("--affinity", help="affinity JSON for the role-based fixture")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="estimate label and edge-category distributions")
    p.add_argument("--source", required=True)
    p.add_argument("--augment", type=int, default=0, help="append a degree-bucket label with this many buckets")
    p.add_argument("--scale", choices=("log", "linear"), default="log")
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("generate", help="generate a target graph")
    _add_generation_flags(p)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("expand", help="generate a scaled-up target graph")
    _add_generation_flags(p, scale_defaults=(10.0, 12.5))
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="compare degree distributions of two bundles")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", required=True, help="report prefix")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.seed is None:
            args.seed = _default_seed()
        if args.command == "expand" and (args.vertices is not None or args.edges is not None):
            args.vertices_scale = args.edges_scale = None
        payload = args.func(args)
        _write_manifest(args.out, args, payload)
    except UsageError as exc:
        parser.error(str(exc))
    except (PropgenError, ValueError, OSError) as exc:
        print(f"propgen {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
