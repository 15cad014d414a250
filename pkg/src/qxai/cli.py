"""Command line front end: ``qxai train | explain | reproduce | stability``.

Exit codes: 0 success, 1 runtime or IO failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import NoiseSpec
from .classifier import CIRCUIT_KINDS, TrainedModel, dataset, load_reference_model, train
from .explainers import baseline_shap_exact, integrated_gradients, permutation_shap, qshap
from .polytensor import ExpansionConfig
from .report import atomic_write, grid_svg, heatmap_svg, rows_to_csv
from .stability import MIN_REPLICATIONS, ig_error_scan, reports_to_csv, shap_error_scan

METHODS = ("ig", "bs", "perm", "qshap")
GRID_METHODS = ("ig", "bs", "qshap")
NOISE_TIERS = (
    ("noiseless", NoiseSpec()),
    ("shots=1000", NoiseSpec(shots=1000)),
    ("shots=1000+depol2%+readout2%", NoiseSpec(shots=1000, depolarizing_p=0.02, readout_flip_p=0.02)),
)


class UsageError(Exception):
    pass


def _default_seed() -> int:
    return int(os.environ.get("QXAI_SEED", "0"))


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _pixels(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected four comma-separated pixel values, got {text!r}")
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("expected exactly four pixel values")
    return vals


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _noise_from_args(args) -> NoiseSpec:
    return NoiseSpec(shots=args.shots, depolarizing_p=args.depolarizing, readout_flip_p=args.readout,
                     additive_sigma=args.sigma, seed=args.seed)


def explain_one(model: TrainedModel, method: str, pixels, baseline, noise: NoiseSpec, *, mesh=20,
                samples=250, scheme="taylor", order=9, permutations=None, prune=None, seed=0):
    """Attribute one image with one method; shared by ``explain`` and ``reproduce``."""
    f = model.evaluator(noise)
    x, b = model.angles(pixels), model.angles(baseline)
    if method == "ig":
        return integrated_gradients(f, x, b, mesh)
    if method == "bs":
        return baseline_shap_exact(f, x, b)
    if method == "perm":
        return permutation_shap(f, x, b, permutations, seed=seed)
    if method == "qshap":
        if prune is None:
            prune = 3 / math.sqrt(noise.shots) if noise.shots else 0.0
        return qshap(f, model.frequency_bounds, x, b, samples, ExpansionConfig(scheme, order), seed=seed,
                     prune_threshold=prune)
    raise UsageError(f"unknown method {method!r}")


def _load_model(path) -> TrainedModel:
    try:
        return TrainedModel.load(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise RuntimeError(f"cannot read model {path}: {exc}") from exc


def cmd_train(args) -> int:
    model = train(args.circuit, lr=args.lr, epochs=args.epochs, seed=args.seed)
    doc = model.to_dict()
    doc["config"] = _echo(args)
    doc["version"] = __version__
    atomic_write(args.out, _dump(doc))
    correct = round(model.info["accuracy"] * len(dataset()))
    print(f"accuracy: {correct}/{len(dataset())} (loss {model.info['loss']:.3e})")
    return 0


def cmd_explain(args) -> int:
    model = _load_model(args.model)
    if args.pixels is not None:
        pixels = args.pixels
    else:
        if not 0 <= args.image < len(dataset()):
            raise UsageError(f"--image must be in 0..{len(dataset()) - 1}")
        pixels = dataset()[args.image].pixels
    res = explain_one(model, args.method, pixels, args.baseline, _noise_from_args(args), mesh=args.mesh,
                      samples=args.samples, scheme=args.scheme, order=args.order,
                      permutations=args.permutations, prune=args.prune, seed=args.seed)
    doc = res.to_dict()
    doc["pixels"] = list(pixels)
    doc["config"] = _echo(args)
    doc["version"] = __version__
    text = _dump(doc)
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.svg:
        noise = _noise_from_args(args)
        caption = f"{args.method} | shots={noise.shots} depol={noise.depolarizing_p} readout={noise.readout_flip_p} sigma={noise.additive_sigma}"
        atomic_write(args.svg, heatmap_svg(res.values, caption))
    return 0


def cmd_reproduce(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = _load_model(args.model) if args.model else load_reference_model(args.circuit)
    images = dataset()
    baseline = [0, 0, 0, 0]
    jobs = [(tier, noise, method) for tier, noise in NOISE_TIERS for method in GRID_METHODS]

    def run_cell(job):
        tier, noise, method = job
        noise = NoiseSpec(noise.shots, noise.depolarizing_p, noise.readout_flip_p, noise.additive_sigma, args.seed)
        try:
            vals = [explain_one(model, method, img.pixels, baseline, noise, mesh=args.mesh,
                                samples=args.samples, seed=args.seed).values for img in images]
            return job, vals, None
        except Exception as exc:  # recorded per cell
            return job, None, f"{type(exc).__name__}: {exc}"

    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        results = list(pool.map(run_cell, jobs))

    cells, rows, failures = {}, [], []
    for (tier, _, method), vals, err in results:
        cells[(tier, method)] = vals
        if err:
            failures.append({"tier": tier, "method": method, "error": err})
            continue
        for k, vec in enumerate(vals):
            for p, v in enumerate(vec):
                rows.append([args.circuit, tier, method, k, p, repr(float(v))])
    echo = json.dumps(_echo(args), sort_keys=True)
    stem = args.circuit.replace("-", "_")
    atomic_write(out_dir / f"{stem}_attributions.csv",
                 rows_to_csv(["circuit", "tier", "method", "image", "pixel", "value"], rows,
                             preamble=[f"qxai {__version__}", f"config {echo}"]))
    caption = (f"{args.circuit} classifier | baseline = black image | third tier stands in for hardware: "
               f"shots + 2% depolarizing + 2% readout (qxai {__version__})")
    atomic_write(out_dir / f"{stem}_grid.svg",
                 grid_svg(cells, [t for t, _ in NOISE_TIERS], list(GRID_METHODS), len(images), caption))
    if failures:
        atomic_write(out_dir / f"{stem}_failures.json", _dump({"failures": failures, "config": _echo(args)}))
        for f in failures:
            print(f"cell {f['tier']}/{f['method']} failed: {f['error']}", file=sys.stderr)
    ok = len(jobs) - len(failures)
    print(f"{ok}/{len(jobs)} cells written to {out_dir}")
    return 0 if ok else 1


def smooth_test_function(z) -> float:
    """Default model for stability scans: smooth, every feature matters."""
    z = np.asarray(z, float)
    return float(np.sum(np.sin(z)) + 0.5 * np.sum(z) ** 2 / z.size)


def cmd_stability(args) -> int:
    if args.reps < MIN_REPLICATIONS:
        raise UsageError(f"--reps must be at least {MIN_REPLICATIONS}")
    if args.sigma < 0:
        raise UsageError("--sigma must be >= 0")
    if args.method == "ig":
        n = args.features
        reports = ig_error_scan(smooth_test_function, np.ones(n), np.zeros(n), args.sigma, args.mesh,
                                R=args.reps, seed=args.seed)
    else:
        reports = shap_error_scan(smooth_test_function, 1.0, 0.0, args.sigma, args.n_features,
                                  R=args.reps, mode=args.mode, seed=args.seed)
    echo = json.dumps(_echo(args), sort_keys=True)
    text = reports_to_csv(reports, preamble=[f"qxai {__version__}", f"config {echo}"])
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qxai", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qxai {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a reference classifier")
    t.add_argument("--circuit", choices=CIRCUIT_KINDS, default="single-qubit")
    t.add_argument("--seed", type=int, default=_default_seed())
    t.add_argument("--epochs", type=int, default=200)
    t.add_argument("--lr", type=float, default=0.2)
    t.add_argument("--out", default="model.json")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("explain", help="attribute one image")
    e.add_argument("--model", required=True)
    e.add_argument("--method", choices=METHODS, default="bs")
    g = e.add_mutually_exclusive_group()
    g.add_argument("--image", type=int, default=0)
    g.add_argument("--pixels", type=_pixels)
    e.add_argument("--baseline", type=_pixels, default=[0.0, 0.0, 0.0, 0.0])
    e.add_argument("--shots", type=int)
    e.add_argument("--depolarizing", type=float, default=0.0)
    e.add_argument("--readout", type=float, default=0.0)
    e.add_argument("--sigma", type=float, default=0.0)
    e.add_argument("--seed", type=int, default=_default_seed())
    e.add_argument("--mesh", type=int, default=20)
    e.add_argument("--samples", type=int, default=250)
    e.add_argument("--scheme", choices=("taylor", "chebyshev"), default="taylor")
    e.add_argument("--order", type=int, default=9)
    e.add_argument("--permutations", type=int)
    e.add_argument("--prune", type=float, help="Fourier pruning threshold (default 3/sqrt(shots))")
    e.add_argument("--out")
    e.add_argument("--svg")
    e.set_defaults(func=cmd_explain)

    r = sub.add_parser("reproduce", help="method x noise grid over all images")
    r.add_argument("--circuit", choices=CIRCUIT_KINDS, default="single-qubit")
    r.add_argument("--model", help="model JSON (default: shipped reference model)")
    r.add_argument("--out-dir", default="reproduce_out")
    r.add_argument("--seed", type=int, default=_default_seed())
    r.add_argument("--samples", type=int, default=300)
    r.add_argument("--mesh", type=int, default=20)
    r.add_argument("--workers", type=int, default=4)
    r.set_defaults(func=cmd_reproduce)

    s = sub.add_parser("stability", help="noise scaling scans")
    s.add_argument("--method", choices=("ig", "bs"), default="ig")
    s.add_argument("--sigma", type=float, default=0.1)
    s.add_argument("--mesh", type=_int_list, default=[10, 20, 40, 80])
    s.add_argument("--features", type=int, default=4, help="input dimension for IG scans")
    s.add_argument("--n-features", type=_int_list, default=[4, 8])
    s.add_argument("--mode", choices=("memoized", "resampled"), default="memoized")
    s.add_argument("--reps", type=int, default=200)
    s.add_argument("--seed", type=int, default=_default_seed())
    s.add_argument("--out")
    s.set_defaults(func=cmd_stability)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qxai: error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, OSError, ValueError) as exc:
        print(f"qxai: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
