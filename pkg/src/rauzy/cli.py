"""Command-line front end.

Every subcommand is seeded and writes deterministic CSV/JSON: identical
configs give byte-identical outputs, whatever the worker count.  Progress
goes to stderr as structured lines ``event=<name> step=<k>``.

Exit codes: 0 success, 2 config/validation, 3 not-found, 4 numeric failure
(boundary hit, cap exceeded, denominator overflow, insufficient data).
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .errors import (
    CapExceededError,
    DenominatorOverflowError,
    InsufficientDataError,
    NonGenericError,
    NotFoundError,
    RauzyError,
)
from .induction import DEFAULT_CAP, IetPoint, orbit
from .kernel import run_orbit
from .matrices import matrix_csv, matrix_norm, word_matrix
from .permutations import Permutation, is_irreducible, rauzy_class
from .stats import (
    ObservableSpec,
    comparison_survey,
    correlation_series,
    exp_moment,
    fit_exponential,
    pooled_return_survey,
    sample_simplex,
    tail_fit,
)
from .words import find_positive_word, parse_word
from .zippered import (
    first_return,
    flow,
    random_rectangle,
    validate,
    y_component,
    zip_step,
    area,
)
from .induction import zorich_step

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_FOUND = 3
EXIT_NUMERIC = 4

CONFIG_KEYS = ("pi", "q", "steps", "burn_in", "seed", "backend", "n_max", "epsilon", "alpha")


def fmt(x: float) -> str:
    """Floats at 17 significant digits, integers verbatim."""
    return f"{x:.17g}"


def progress(name: str, step: int) -> None:
    print(f"event={name} step={step}", file=sys.stderr)


class _Out:
    """Writer for --out: a path or '-' for stdout, with fixed newlines."""

    def __init__(self, path: str):
        self.path = path

    def __enter__(self):
        if self.path == "-":
            self.fh = sys.stdout
            self.close = False
        else:
            self.fh = open(self.path, "w", newline="\n")
            self.close = True
        return self.fh

    def __exit__(self, *exc):
        if self.close:
            self.fh.close()


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="rauzy", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, steps_default=None):
        p.add_argument("--pi", help="permutation, space-separated images, e.g. '3 2 1'")
        p.add_argument("--config", help="JSON config file; explicit flags win")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
        p.add_argument("--cap", type=int, default=None,
                       help=f"elementary-step cap per accelerated step (default "
                            f"{DEFAULT_CAP}; experiment subcommands default to 2^62, "
                            "long runs collapse cheaply)")
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--workers", type=int, default=1,
                       help="process pool size; output is worker-count independent")
        if steps_default is not None:
            p.add_argument("--steps", type=int, default=None,
                           help=f"accelerated steps (default {steps_default})")

    p = sub.add_parser("class", help="enumerate a closure graph")
    common(p)

    p = sub.add_parser("positive-word", help="shortest all-positive-matrix word")
    common(p)
    p.add_argument("--max-len", type=int, default=8)
    p.add_argument("--count-bound", type=int, default=3)

    p = sub.add_parser("orbit", help="dump an accelerated orbit")
    common(p, steps_default=100)
    p.add_argument("--lambda", dest="lam", default=None,
                   help="start lengths, comma-separated (overrides sampling)")
    p.add_argument("--backend", choices=("float", "exact"), default=None)

    p = sub.add_parser("correlations", help="correlation series on plus points")
    common(p, steps_default=1_000_000)
    p.add_argument("--lambda", dest="lam", default=None)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--phi-index", type=int, default=1, help="length coordinate for phi = psi")
    p.add_argument("--floor-mult", type=float, default=3.0)
    p.add_argument("--fit", action="store_true", help="print the decay fit as JSON on stdout")

    p = sub.add_parser("return-times", help="gap records between cylinder visits")
    common(p, steps_default=500_000)
    p.add_argument("--q", default=None, help="cylinder word (default: found positivity word)")
    p.add_argument("--orbits", type=int, default=4)
    p.add_argument("--survival-out", default=None, help="also write the survival table CSV")
    p.add_argument("--fit", action="store_true", help="print the tail fit as JSON on stdout")
    p.add_argument("--n-max", type=int, default=None)

    p = sub.add_parser("compare", help="discrete/continuous time comparison maxima")
    common(p, steps_default=500_000)
    p.add_argument("--q", default=None)
    p.add_argument("--orbits", type=int, default=4)
    p.add_argument("--epsilon", type=float, default=None)

    p = sub.add_parser("zr-selftest", help="zippered-rectangle property suite")
    common(p)
    p.add_argument("--samples", type=int, default=100)

    return top


def _load_config(args) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            raw = json.load(fh)
        for key in raw:
            if key not in CONFIG_KEYS:
                raise ValueError(f"unknown config key {key!r}")
        cfg = raw
    return cfg


def _get_pi(args, cfg) -> Permutation:
    text = args.pi or cfg.get("pi")
    if not text:
        raise ValueError("--pi is required (or supply it in --config)")
    pi = Permutation.parse(str(text))
    if not is_irreducible(pi):
        raise ValueError(f"permutation {pi} is reducible")
    if pi.m > 12:
        raise ValueError("m > 12 is not supported by the command line")
    return pi


def _start_point(pi, args, cfg, seed, backend="float"):
    lam_text = getattr(args, "lam", None)
    if lam_text:
        parts = [p.strip() for p in str(lam_text).split(",")]
        if len(parts) != pi.m:
            raise ValueError(f"--lambda needs {pi.m} comma-separated entries")
        if backend == "exact":
            return IetPoint.from_rationals([Fraction(p) for p in parts], pi)
        return IetPoint.from_floats([float(Fraction(p)) for p in parts], pi)
    rng = np.random.default_rng(seed)
    x = sample_simplex(pi, rng)
    if backend == "exact":
        return IetPoint.from_rationals([Fraction(v) for v in x.lam], pi)
    return x


def cmd_class(args, cfg) -> int:
    pi = _get_pi(args, cfg)
    graph = rauzy_class(pi)
    progress("class_done", len(graph))
    with _Out(args.out) as fh:
        if args.format == "csv":
            fh.write(graph.edge_csv())
        else:
            payload = {
                "nodes": [str(p) for p in graph.nodes],
                "edges": [
                    {"src": str(s), "op": op, "dst": str(d)} for s, op, d in graph.edges()
                ],
            }
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def cmd_positive_word(args, cfg) -> int:
    pi = _get_pi(args, cfg)
    graph = rauzy_class(pi)
    q = find_positive_word(graph, args.max_len, args.count_bound)
    A = word_matrix(q)
    progress("word_found", len(q))
    with _Out(args.out) as fh:
        if args.format == "csv":
            fh.write(str(q) + "\n")
            fh.write(matrix_csv(A))
        else:
            json.dump(
                {
                    "word": str(q),
                    "matrix": [[str(v) for v in row] for row in A],
                    "norm": str(matrix_norm(A)),
                },
                fh,
                indent=2,
            )
            fh.write("\n")
    return EXIT_OK


def cmd_orbit(args, cfg) -> int:
    pi = _get_pi(args, cfg)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    backend = args.backend or cfg.get("backend", "float")
    steps = args.steps if args.steps is not None else int(cfg.get("steps", 100))
    cap = args.cap if args.cap is not None else DEFAULT_CAP
    x0 = _start_point(pi, args, cfg, seed, backend)
    progress("orbit_start", 0)
    rows = []
    if backend == "exact":
        result = orbit(x0, steps, cap=cap)
        for k, (pt, rec) in enumerate(result):
            rows.append((k + 1, rec.op, rec.count, rec.flow_time,
                         [float(v) for v in pt.lam], str(pt.pi)))
    else:
        data = run_orbit(x0, steps, cap=cap)
        for k in range(data.steps):
            node = data.graph.nodes[int(data.node_after[k])]
            rows.append((k + 1, "a" if data.ops[k] == 0 else "b", int(data.counts[k]),
                         float(data.flow[k]), [float(v) for v in data.lam[k]], str(node)))
    progress("orbit_done", steps)
    with _Out(args.out) as fh:
        if args.format == "csv":
            header = ["step", "op", "count", "flow_time"]
            header += [f"lambda_{i}" for i in range(1, pi.m + 1)]
            header.append("pi")
            fh.write(",".join(header) + "\n")
            for step, op, count, ft, lam, pi_text in rows:
                cells = [str(step), op, str(count), fmt(ft)]
                cells += [fmt(v) for v in lam]
                cells.append(pi_text)
                fh.write(",".join(cells) + "\n")
        else:
            payload = [
                {
                    "step": step,
                    "op": op,
                    "count": count,
                    "flow_time": float(fmt(ft)),
                    "lambda": [float(fmt(v)) for v in lam],
                    "pi": pi_text,
                }
                for step, op, count, ft, lam, pi_text in rows
            ]
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def cmd_correlations(args, cfg) -> int:
    pi = _get_pi(args, cfg)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    steps = args.steps if args.steps is not None else int(cfg.get("steps", 1_000_000))
    burn_in = args.burn_in if args.burn_in is not None else int(cfg.get("burn_in", 1000))
    n_max = args.n_max if args.n_max is not None else int(cfg.get("n_max", 40))
    cap = args.cap if args.cap is not None else 1 << 62
    if steps <= burn_in:
        raise ValueError("steps must exceed burn_in")
    x0 = _start_point(pi, args, cfg, seed)
    progress("orbit_start", 0)
    data = run_orbit(x0, steps, cap=cap)
    progress("orbit_done", steps)
    phi = ObservableSpec("coordinate", index=args.phi_index)
    series = correlation_series(data, phi, phi, n_max, burn_in)
    progress("series_done", n_max)
    with _Out(args.out) as fh:
        if args.format == "csv":
            fh.write("n,corr,stderr,samples\n")
            for s in series:
                fh.write(f"{s.n},{fmt(s.corr)},{fmt(s.stderr)},{s.samples}\n")
        else:
            json.dump(
                [
                    {"n": s.n, "corr": float(fmt(s.corr)),
                     "stderr": float(fmt(s.stderr)), "samples": s.samples}
                    for s in series
                ],
                fh,
                indent=2,
            )
            fh.write("\n")
    if args.fit:
        f = fit_exponential(series, floor_mult=args.floor_mult, seed=seed)
        print(json.dumps({
            "delta": float(fmt(f.delta)),
            "ci_low": float(fmt(f.ci_low)),
            "ci_high": float(fmt(f.ci_high)),
            "r2": float(fmt(f.r2)),
            "window": list(f.window),
            "floor_mult": args.floor_mult,
        }))
    return EXIT_OK


def _survey(args, cfg):
    pi = _get_pi(args, cfg)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    steps = args.steps if args.steps is not None else int(cfg.get("steps", 500_000))
    cap = args.cap if args.cap is not None else 1 << 62
    q_text = args.q or cfg.get("q")
    if q_text:
        q = parse_word(str(q_text))
    else:
        q = find_positive_word(rauzy_class(pi), 8)
    progress("survey_start", 0)
    records = pooled_return_survey(pi, q, steps, orbits=args.orbits, seed=seed,
                                   cap=cap, workers=args.workers)
    progress("survey_done", len(records))
    return q, records


def cmd_return_times(args, cfg) -> int:
    q, records = _survey(args, cfg)
    with _Out(args.out) as fh:
        if args.format == "csv":
            fh.write("idx,n_q,eta,tau,len_w,lognorm\n")
            for i, r in enumerate(records):
                fh.write(f"{i},{r.n_q},{fmt(r.eta)},{fmt(r.tau)},{r.n_q},{fmt(r.eta)}\n")
        else:
            json.dump(
                [
                    {"idx": i, "n_q": r.n_q, "eta": float(fmt(r.eta)),
                     "tau": float(fmt(r.tau)), "start_in_cylinder": r.start_in_cylinder}
                    for i, r in enumerate(records)
                ],
                fh,
                indent=2,
            )
            fh.write("\n")
    fitted = tail_fit(records, n_max=args.n_max)
    if args.survival_out:
        with _Out(args.survival_out) as fh:
            fh.write("N,survivors,total\n")
            for n, survivors, total in fitted.survival:
                fh.write(f"{n},{survivors},{total}\n")
    if args.fit:
        print(json.dumps({
            "word": str(q),
            "theta": float(fmt(fitted.theta)),
            "r2": float(fmt(fitted.r2)),
            "window": list(fitted.window),
            "returns": sum(1 for r in records if r.start_in_cylinder),
        }))
    return EXIT_OK


def cmd_compare(args, cfg) -> int:
    q, records = _survey(args, cfg)
    summary = comparison_survey(records)
    epsilon = args.epsilon if args.epsilon is not None else float(cfg.get("epsilon", 0.01))
    moment = exp_moment(records, epsilon)
    payload = {
        "word": str(q),
        "samples": summary.samples,
        "in_cylinder_samples": summary.in_cylinder_samples,
        "max_len_ratio": float(fmt(summary.max_len_ratio)),
        "len_ratio_plateau": summary.len_ratio_plateau,
        "max_eta_tau": float(fmt(summary.max_eta_tau)),
        "eta_tau_plateau": summary.eta_tau_plateau,
        "min_eta_minus_tau": float(fmt(summary.min_eta_minus_tau)),
        "epsilon": epsilon,
        "tau_moment": float(fmt(moment.tau_moment)),
        "n_moment": float(fmt(moment.n_moment)),
        "tau_hill_index": float(fmt(moment.tau_hill_index)),
        "moment_stable": moment.stable_under_doubling,
    }
    with _Out(args.out) as fh:
        if args.format == "json":
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        else:
            run_lr = summary.len_ratio_running
            run_et = summary.eta_tau_running
            fh.write("idx,run_len_ratio,run_eta_tau\n")
            for i in range(max(len(run_lr), len(run_et))):
                a = fmt(run_lr[i]) if i < len(run_lr) else ""
                b = fmt(run_et[i]) if i < len(run_et) else ""
                fh.write(f"{i},{a},{b}\n")
    return EXIT_OK


def cmd_zr_selftest(args, cfg) -> int:
    pi = _get_pi(args, cfg)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    rng = np.random.default_rng(seed)
    samples = args.samples
    valid = 0
    image_valid = 0
    lift_ok = 0
    alternation_ok = 0
    worst_comm = 0.0
    worst_area = 0.0
    for i in range(samples):
        x = random_rectangle(pi, rng)
        if not validate(x):
            valid += 1
        y = zip_step(x)
        if not validate(y):
            image_valid += 1
        worst_area = max(worst_area, abs(area(y) - 1.0))
        for t in (0.1, 1.0):
            u = flow(zip_step(x), t)
            v = zip_step(flow(x, t))
            worst_comm = max(
                worst_comm,
                max(abs(p - r) for p, r in zip(u.lam + u.h + u.a, v.lam + v.h + v.a)),
            )
        fr, rec = first_return(x)
        zp, zrec = zorich_step(x.base())
        if (rec.op, rec.count, rec.start) == (zrec.op, zrec.count, zrec.start):
            lift_ok += 1
        fr2, _ = first_return(fr)
        c1, c2 = y_component(fr), y_component(fr2)
        if c1 is not None and c2 is not None and c1 != c2:
            alternation_ok += 1
    progress("selftest_done", samples)
    payload = {
        "pi": str(pi),
        "samples": samples,
        "valid": valid,
        "zip_image_valid": image_valid,
        "max_area_drift": float(fmt(worst_area)),
        "max_commutation_residual": float(fmt(worst_comm)),
        "lift_matches": lift_ok,
        "component_alternations": alternation_ok,
    }
    with _Out(args.out) as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return EXIT_OK


COMMANDS = {
    "class": cmd_class,
    "positive-word": cmd_positive_word,
    "orbit": cmd_orbit,
    "correlations": cmd_correlations,
    "return-times": cmd_return_times,
    "compare": cmd_compare,
    "zr-selftest": cmd_zr_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
    except (OSError, ValueError, json.JSONDecodeError) as e:
        print(f"event=config_error detail={e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args, cfg)
    except NotFoundError as e:
        print(f"event=not_found detail={e}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except (NonGenericError, CapExceededError, DenominatorOverflowError) as e:
        step = getattr(e, "step", None)
        print(f"event=numeric_error step={step} detail={e}", file=sys.stderr)
        return EXIT_NUMERIC
    except InsufficientDataError as e:
        print(f"event=insufficient_data detail={e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, RauzyError) as e:
        print(f"event=config_error detail={e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
