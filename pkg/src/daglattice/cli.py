"""Command-line surface: every library operation bound to files.

stdout carries exactly one JSON object per invocation; diagnostics go to
stderr. Exit codes: 0 success, 2 parse error, 3 infeasible target,
4 dimension/shape error, 1 internal error.
"""

import argparse
import json
import math
import os
import statistics
import sys
import time

import numpy as np

from . import decode, dp, oracle, pipeline
from .lattice import (
    DagLattice,
    DimensionError,
    LatticeFormatError,
    build_random,
    load_lattice,
    load_target,
    validate,
)
from .logspace import NEG_INF

EXIT_INTERNAL = 1
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_SHAPE = 4


def _render(value, pretty, indent=0):
    """JSON with floats at 17 significant digits and infinities as strings."""
    pad = "  " * (indent + 1) if pretty else ""
    end = "\n" if pretty else ""
    sep = "," + (end if pretty else " ")
    close_pad = "  " * indent if pretty else ""
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = sep.join(
            f"{pad}{json.dumps(str(k))}: {_render(v, pretty, indent + 1)}"
            for k, v in value.items()
        )
        return "{" + end + items + end + close_pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = sep.join(f"{pad}{_render(v, pretty, indent + 1)}" for v in value)
        return "[" + end + items + end + close_pad + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        if math.isnan(v):
            return '"nan"'
        return format(v, ".17g")
    if value is None:
        return "null"
    return json.dumps(str(value))


def emit_report(command, inputs, outputs, args, seed=None, start=None):
    report = {"command": command, "inputs": inputs, "outputs": outputs}
    if not args.no_timing and start is not None:
        report["wall_time_ms"] = (time.perf_counter() - start) * 1000.0
    if seed is not None:
        report["seed"] = int(seed)
    print(_render(report, args.pretty))


def _load_validated(args):
    lat = load_lattice(args.lattice)
    if not args.skip_validation:
        report = validate(lat)
        if not report.ok:
            worst = report.violations[0]
            raise DimensionError(
                f"lattice failed validation ({len(report.violations)} violations; "
                f"first: {worst.kind} at row {worst.index}, deviation {worst.deviation}); "
                f"pass --skip-validation to force"
            )
    return lat


def _seed(args):
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("DAGLATTICE_SEED")
    return int(env) if env else 0


def _matrix(path):
    with open(path) as fh:
        try:
            return np.asarray(json.load(fh), dtype=np.float64)
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise LatticeFormatError(f"{path}: {exc}") from exc


def cmd_score(args):
    start = time.perf_counter()
    lat = _load_validated(args)
    target = load_target(args.target)
    value = dp.nll(lat, target)
    outputs = {"nll": value, "log_marginal": -value}
    emit_report("score", {"lattice": args.lattice, "target": args.target},
                outputs, args, start=start)
    return EXIT_INFEASIBLE if math.isinf(value) else 0


def cmd_posterior(args):
    start = time.perf_counter()
    lat = _load_validated(args)
    target = load_target(args.target)
    post = dp.posterior(lat, target, with_pairwise=args.pairwise)
    outputs = {"gamma": post.gamma.tolist()}
    if post.xi is not None:
        outputs["xi"] = post.xi.tolist()
    emit_report("posterior", {"lattice": args.lattice, "target": args.target},
                outputs, args, start=start)
    return 0


def cmd_expect(args):
    start = time.perf_counter()
    lat = _load_validated(args)
    target = load_target(args.target)
    z = dp.expected_states(lat, target)
    emit_report("expect", {"lattice": args.lattice, "target": args.target},
                {"expected_states": z.z.tolist()}, args, start=start)
    return 0


def cmd_bestpath(args):
    start = time.perf_counter()
    lat = _load_validated(args)
    target = load_target(args.target)
    path, score = decode.best_path(lat, target)
    emit_report("bestpath", {"lattice": args.lattice, "target": args.target},
                {"path": list(path.one_based()), "score": score}, args, start=start)
    return 0


def cmd_glance(args):
    start = time.perf_counter()
    lat = _load_validated(args)
    target = load_target(args.target)
    seed = _seed(args)
    ga = decode.glance_assign(lat, target, args.tau, seed)
    outputs = {
        "path": list(ga.path.one_based()),
        "observed_mask": [bool(b) for b in ga.observed_mask],
        "tau": ga.tau,
        "unmasked": int(ga.observed_mask.sum()),
    }
    emit_report("glance", {"lattice": args.lattice, "target": args.target},
                outputs, args, seed=seed, start=start)
    return 0


def cmd_decode(args):
    start = time.perf_counter()
    lat = _load_validated(args)
    if args.strategy == "lookahead":
        result = decode.lookahead(lat, args.max_steps)
    else:
        result = decode.joint_viterbi(lat, length_select=args.length_select)
    outputs = {
        "strategy": args.strategy,
        "path": list(result.path.one_based()),
        "tokens": [int(t) for t in result.tokens.tokens],
        "joint_logprob": result.joint_logprob,
        "truncated": result.truncated,
    }
    emit_report("decode", {"lattice": args.lattice}, outputs, args, start=start)
    return 0


def cmd_gradcheck(args):
    start = time.perf_counter()
    lat = _load_validated(args)
    target = load_target(args.target)
    from .gradcheck import finite_difference_check

    result = finite_difference_check(lat, target, step=args.step)
    emit_report("gradcheck", {"lattice": args.lattice, "target": args.target},
                result, args, start=start)
    return 0


def cmd_oracle(args):
    start = time.perf_counter()
    lat = _load_validated(args)
    inputs = {"lattice": args.lattice, "mode": args.mode}
    if args.mode == "logprob":
        target = load_target(args.target)
        inputs["target"] = args.target
        lm = oracle.enumerate_logprob(lat, target)
        outputs = {"log_marginal": lm, "nll": float("inf") if lm == NEG_INF else -lm}
    elif args.mode == "posterior":
        target = load_target(args.target)
        inputs["target"] = args.target
        post = oracle.enumerate_posterior(lat, target)
        outputs = {"gamma": post.gamma.tolist(), "xi": post.xi.tolist()}
    else:  # argmax
        if args.target:
            target = load_target(args.target)
            inputs["target"] = args.target
            path, toks, score = oracle.enumerate_argmax(lat, target)
        else:
            path, toks, score = oracle.enumerate_argmax(lat, length=args.length)
        outputs = {
            "path": [v + 1 for v in path],
            "tokens": [int(t) for t in toks],
            "score": score,
        }
    emit_report("oracle", inputs, outputs, args, start=start)
    return 0


def cmd_pipeline(args):
    start = time.perf_counter()
    states = _matrix(args.states)
    with open(args.durations) as fh:
        durations = json.load(fh)
    frames = pipeline.length_regulate(states, durations)
    outputs = {"frame_count": int(frames.shape[0])}
    if args.emit_frames:
        outputs["frames"] = frames.tolist()
    loss_files = (args.pred_mel, args.gt_mel, args.pred_dur, args.gt_dur,
                  args.pred_pitch, args.gt_pitch, args.pred_energy, args.gt_energy)
    if any(f is not None for f in loss_files):
        if any(f is None for f in loss_files):
            raise pipeline.ShapeMismatch("all eight pred/gt loss files are required together")
        arrays = [_matrix(f) for f in loss_files]
        tts = pipeline.tts_losses(*arrays)
        outputs["tts"] = {
            "l1": tts.l1, "dur_mse": tts.dur_mse, "pitch_mse": tts.pitch_mse,
            "energy_mse": tts.energy_mse, "total": tts.total,
        }
        if args.lattice:
            lat = _load_validated(args)
            target = load_target(args.target)
            nll_value = dp.nll(lat, target)
            outputs["nll"] = nll_value
            outputs["combined"] = dp.composite_loss(nll_value, tts.total, args.mu)
    emit_report("pipeline", {"states": args.states, "durations": args.durations},
                outputs, args, start=start)
    return 0


def cmd_bench(args):
    start = time.perf_counter()
    sizes = [int(s) for s in args.sizes.split(",")]
    if sizes != sorted(sizes):
        raise ValueError("--sizes must be ascending")
    seed = _seed(args)
    rng = np.random.default_rng(seed)
    lats = [build_random(L, args.vocab_size, 0, seed) for L in sizes]
    target = rng.integers(0, args.vocab_size, size=args.target_len)
    times = [[] for _ in sizes]
    for lat in lats:  # warm-up, excluded from timing
        dp.forward(lat, target)
    # repeats interleave across sizes so machine-speed drift cancels in ratios
    for _ in range(args.repeats):
        for slot, lat in zip(times, lats):
            t0 = time.perf_counter()
            dp.forward(lat, target)
            dp.backward(lat, target)
            slot.append((time.perf_counter() - t0) * 1000.0)
    rows = []
    prev_med = None
    for L, slot in zip(sizes, times):
        mean_ms = sum(slot) / len(slot)
        med_ms = statistics.median(slot)
        rows.append({
            "L": L,
            "mean_ms": mean_ms,
            "median_ms": med_ms,
            "ratio_to_prev": None if prev_med is None else med_ms / prev_med,
        })
        prev_med = med_ms
    emit_report("bench",
                {"sizes": sizes, "target_len": args.target_len, "repeats": args.repeats},
                {"rows": rows}, args, seed=seed, start=start)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="daglattice",
        description="Dynamic programming and decoding over DAG translation lattices",
    )
    parser.add_argument("--pretty", action="store_true", help="indented JSON output")
    parser.add_argument("--no-timing", action="store_true",
                        help="omit wall_time_ms (for byte-level output comparison)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, fn, lattice=True, target=True):
        p = sub.add_parser(name)
        if lattice:
            p.add_argument("--lattice", required=True)
            p.add_argument("--skip-validation", action="store_true")
        if target:
            p.add_argument("--target", required=True)
        p.set_defaults(fn=fn)
        return p

    add("score", cmd_score)
    p = add("posterior", cmd_posterior)
    p.add_argument("--pairwise", action="store_true")
    add("expect", cmd_expect)
    add("bestpath", cmd_bestpath)
    p = add("glance", cmd_glance)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--seed", type=int)
    p = add("decode", cmd_decode, target=False)
    p.add_argument("--strategy", choices=["lookahead", "viterbi"], required=True)
    p.add_argument("--length-select", choices=["raw", "normalized"], default="normalized")
    p.add_argument("--max-steps", type=int)
    p = add("gradcheck", cmd_gradcheck)
    p.add_argument("--step", type=float, default=1e-6)
    p = add("oracle", cmd_oracle, target=False)
    p.add_argument("--mode", choices=["logprob", "posterior", "argmax"], required=True)
    p.add_argument("--target")
    p.add_argument("--length", type=int)
    p = sub.add_parser("pipeline")
    p.add_argument("--states", required=True)
    p.add_argument("--durations", required=True)
    p.add_argument("--emit-frames", action="store_true")
    for flag in ("pred-mel", "gt-mel", "pred-dur", "gt-dur",
                 "pred-pitch", "gt-pitch", "pred-energy", "gt-energy"):
        p.add_argument(f"--{flag}")
    p.add_argument("--lattice")
    p.add_argument("--target")
    p.add_argument("--skip-validation", action="store_true")
    p.add_argument("--mu", type=float, default=5.0)
    p.set_defaults(fn=cmd_pipeline)
    p = sub.add_parser("bench")
    p.add_argument("--sizes", required=True, help="comma-separated ascending graph sizes")
    p.add_argument("--target-len", type=int, default=32)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--vocab-size", type=int, default=16)
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (LatticeFormatError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (dp.InfeasibleTarget, oracle.CapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DimensionError, dp.MissingHiddenStates, pipeline.LengthMismatch,
            pipeline.ShapeMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except Exception as exc:  # pragma: no cover
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
