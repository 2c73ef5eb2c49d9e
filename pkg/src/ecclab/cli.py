"""Command-line surface: reproducible batch runs over all library features.

Every randomized subcommand requires an explicit --seed; outputs are written
atomically (temp file + rename) and each file output is accompanied by a
.manifest.json echoing the full configuration, so a result can always be
regenerated byte-for-byte. Worker counts change wall-clock time only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import beep as beep_mod
from . import beer as beer_mod
from . import code as codes
from . import ein as ein_mod
from . import einsim, errmodel, gf2, harp, reach
from .errmodel import CellLayout, DataPattern

__all__ = ["main"]


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-ecclab-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text: str) -> None:
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func" and v is not None}
    manifest = json.dumps(config, sort_keys=True, default=str, indent=1) + "\n"
    if args.output:
        _atomic_write(args.output, text)
        _atomic_write(args.output + ".manifest.json", manifest)
    else:
        sys.stdout.write(text)
        sys.stdout.write(manifest)


def _load_spec(path: str):
    return None if path in ("none", "-") else codes.load_code(path)


def _pattern(args) -> DataPattern:
    return DataPattern(args.pattern, getattr(args, "pattern_seed", 0) or 0)


def _layout(args) -> CellLayout:
    return CellLayout(args.layout, getattr(args, "block_len", 1) or 1)


def _parse_grid(text: str) -> list[float]:
    """Either a comma list of rates or lo:hi:points for a log-spaced grid."""
    if ":" in text:
        lo_s, hi_s, n_s = text.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
        if lo <= 0 or hi <= lo or n < 2:
            raise ValueError(f"bad grid spec {text!r}")
        return list(np.geomspace(lo, hi, n))
    return [float(t) for t in text.split(",") if t]


def _read_bits(path: str) -> np.ndarray:
    with open(path) as f:
        text = f.read().split()
    bits = "".join(text)
    return np.array([int(c) for c in bits], dtype=np.uint8)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_codegen(args) -> int:
    if args.hamming_k:
        spec = codes.hamming_sec(args.hamming_k)
    elif args.random_k:
        if args.seed is None:
            raise ValueError("--random-k requires --seed")
        spec = codes.random_sec(args.random_k, args.seed)
    else:
        spec = codes.repetition(args.repetition)
    text = f"{spec.n} {spec.k} {spec.d}\n" + gf2.matrix_to_text(spec.H)
    _emit(args, text)
    return 0


def _cmd_simulate(args) -> int:
    spec = _load_spec(args.spec)
    params = errmodel.ErrorModelParams(rber=args.rber, pattern=_pattern(args), layout=_layout(args))
    hist = einsim.simulate_histogram(spec, params, args.burst_bits, args.words, args.seed,
                                     workers=args.workers)
    _emit(args, hist.to_csv())
    return 0


def _cmd_ein_infer(args) -> int:
    with open(args.observed) as f:
        observed = einsim.ErrorCountHistogram.from_csv(f.read(), args.word_bits)
    paths = []
    for p in args.candidates:
        if os.path.isdir(p):
            paths.extend(sorted(os.path.join(p, name) for name in os.listdir(p)
                                if name.endswith((".code", ".txt"))))
        else:
            paths.append(p)
    specs = [codes.load_code(p) for p in paths]
    if args.include_no_ecc:
        specs.append(None)
    rbers = _parse_grid(args.rber_grid)
    patterns = [DataPattern(kind, args.pattern_seed or 0) for kind in args.patterns]
    result = ein_mod.map_estimate(observed, specs, rbers, patterns, args.budget, args.seed,
                                  layout=_layout(args), resamples=args.bootstrap,
                                  workers=args.workers)
    doc = {
        "map": result.map_model.spec_name,
        "ranked": [
            {
                "spec": model.spec_name,
                "n": model.spec_n,
                "log_likelihood": ll,
                "rber": model.params.rber,
                "pattern": model.params.pattern.kind,
                "bootstrap": (
                    {
                        "low": result.bootstrap[model.spec_name].low,
                        "high": result.bootstrap[model.spec_name].high,
                        "p5": result.bootstrap[model.spec_name].p5,
                        "p95": result.bootstrap[model.spec_name].p95,
                    }
                    if model.spec_name in result.bootstrap
                    else None
                ),
            }
            for model, ll in result.ranked
        ],
    }
    _emit(args, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return 0


def _cmd_beer_profile(args) -> int:
    spec = codes.load_code(args.spec)
    weights = [int(w) for w in args.weights.split(",") if w]
    patterns = beer_mod.charged_patterns(spec.k, weights)
    experiment = beer_mod.simulate_experiment(spec, patterns, args.rber, args.trials,
                                              args.seed, layout=_layout(args))
    profile = beer_mod.extract_profile(experiment, args.threshold, layout=_layout(args))
    _emit(args, profile.to_json())
    return 0


def _cmd_beer_recover(args) -> int:
    with open(args.profile) as f:
        profile = beer_mod.MiscorrectionProfile.from_json(f.read())
    result = beer_mod.recover(profile, exhaustive=args.exhaustive, parity_bits=args.parity_bits)
    doc = {
        "unique": result.unique,
        "n_solutions": len(result.solutions),
        "nodes": result.nodes,
        "diagnosis": result.diagnosis,
        "solutions": [
            {"n": s.n, "k": s.k, "d": s.d, "H": gf2.matrix_to_text(s.H)}
            for s in result.solutions
        ],
    }
    _emit(args, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return 0


def _cmd_beep_locate(args) -> int:
    spec = codes.load_code(args.spec)
    written = _read_bits(args.written)
    observed = _read_bits(args.observed)
    found = beep_mod.localize(spec, written, observed)
    if found is None:
        doc = {"indeterminate": True}
    else:
        doc = {"indeterminate": False, "error_positions": sorted(found)}
    _emit(args, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return 0


def _cmd_beep_profile(args) -> int:
    spec = codes.load_code(args.spec)
    device = harp.make_population(spec, args.words, args.errors, args.pbit, args.seed)
    lines = ["word,success,true_at_risk,recovered"]
    n_success = 0
    for w in range(args.words):
        recovered, success = beep_mod.profile_codeword(spec, device, w, passes=args.passes,
                                                       trials_per_pattern=args.trials)
        n_success += success
        true_set = ";".join(str(b) for b in sorted(device.true_at_risk(w)))
        rec = ";".join(str(b) for b in sorted(recovered))
        lines.append(f"{w},{int(success)},{true_set},{rec}")
    lines.append(f"# success_rate,{n_success / args.words}")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def _cmd_harp_eval(args) -> int:
    spec = codes.load_code(args.spec)
    algos = [a.strip().upper() for a in args.algos.split(",") if a]
    device = harp.make_population(spec, args.words, args.errors, args.pbit, args.seed)
    runs = harp.simulate_profilers(device, algos, args.rounds, _pattern(args), args.seed)
    cov = ["algorithm,round,direct_coverage,indirect_coverage"]
    for algo in algos:
        run = runs[algo]
        for r in range(args.rounds + 1):
            cov.append(f"{algo},{r},{run.coverage_direct[r]:.6f},{run.coverage_indirect[r]:.6f}")
    _emit(args, "\n".join(cov) + "\n")
    if args.out_maxsim:
        hist = ["algorithm,max_simultaneous,words"]
        for algo in algos:
            run = runs[algo]
            values, counts = np.unique(run.max_simultaneous_after, return_counts=True)
            for v, c in zip(values, counts):
                hist.append(f"{algo},{int(v)},{int(c)}")
        _atomic_write(args.out_maxsim, "\n".join(hist) + "\n")
    return 0


def _cmd_reach_eval(args) -> int:
    pop = reach.make_population(args.cells, args.seed)
    target = (args.target_trefw, args.target_dt)
    lines = ["reach_trefw,reach_dt,coverage,false_positive_rate,runtime_seconds"]
    for t_reach in _parse_grid(args.reach_trefw):
        for dt in _parse_grid(args.reach_dt):
            out = reach.evaluate_reach(pop, target, (t_reach, dt), args.iterations, args.seed)
            lines.append(f"{t_reach},{dt},{out.coverage:.6f},{out.false_positive_rate:.6f},"
                         f"{out.runtime_seconds:.6f}")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def _cmd_uber_calc(args) -> int:
    value = reach.tolerable_rber(args.w, args.k, args.target)
    lines = [
        "word_bits,correctable,uber_target,tolerable_rber",
        f"{args.w},{args.k},{args.target},{value:.6e}",
    ]
    check = reach.tolerable_rber(72, 1, 1e-15)
    lines.append(
        f"# note: the binomial-tail model gives {check:.2e} for (w=72, k=1) at UBER 1e-15;"
    )
    lines.append(
        "# commonly quoted SECDED tables list 3.8e-09 for that point. The model value is"
    )
    lines.append("# what this tool reports; the difference is inherent to the table, not a bug.")
    _emit(args, "\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    # @file reads additional flags from a config file (one token per line);
    # flags given on the command line afterwards win
    parser = argparse.ArgumentParser(prog="ecclab",
                                     description="on-die ECC inference laboratory",
                                     fromfile_prefix_chars="@")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed_required=True):
        p.add_argument("--seed", type=int, required=seed_required,
                       help="deterministic run seed (required: no wall-clock defaults)")
        p.add_argument("--workers", type=int, default=1,
                       help="worker count; affects wall-clock only, never results")
        p.add_argument("-o", "--output", help="output path (stdout when omitted)")

    p = sub.add_parser("codegen", help="construct a block code and write its description")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--hamming-k", type=int)
    group.add_argument("--random-k", type=int)
    group.add_argument("--repetition", type=int)
    add_common(p, seed_required=False)
    p.set_defaults(func=_cmd_codegen)

    p = sub.add_parser("simulate", help="Monte-Carlo post-correction error histogram")
    p.add_argument("--spec", required=True, help="code file, or 'none' for no ECC")
    p.add_argument("--rber", type=float, required=True)
    p.add_argument("--pattern", default=errmodel.RANDOM,
                   choices=[errmodel.ALL_ONES, errmodel.ALL_ZEROS, errmodel.CHECKERED, errmodel.RANDOM])
    p.add_argument("--pattern-seed", type=int, default=0)
    p.add_argument("--layout", default=errmodel.ALL_TRUE,
                   choices=[errmodel.ALL_TRUE, errmodel.ALL_ANTI, errmodel.ROW_ALTERNATING])
    p.add_argument("--block-len", type=int, default=1)
    p.add_argument("--burst-bits", type=int, required=True)
    p.add_argument("--words", type=int, required=True)
    add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("ein-infer", help="MAP inference of scheme and raw error rate")
    p.add_argument("--observed", required=True, help="histogram CSV")
    p.add_argument("--word-bits", type=int, required=True)
    p.add_argument("--candidates", nargs="+", default=[], help="code files")
    p.add_argument("--include-no-ecc", action="store_true")
    p.add_argument("--rber-grid", required=True, help="lo:hi:points (log) or comma list")
    p.add_argument("--patterns", nargs="+", default=[errmodel.RANDOM])
    p.add_argument("--pattern-seed", type=int, default=0)
    p.add_argument("--layout", default=errmodel.ALL_TRUE,
                   choices=[errmodel.ALL_TRUE, errmodel.ALL_ANTI, errmodel.ROW_ALTERNATING])
    p.add_argument("--block-len", type=int, default=1)
    p.add_argument("--budget", type=int, default=10000, help="simulated words per grid point")
    p.add_argument("--bootstrap", type=int, default=0)
    add_common(p)
    p.set_defaults(func=_cmd_ein_infer)

    p = sub.add_parser("beer-profile", help="simulated miscorrection-profile experiment")
    p.add_argument("--spec", required=True)
    p.add_argument("--weights", default="1", help="charged-pattern weights, e.g. 1,2")
    p.add_argument("--rber", type=float, default=0.3)
    p.add_argument("--trials", type=int, default=4096)
    p.add_argument("--threshold", type=float, default=0.01)
    p.add_argument("--layout", default=errmodel.ALL_TRUE,
                   choices=[errmodel.ALL_TRUE, errmodel.ALL_ANTI])
    p.add_argument("--block-len", type=int, default=1)
    add_common(p)
    p.set_defaults(func=_cmd_beer_profile)

    p = sub.add_parser("beer-recover", help="recover parity-check matrices from a profile")
    p.add_argument("--profile", required=True)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--parity-bits", type=int)
    add_common(p, seed_required=False)
    p.set_defaults(func=_cmd_beer_recover)

    p = sub.add_parser("beep-locate", help="bit-exact pre-correction error localization")
    p.add_argument("--spec", required=True)
    p.add_argument("--written", required=True, help="file of 0/1 characters, k bits")
    p.add_argument("--observed", required=True)
    add_common(p, seed_required=False)
    p.set_defaults(func=_cmd_beep_locate)

    p = sub.add_parser("beep-profile", help="profile simulated words with crafted patterns")
    p.add_argument("--spec", required=True)
    p.add_argument("--words", type=int, required=True)
    p.add_argument("--errors", type=int, required=True)
    p.add_argument("--pbit", type=float, required=True)
    p.add_argument("--passes", type=int, default=1)
    p.add_argument("--trials", type=int, default=2)
    add_common(p)
    p.set_defaults(func=_cmd_beep_profile)

    p = sub.add_parser("harp-eval", help="compare profiling algorithms on one population")
    p.add_argument("--spec", required=True)
    p.add_argument("--words", type=int, required=True)
    p.add_argument("--errors", type=int, required=True)
    p.add_argument("--pbit", type=float, required=True)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--algos", default="NAIVE,HARP_U,HARP_A")
    p.add_argument("--pattern", default=errmodel.RANDOM,
                   choices=[errmodel.ALL_ONES, errmodel.CHECKERED, errmodel.RANDOM])
    p.add_argument("--pattern-seed", type=int, default=0)
    p.add_argument("--out-maxsim", help="optional CSV of worst-case simultaneous errors")
    add_common(p)
    p.set_defaults(func=_cmd_harp_eval)

    p = sub.add_parser("reach-eval", help="coverage/false-positive/runtime tradeoff sweep")
    p.add_argument("--cells", type=int, required=True)
    p.add_argument("--target-trefw", type=float, required=True)
    p.add_argument("--target-dt", type=float, default=0.0)
    p.add_argument("--reach-trefw", required=True, help="comma list or lo:hi:points")
    p.add_argument("--reach-dt", default="0", help="comma list or lo:hi:points")
    p.add_argument("--iterations", type=int, default=16)
    add_common(p)
    p.set_defaults(func=_cmd_reach_eval)

    p = sub.add_parser("uber-calc", help="tolerable raw error rate for an UBER target")
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--target", type=float, required=True)
    add_common(p, seed_required=False)
    p.set_defaults(func=_cmd_uber_calc)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"ecclab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
