"""Command-line interface.

Exit codes: 0 success, 2 validation error (bad flags, bad files, values out
of range, insecure preset without --insecure-ok), 3 infeasible parameters
(constraints violated before any data is touched).
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import time

from . import comparator, fv, harness, serialize
from .comparator import ComparatorConfig, OracleBackend, VARIANTS, depth_estimate
from .encoder import EncodingParams, decode, encode, encoding_error_bound
from .harness import DATA_RANGE, InfeasibleParamsError
from .presets import PRESETS, SWEEP_GRID, get_preset
from .ring import has_ntt, ring_mul, sample_uniform
from .serialize import SerializationError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3


class CliError(Exception):
    exit_code = EXIT_VALIDATION


class InfeasibleError(CliError):
    exit_code = EXIT_INFEASIBLE


def _preset(args, gate_security: bool):
    try:
        p = get_preset(args.preset)
    except KeyError as exc:
        raise CliError(str(exc.args[0])) from exc
    if gate_security and not p.secure and not args.insecure_ok:
        raise CliError(
            f"preset {p.name!r} is NOT a secure parameter set "
            f"({p.scheme.security_note}); pass --insecure-ok to run it anyway"
        )
    return p


def _check_range(*values: float) -> None:
    for x in values:
        if abs(x) > DATA_RANGE:
            raise CliError(
                f"input {x} outside the normalised range [-{DATA_RANGE}, {DATA_RANGE}]"
            )


def _load_or_gen_keys(args, preset) -> fv.KeySet:
    if getattr(args, "keys", None):
        keys = serialize.load_keyset(args.keys)
        if serialize.params_hash(keys.params) != serialize.params_hash(preset.scheme):
            raise CliError(
                f"keyset in {args.keys} was generated for different parameters "
                f"than preset {preset.name!r}"
            )
        return keys
    print(f"generating fresh keys for {preset.name} (seed {args.seed}) ...")
    return fv.keygen(preset.scheme, random.Random(f"{args.seed}:keygen"))


def _write_json(args, obj) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as f:
            json.dump(obj, f, indent=2, sort_keys=True)
            f.write("\n")
        print(f"wrote {args.out}")


def cmd_keygen(args) -> int:
    p = _preset(args, gate_security=True)
    keys = fv.keygen(p.scheme, random.Random(f"{args.seed}:keygen"))
    serialize.save_keyset(args.out, keys)
    print(
        f"keyset for preset {p.name} (d={p.scheme.ring.d}, "
        f"log2 q={p.scheme.ring.q.bit_length()}, t={p.scheme.t}) "
        f"written to {args.out}/"
    )
    return EXIT_OK


def cmd_encode(args) -> int:
    p = _preset(args, gate_security=False)
    ep = p.encoding
    if args.base or args.int_digits or args.frac_digits:
        try:
            ep = EncodingParams(
                args.base or ep.b,
                args.int_digits or ep.n_i,
                args.frac_digits or ep.n_f,
                ep.d,
                ep.t,
            )
        except ValueError as exc:
            raise InfeasibleError(str(exc)) from exc
    pt = encode(args.value, ep)
    back = decode(pt, ep)
    nonzero = {i: c for i, c in enumerate(pt.centered()) if c}
    summary = {
        "value": args.value,
        "decoded": back,
        "abs_error": abs(back - args.value),
        "error_bound": encoding_error_bound(ep),
        "encoding": serialize.encoding_to_dict(ep),
        "nonzero_coeffs": {str(k): v for k, v in sorted(nonzero.items())},
    }
    print(f"encode({args.value}) -> {len(nonzero)} nonzero coefficients")
    print(f"decode roundtrip: {back!r} (|error| = {summary['abs_error']:.3g}, "
          f"truncation bound {summary['error_bound']:.3g})")
    if args.out:
        serialize.save_plaintext(args.out, pt, p.scheme, ep)
        print(f"wrote {args.out}")
    return EXIT_OK


def _print_depth(ct: fv.Ciphertext) -> str:
    return f"{ct.mult_depth} ciphertext muls, {ct.plain_mult_count} plaintext muls"


def cmd_comp(args) -> int:
    _check_range(args.x1, args.x2)
    oracle = comparator.comp(args.x1, args.x2, args.r, OracleBackend())
    if args.oracle:
        print(f"comp({args.x1}, {args.x2}, r={args.r}) = {oracle!r}  [oracle backend]")
        _write_json(args, {"x1": args.x1, "x2": args.x2, "r": args.r,
                           "backend": "oracle", "weight": oracle})
        return EXIT_OK
    p = _preset(args, gate_security=True)
    keys = _load_or_gen_keys(args, p)
    be = comparator.EncryptedBackend(
        keys, p.encoding, random.Random(f"{args.seed}:enc")
    )
    t0 = time.perf_counter()
    ct = comparator.comp(be.inject(args.x1), be.inject(args.x2), args.r, be)
    seconds = time.perf_counter() - t0
    pt, budget = fv.decrypt_with_budget(keys.sk, ct)
    w = decode(pt, p.encoding)
    print(f"comp({args.x1}, {args.x2}, r={args.r}) = {w!r}")
    print(f"oracle value {oracle!r}, |difference| = {abs(w - oracle):.3g}")
    print(f"noise budget {budget} bits; depth: {_print_depth(ct)}; {seconds:.1f}s")
    _write_json(args, {
        "x1": args.x1, "x2": args.x2, "r": args.r, "backend": "encrypted",
        "preset": p.name, "weight": w, "weight_oracle": oracle,
        "noise_budget": budget, "depth": ct.mult_depth,
        "plain_mults": ct.plain_mult_count, "seconds": seconds,
    })
    return EXIT_OK


def cmd_select(args) -> int:
    _check_range(args.x1, args.x2)
    cfg = ComparatorConfig(args.r, args.variant)
    ob = OracleBackend()
    ores = comparator.select(args.x1, args.x2, cfg, ob)
    if args.oracle:
        print(f"select_{args.variant}({args.x1}, {args.x2}, r={args.r}) [oracle]:")
        print(f"  weights  {ores.weight_first!r}  {ores.weight_second!r}")
        print(f"  scaled   {ores.scaled_first!r}  {ores.scaled_second!r}")
        _write_json(args, {
            "variant": args.variant, "r": args.r, "backend": "oracle",
            "weights": [ores.weight_first, ores.weight_second],
            "scaled": [ores.scaled_first, ores.scaled_second],
        })
        return EXIT_OK
    p = _preset(args, gate_security=True)
    keys = _load_or_gen_keys(args, p)
    be = comparator.EncryptedBackend(
        keys, p.encoding, random.Random(f"{args.seed}:enc")
    )
    t0 = time.perf_counter()
    res = comparator.select(be.inject(args.x1), be.inject(args.x2), cfg, be)
    seconds = time.perf_counter() - t0
    dec = {}
    budgets = {}
    for name, ct in (("weight_first", res.weight_first),
                     ("weight_second", res.weight_second),
                     ("scaled_first", res.scaled_first),
                     ("scaled_second", res.scaled_second)):
        pt, budget = fv.decrypt_with_budget(keys.sk, ct)
        dec[name] = decode(pt, p.encoding)
        budgets[name] = budget
    est = depth_estimate(args.variant, args.r)
    print(f"select_{args.variant}({args.x1}, {args.x2}, r={args.r}) on {p.name}:")
    print(f"  weights  {dec['weight_first']!r}  {dec['weight_second']!r}   "
          f"(oracle {ores.weight_first!r}  {ores.weight_second!r})")
    print(f"  scaled   {dec['scaled_first']!r}  {dec['scaled_second']!r}   "
          f"(oracle {ores.scaled_first!r}  {ores.scaled_second!r})")
    print(f"  noise budgets {budgets}; weight depth: "
          f"{_print_depth(res.weight_first)} (estimate {est[0]} ct, {est[1]} plain); "
          f"{seconds:.1f}s")
    _write_json(args, {
        "variant": args.variant, "r": args.r, "backend": "encrypted",
        "preset": p.name, "decoded": dec,
        "oracle": {"weight_first": ores.weight_first,
                   "weight_second": ores.weight_second,
                   "scaled_first": ores.scaled_first,
                   "scaled_second": ores.scaled_second},
        "noise_budgets": budgets,
        "depth_weight": res.weight_first.mult_depth,
        "depth_scaled": res.scaled_first.mult_depth,
        "plain_mults": res.weight_first.plain_mult_count,
        "seconds": seconds,
    })
    return EXIT_OK


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise CliError(f"bad {what} list {text!r}") from exc


def cmd_table1(args) -> int:
    r_values = _parse_int_list(args.r_list, "iteration") if args.r_list else range(1, 9)
    report = harness.run_table1(r_values)
    print(f"{'r':>2}  {'mae gt_half':>12}  {'published':>9}  "
          f"{'mae gt':>12}  {'published':>9}")
    for row in report["rows"]:
        ref_h = row["reference_gt_half"]
        ref_g = row["reference_gt"]
        print(f"{row['r']:>2}  {row['mae_gt_half']:>12.4f}  "
              f"{ref_h if ref_h is not None else '-':>9}  "
              f"{row['mae_gt']:>12.4f}  {ref_g if ref_g is not None else '-':>9}")
    if args.csv:
        with open(args.csv, "w") as f:
            f.write(harness.simple_error_csv())
        print(f"wrote per-point simple-error columns to {args.csv}")
    _write_json(args, report)
    return EXIT_OK


def cmd_eval(args) -> int:
    p = _preset(args, gate_security=args.backend == "encrypted")
    if args.pairs_file:
        dataset = harness.load_pairs(args.pairs_file)
    else:
        dataset = harness.gen_pairs(args.n_pairs, args.seed, args.min_gap)
    keys = None
    if args.backend == "encrypted" and getattr(args, "keys", None):
        keys = _load_or_gen_keys(args, p)
    report = harness.run_encrypted_eval(
        p, args.variant, args.r, dataset,
        backend=args.backend, seed=args.seed,
        fail_threshold=args.fail_threshold, keys=keys,
    )
    print(f"eval {p.name} select_{args.variant} r={args.r} "
          f"({report.backend}, {report.n_instances} pairs)")
    print(f"  MAE weights vs oracle circuit: {report.mae_weights:.3g}   "
          f"vs ideal weights: {report.mae_weights_ideal:.3g}")
    print(f"  MAE scaled  vs oracle circuit: {report.mae_scaled:.3g}   "
          f"vs ideal weights: {report.mae_scaled_ideal:.3g}")
    if report.reference:
        print(f"  published r=3 aggregates: weights {report.reference['mae_weights_ideal']}, "
              f"scaled {report.reference['mae_scaled_ideal']}")
    print(f"  failed instances: {report.failed_instances}/{report.n_instances} "
          f"(threshold {report.fail_threshold:.3g}); "
          f"errors above 1.0: {report.unit_error_instances}; "
          f"success: {report.success}")
    print(f"  depth: weights {report.depth_weight}, scaled {report.depth_scaled}; "
          f"{report.seconds_per_instance:.2f}s per pair")
    _write_json(args, report.to_dict())
    return EXIT_OK


def _sweep_grid(args) -> dict:
    grid = {}
    if args.d_list:
        grid["d"] = _parse_int_list(args.d_list, "degree")
    if args.q_bits_list:
        by_bits = {q.bit_length(): q for q in SWEEP_GRID["q"]}
        bits = _parse_int_list(args.q_bits_list, "modulus bit-length")
        missing = [b for b in bits if b not in by_bits]
        if missing:
            raise CliError(
                f"no grid modulus with bit length {missing}; "
                f"available: {sorted(by_bits)}"
            )
        grid["q"] = [by_bits[b] for b in bits]
    if args.t_list:
        grid["t"] = _parse_int_list(args.t_list, "plaintext modulus")
    if args.b_list:
        grid["b"] = _parse_int_list(args.b_list, "base")
    if args.ni_list:
        grid["n_i"] = _parse_int_list(args.ni_list, "integer digit")
    if args.nf_list:
        grid["n_f"] = _parse_int_list(args.nf_list, "fraction digit")
    return grid


def cmd_sweep(args) -> int:
    if args.backend == "encrypted" and not args.insecure_ok:
        # the sweep grid contains non-vetted parameter sets by construction
        raise CliError(
            "an encrypted sweep runs non-vetted parameter sets; "
            "pass --insecure-ok to confirm"
        )
    dataset = harness.gen_pairs(args.n_pairs, args.seed, args.min_gap)
    result = harness.sweep(
        _sweep_grid(args), args.r, args.variant, dataset,
        backend=args.backend, seed=args.seed,
        allow_nonstandard=args.allow_nonstandard,
    )
    if not result["ranked"]:
        raise InfeasibleError(
            f"no feasible parameter combinations "
            f"({len(result['skipped'])} skipped)"
        )
    print(f"sweep select_{args.variant} r={args.r} ({args.backend}, "
          f"{len(result['ranked'])} combos, {len(result['skipped'])} skipped)")
    print(f"{'rank':>4}  {'mae weights':>12}  {'mae scaled':>11}  "
          f"{'failed':>6}  parameters")
    for i, entry in enumerate(result["ranked"][: args.top], 1):
        print(f"{i:>4}  {entry['mae_weights']:>12.3g}  "
              f"{entry['mae_scaled']:>11.3g}  "
              f"{entry['failed_instances']:>6}  {entry['preset']}")
    _write_json(args, result)
    return EXIT_OK


def cmd_bench(args) -> int:
    p = _preset(args, gate_security=True)
    reps = 1 if args.quick else 3
    rng = random.Random(args.seed)
    results = {"preset": p.name, "reps": reps, "timing_policy": harness.TIMING_POLICY}

    def timed(name, fn, once=False):
        times = []
        out = None
        for _ in range(1 if once else reps):
            t0 = time.perf_counter()
            out = fn()
            times.append(time.perf_counter() - t0)
        results[name] = min(times)
        print(f"  {name:<24} {min(times):8.3f}s")
        return out

    print(f"bench on preset {p.name} (best of {reps}):")
    a = sample_uniform(p.scheme.ring, rng)
    b = sample_uniform(p.scheme.ring, rng)
    timed("ring_mul (default)", lambda: ring_mul(a, b))
    if has_ntt(p.scheme.ring):
        timed("ring_mul (ntt)", lambda: ring_mul(a, b, path="ntt"))
    keys = timed("keygen", lambda: fv.keygen(p.scheme, rng), once=True)
    pt = encode(0.1, p.encoding)
    ct = timed("encrypt", lambda: fv.encrypt(keys.pk, pt, rng), once=True)
    timed("eval_add", lambda: fv.eval_add(ct, ct))
    timed("eval_mul_plain", lambda: fv.eval_mul_plain(ct, pt))
    timed("eval_mul", lambda: fv.eval_mul(ct, ct, keys.rlk))
    timed("decrypt+budget", lambda: fv.decrypt_with_budget(keys.sk, ct))
    print(f"  note: {harness.TIMING_POLICY}")
    _write_json(args, results)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hecond",
        description="Encrypted comparison and selection on fractionally "
                    "encoded reals under a levelled FV scheme.",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log skipped combinations and progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, keys=False, gate=False):
        sp.add_argument("--preset", default="paper-r3",
                        help=f"parameter preset ({', '.join(PRESETS)})")
        sp.add_argument("--seed", type=int, default=0, help="deterministic seed")
        if keys:
            sp.add_argument("--keys", help="directory with a saved keyset")
        if gate:
            sp.add_argument("--insecure-ok", action="store_true",
                            help="acknowledge running a non-vetted parameter set")

    sp = sub.add_parser("keygen", help="generate and save a keyset")
    add_common(sp, gate=True)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_keygen)

    sp = sub.add_parser("encode", help="fractional-encode one value")
    add_common(sp)
    sp.add_argument("--value", type=float, required=True)
    sp.add_argument("--base", type=int, help="override digit base")
    sp.add_argument("--int-digits", type=int, help="override integer digit count")
    sp.add_argument("--frac-digits", type=int, help="override fraction digit count")
    sp.add_argument("--out", help="write the plaintext to this file")
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("comp", help="encrypted comparison weight for one pair")
    add_common(sp, keys=True, gate=True)
    sp.add_argument("--x1", type=float, required=True)
    sp.add_argument("--x2", type=float, required=True)
    sp.add_argument("--r", type=int, default=3, help="doubling iterations")
    sp.add_argument("--oracle", action="store_true", help="double-precision only")
    sp.add_argument("--out", help="write a JSON result")
    sp.set_defaults(func=cmd_comp)

    sp = sub.add_parser("select", help="encrypted selection for one pair")
    add_common(sp, keys=True, gate=True)
    sp.add_argument("--x1", type=float, required=True)
    sp.add_argument("--x2", type=float, required=True)
    sp.add_argument("--r", type=int, default=3)
    sp.add_argument("--variant", choices=VARIANTS, default="gt_half")
    sp.add_argument("--oracle", action="store_true", help="double-precision only")
    sp.add_argument("--out", help="write a JSON result")
    sp.set_defaults(func=cmd_select)

    sp = sub.add_parser("table1", help="oracle accuracy rows vs published values")
    sp.add_argument("--r-list", help="comma-separated iteration counts (default 1..8)")
    sp.add_argument("--csv", help="also write per-point simple-error CSV")
    sp.add_argument("--out", help="write a JSON report")
    sp.set_defaults(func=cmd_table1)

    sp = sub.add_parser("eval", help="accuracy report over a pair dataset")
    add_common(sp, keys=True, gate=True)
    sp.add_argument("--variant", choices=VARIANTS, default="gt_half")
    sp.add_argument("--r", type=int, default=3)
    sp.add_argument("--n-pairs", type=int, default=20)
    sp.add_argument("--min-gap", type=float, help="reject pairs closer than this")
    sp.add_argument("--pairs-file", help="read pairs from a file instead")
    sp.add_argument("--backend", choices=("encrypted", "simulate"),
                    default="encrypted")
    sp.add_argument("--fail-threshold", type=float,
                    help="per-instance error flag threshold "
                         "(default 10x encoding truncation bound)")
    sp.add_argument("--out", help="write the JSON report")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("sweep", help="rank encoding/scheme parameter combinations")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--r", type=int, default=3)
    sp.add_argument("--variant", choices=VARIANTS, default="gt_half")
    sp.add_argument("--backend", choices=("simulate", "encrypted"),
                    default="simulate")
    sp.add_argument("--n-pairs", type=int, default=20)
    sp.add_argument("--min-gap", type=float)
    sp.add_argument("--d-list", help="restrict ring degrees, e.g. 8192,16384")
    sp.add_argument("--q-bits-list", help="restrict moduli by bit length, "
                                          "e.g. 116,435")
    sp.add_argument("--t-list", help="restrict plaintext moduli")
    sp.add_argument("--b-list", help="restrict digit bases")
    sp.add_argument("--ni-list", help="restrict integer digit counts")
    sp.add_argument("--nf-list", help="restrict fraction digit counts")
    sp.add_argument("--allow-nonstandard", action="store_true",
                    help="permit values outside the published grid")
    sp.add_argument("--insecure-ok", action="store_true",
                    help="required for an encrypted-backend sweep")
    sp.add_argument("--top", type=int, default=10, help="rows to print")
    sp.add_argument("--out", help="write the JSON report")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("bench", help="wall-clock timings of core operations")
    add_common(sp, gate=True)
    sp.add_argument("--quick", action="store_true", help="single repetition")
    sp.add_argument("--out", help="write a JSON report")
    sp.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except InfeasibleParamsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, OSError, SerializationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
