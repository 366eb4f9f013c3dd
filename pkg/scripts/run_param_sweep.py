"""Rank encoding/scheme parameter combinations by selection accuracy.

Runs the exact plaintext-ring simulation over (a restriction of) the
published parameter grid and prints the ranking: MAE of the selection
weights against the oracle circuit, plus the wrap-failure count.  The
full grid is 2880 combinations; restrict it with the list flags.
"""

import argparse
import json
import sys

from hecond import harness
from hecond.presets import SWEEP_GRID


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r", type=int, default=3)
    ap.add_argument("--variant", default="gt_half")
    ap.add_argument("--n-pairs", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--min-gap", type=float)
    ap.add_argument("--d-list", help="ring degrees, e.g. 8192,16384")
    ap.add_argument("--q-bits-list", help="moduli by bit length, e.g. 226,435")
    ap.add_argument("--t-list")
    ap.add_argument("--b-list")
    ap.add_argument("--ni-list")
    ap.add_argument("--nf-list")
    ap.add_argument("--allow-nonstandard", action="store_true",
                    help="accept values outside the published grid")
    ap.add_argument("--top", type=int, default=15)
    ap.add_argument("--out", help="write the full ranking as JSON")
    args = ap.parse_args()

    grid = {}
    if args.d_list:
        grid["d"] = _ints(args.d_list)
    if args.q_bits_list:
        by_bits = {q.bit_length(): q for q in SWEEP_GRID["q"]}
        try:
            grid["q"] = [by_bits[b] for b in _ints(args.q_bits_list)]
        except KeyError as e:
            ap.error(f"no grid modulus with bit length {e.args[0]}")
    if args.t_list:
        grid["t"] = _ints(args.t_list)
    if args.b_list:
        grid["b"] = _ints(args.b_list)
    if args.ni_list:
        grid["n_i"] = _ints(args.ni_list)
    if args.nf_list:
        grid["n_f"] = _ints(args.nf_list)

    dataset = harness.gen_pairs(args.n_pairs, seed=args.seed, min_gap=args.min_gap)
    result = harness.sweep(
        grid or None, r=args.r, variant=args.variant, dataset=dataset,
        seed=args.seed, allow_nonstandard=args.allow_nonstandard,
    )

    ranked, skipped = result["ranked"], result["skipped"]
    print(
        f"{len(ranked)} combinations ranked, {len(skipped)} skipped "
        f"(r={args.r}, {args.variant}, {args.n_pairs} pairs)"
    )
    print(f"{'rank':>4} {'d':>6} {'q bits':>6} {'t':>6} {'b':>3} "
          f"{'n_i':>4} {'n_f':>4} {'MAE(oracle)':>12} {'failed':>7}")
    for i, row in enumerate(ranked[: args.top], start=1):
        sch, enc = row["scheme"], row["encoding"]
        print(
            f"{i:>4} {sch['d']:>6} {int(sch['q'], 16).bit_length():>6} "
            f"{sch['t']:>6} {enc['b']:>3} {enc['n_i']:>4} {enc['n_f']:>4} "
            f"{row['mae_weights']:>12.4g} "
            f"{row['failed_instances']:>4}/{row['n_instances']}"
        )
    for row in skipped[:5]:
        print(f"skipped: {row['reason']}")
    if len(skipped) > 5:
        print(f"... and {len(skipped) - 5} more skipped")

    if args.out:
        with open(args.out, "w") as f:
            json.dump(result, f, indent=2)
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
