"""Regenerate the accuracy tables.

Table 1: oracle-backend MAE of the half weight and the full weight against
the step function, over the reference grid, r = 1..8, next to the published
rows.  Table 2: per-variant aggregates at r = 3 on the full-size preset.

The encrypted table defaults to the exact plaintext-ring simulation, which
is digit-for-digit identical to the encrypted pipeline whenever the noise
budget stays positive (it does at r = 3); pass --backend encrypted for the
real thing (~18 s per pair per variant at full size).
"""

import argparse
import json
import random
import sys

from hecond import fv, harness
from hecond.comparator import VARIANTS
from hecond.presets import get_preset


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="paper-r3")
    ap.add_argument("--r", type=int, default=3, help="iterations for table 2")
    ap.add_argument("--n-pairs", type=int, default=20)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--backend", choices=("simulate", "encrypted"), default="simulate")
    ap.add_argument("--out", help="write both tables as JSON")
    args = ap.parse_args()

    t1 = harness.run_table1(range(1, 9))
    print("table 1: oracle MAE vs step function (published values in parens)")
    print(f"{'r':>3} {'gt_half':>10} {'published':>10} {'gt':>10} {'published':>10}")
    for row in t1["rows"]:
        print(
            f"{row['r']:>3} {row['mae_gt_half']:>10.4f} "
            f"({row['reference_gt_half']:>7.4f}) {row['mae_gt']:>10.4f} "
            f"({row['reference_gt']:>7.4f})"
        )

    preset = get_preset(args.preset)
    keys = None
    if args.backend == "encrypted":
        keys = fv.keygen(preset.scheme, random.Random(f"{args.seed}:keygen"))
    ds = harness.gen_pairs(args.n_pairs, seed=args.seed)
    print(
        f"\ntable 2: {args.backend} aggregates, {preset.name}, r={args.r}, "
        f"{args.n_pairs} pairs, seed {args.seed}"
    )
    print(
        f"{'variant':>8} {'MAE(ideal)':>11} {'published':>10} "
        f"{'MAE(oracle)':>12} {'published':>10} {'failed':>7}"
    )
    reports = {}
    for variant in VARIANTS:
        rep = harness.run_encrypted_eval(
            preset, variant, args.r, ds,
            backend=args.backend, keys=keys, seed=args.seed, keep_instances=False,
        )
        reports[variant] = rep.to_dict()
        ref = harness.ENCRYPTED_REFERENCE_R3.get(variant)
        ref_ideal = f"{ref[0]:>10.3f}" if ref else " " * 10
        ref_oracle = f"{ref[1]:>10.3f}" if ref else " " * 10
        print(
            f"{variant:>8} {rep.mae_weights_ideal:>11.4f} {ref_ideal} "
            f"{rep.mae_weights:>12.4f} {ref_oracle} "
            f"{rep.failed_instances:>4}/{rep.n_instances}"
        )
    print(
        "\nMAE(ideal) is against the exact 0/1 limit weights (the published"
        "\nconvention); MAE(oracle) isolates encoding/encryption error from"
        "\nthe approximation's own distance to a true step."
    )

    if args.out:
        with open(args.out, "w") as f:
            json.dump({"table1": t1, "table2": reports}, f, indent=2)
        print(f"\nwrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
