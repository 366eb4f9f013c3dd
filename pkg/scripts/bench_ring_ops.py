"""Wall-clock timings for the polynomial multiplication routes and the
encrypted pipeline stages on the current machine.

Timings are informational only: no published figure is asserted anywhere,
and machine-independent comparisons should use the depth and operation
counters instead (see hecond.harness.TIMING_POLICY).
"""

import argparse
import json
import random
import sys
import time

from hecond import fv, harness
from hecond.comparator import ComparatorConfig, EncryptedBackend, select
from hecond.encoder import encode
from hecond.presets import Q435, get_preset
from hecond.ring import RingParams, ring_mul, sample_uniform


def _time(fn, reps: int) -> float:
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d-list", default="1024,4096,16384",
                    help="ring degrees for the route comparison")
    ap.add_argument("--preset", default="paper-r3",
                    help="preset for the pipeline timings")
    ap.add_argument("--r", type=int, default=3)
    ap.add_argument("--reps", type=int, default=3, help="best-of repetitions")
    ap.add_argument("--skip-pipeline", action="store_true")
    ap.add_argument("--out", help="write timings as JSON")
    args = ap.parse_args()

    rng = random.Random(0)
    results = {"mul_routes": [], "pipeline": {}, "policy": harness.TIMING_POLICY}

    print(f"ring multiplication, modulus 2^435-ish, best of {args.reps}")
    print(f"{'d':>6} {'schoolbook':>11} {'kronecker':>10} {'ntt':>10}")
    for d in (int(v) for v in args.d_list.split(",")):
        params = RingParams(d, Q435)
        a, b = sample_uniform(params, rng), sample_uniform(params, rng)
        row = {"d": d}
        for path in ("schoolbook", "kronecker", "ntt"):
            if path == "schoolbook" and d > 2048:
                row[path] = None  # quadratic route, minutes at this degree
                continue
            row[path] = _time(lambda: ring_mul(a, b, path), args.reps)
        results["mul_routes"].append(row)
        cells = [
            f"{row[p]:>9.3f}s" if row[p] is not None else f"{'-':>10}"
            for p in ("schoolbook", "kronecker", "ntt")
        ]
        print(f"{d:>6} {cells[0]:>11} {cells[1]:>10} {cells[2]:>10}")

    if not args.skip_pipeline:
        preset = get_preset(args.preset)
        print(f"\npipeline stages, {preset.name}")
        t0 = time.perf_counter()
        keys = fv.keygen(preset.scheme, rng)
        results["pipeline"]["keygen"] = time.perf_counter() - t0
        pt = encode(0.05, preset.encoding)
        results["pipeline"]["encrypt"] = _time(
            lambda: fv.encrypt(keys.pk, pt, rng), args.reps)
        ct = fv.encrypt(keys.pk, pt, rng)
        results["pipeline"]["decrypt"] = _time(lambda: fv.decrypt(keys.sk, ct), args.reps)
        results["pipeline"]["mul_relin"] = _time(
            lambda: fv.eval_mul(ct, ct, keys.rlk), args.reps)
        be = EncryptedBackend(keys, preset.encoding, rng)
        cfg = ComparatorConfig(args.r, "gt_half")
        t0 = time.perf_counter()
        select(be.inject(0.05), be.inject(-0.03), cfg, be)
        results["pipeline"][f"select_r{args.r}"] = time.perf_counter() - t0
        for name, seconds in results["pipeline"].items():
            print(f"  {name:<12} {seconds:>8.3f}s")

    print(f"\nnote: {harness.TIMING_POLICY}")
    if args.out:
        with open(args.out, "w") as f:
            json.dump(results, f, indent=2)
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
