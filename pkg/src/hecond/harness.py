"""Evaluation harness: datasets, accuracy metrics, table regressions,
encrypted end-to-end runs, and parameter sweeps, all emitting versioned
JSON reports.

Accuracy is reported two ways per run: against the oracle circuit (the same
comparison/selection circuit on doubles -- isolates encoding and noise
effects) and against the ideal limit weights (the Heaviside-style targets
the iteration converges to -- includes the approximation error and matches
the published aggregates).
"""

from __future__ import annotations

import itertools
import logging
import random
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Sequence

from . import comparator, fv
from .comparator import ComparatorConfig, OracleBackend, depth_estimate, ideal_weight
from .encoder import EncodingParams, decode, encoding_error_bound
from .kernels import heaviside_ref
from .presets import SWEEP_GRID, Preset, get_preset
from .ring import RingParams
from .serialize import encoding_to_dict, scheme_to_dict

log = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1

DATA_RANGE = 0.12  # comparison inputs are normalised into [-0.12, 0.12]

# Wall-clock timings are recorded for information only and are NEVER
# asserted against the published per-instance timings (17.4-31.5 s on the
# original hardware): machines differ.  Multiplication-depth and operation
# counters are the asserted performance proxy instead.
TIMING_POLICY = (
    "timings recorded, never asserted; depth and operation counters are "
    "the performance proxy"
)

# Published mean-absolute-error rows for the oracle iteration on the grid
# x = 0.05*s, s in [-4, 4] excluding the tie point x = 0 (the printed rows
# match the tie-free grid).
TABLE1_GRID = tuple(0.05 * s for s in range(-4, 5) if s != 0)
TABLE1_REFERENCE = {
    "gt_half": (0.38, 0.28, 0.15, 0.062, 0.027, 0.017, 0.026, 0.019),
    "gt": (0.47, 0.39, 0.22, 0.10, 0.056, 0.034, 0.051, 0.036),
}

# Published encrypted aggregates at r=3 on random pairs (weight MAE and
# scaled-output MAE against the ideal weights), for report context.
ENCRYPTED_REFERENCE_R3 = {
    "gt_half": (0.26, 0.021),
    "gt": (0.41, 0.023),
    "eq": (0.52, 0.057),
}


class InfeasibleParamsError(ValueError):
    """Parameter combination cannot work (independent of any data)."""


@dataclass(frozen=True)
class PairDataset:
    pairs: tuple[tuple[float, float], ...]
    seed: int | None = None
    min_gap: float | None = None


def gen_pairs(n: int, seed: int, min_gap: float | None = None) -> PairDataset:
    """n uniform pairs in [-0.12, 0.12]^2, rejection-sampled to keep
    |x1 - x2| >= min_gap when set.  Deterministic per seed."""
    if n < 1:
        raise ValueError(f"need at least one pair, got {n}")
    if min_gap is not None and min_gap >= 2 * DATA_RANGE:
        raise InfeasibleParamsError(
            f"min_gap {min_gap} is unreachable inside [-{DATA_RANGE}, {DATA_RANGE}]"
        )
    rng = random.Random(seed)
    pairs = []
    while len(pairs) < n:
        x1 = rng.uniform(-DATA_RANGE, DATA_RANGE)
        x2 = rng.uniform(-DATA_RANGE, DATA_RANGE)
        if min_gap is not None and abs(x1 - x2) < min_gap:
            continue
        pairs.append((x1, x2))
    return PairDataset(tuple(pairs), seed, min_gap)


def validate_pairs(ds: PairDataset) -> None:
    for x1, x2 in ds.pairs:
        if abs(x1) > DATA_RANGE or abs(x2) > DATA_RANGE:
            raise ValueError(
                f"pair ({x1}, {x2}) outside the normalised range "
                f"[-{DATA_RANGE}, {DATA_RANGE}]"
            )
        if ds.min_gap is not None and abs(x1 - x2) < ds.min_gap:
            raise ValueError(f"pair ({x1}, {x2}) violates min_gap {ds.min_gap}")


def save_pairs(path, ds: PairDataset) -> None:
    with open(path, "w") as f:
        f.write(f"# seed={ds.seed} min_gap={ds.min_gap}\n")
        for x1, x2 in ds.pairs:
            f.write(f"{x1!r} {x2!r}\n")


def load_pairs(path) -> PairDataset:
    """Newline-delimited decimal pairs; '#' starts a comment."""
    pairs = []
    seed = None
    min_gap = None
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            body, _, comment = line.partition("#")
            if comment.strip().startswith("seed="):
                for tok in comment.split():
                    key, _, val = tok.partition("=")
                    if key == "seed" and val not in ("None", ""):
                        seed = int(val)
                    if key == "min_gap" and val not in ("None", ""):
                        min_gap = float(val)
            body = body.strip()
            if not body:
                continue
            parts = body.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two reals, got {body!r}")
            pairs.append((float(parts[0]), float(parts[1])))
    if not pairs:
        raise ValueError(f"{path}: no pairs found")
    ds = PairDataset(tuple(pairs), seed, min_gap)
    validate_pairs(ds)
    return ds


def mae(expected: Sequence[float], actual: Sequence[float]) -> float:
    if len(expected) != len(actual) or not expected:
        raise ValueError("mae needs two equal-length nonempty sequences")
    return sum(abs(x - y) for x, y in zip(expected, actual)) / len(expected)


def simple_error(x: float, r: int) -> float:
    """H(x) minus the oracle gt_half weight of (x, 0)."""
    res = comparator.select_gt_half(x, 0.0, ComparatorConfig(r), OracleBackend())
    return heaviside_ref(x) - res.weight_first


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def run_table1(r_values: Iterable[int] = range(1, 9)) -> dict:
    """Oracle-backend MAE rows for the gt_half and gt weights over the
    reference grid, with the published rows for comparison."""
    r_values = list(r_values)
    if not r_values:
        raise ValueError("need at least one iteration count")
    ob = OracleBackend()
    rows = []
    for r in r_values:
        expected = [heaviside_ref(x) for x in TABLE1_GRID]
        row = {"r": r}
        for variant in ("gt_half", "gt"):
            cfg = ComparatorConfig(r, variant)
            actual = [
                comparator.select(x, 0.0, cfg, ob).weight_first for x in TABLE1_GRID
            ]
            row[f"mae_{variant}"] = mae(expected, actual)
            ref = TABLE1_REFERENCE[variant]
            row[f"reference_{variant}"] = ref[r - 1] if r <= len(ref) else None
        rows.append(row)
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "kind": "table1",
        "grid": list(TABLE1_GRID),
        "rows": rows,
        "timestamp": _timestamp(),
    }


def simple_error_csv(r_values: Iterable[int] = (1, 2, 3, 4), n_points: int = 81) -> str:
    """Per-point simple-error columns over x in [-0.20, 0.20] as CSV text
    (for external plotting)."""
    r_values = list(r_values)
    lines = ["x," + ",".join(f"r{r}" for r in r_values)]
    for i in range(n_points):
        x = -0.20 + 0.40 * i / (n_points - 1)
        vals = ",".join(f"{simple_error(x, r):.6g}" for r in r_values)
        lines.append(f"{x:.6g},{vals}")
    return "\n".join(lines) + "\n"


@dataclass
class EvalReport:
    """Accuracy report for one (parameters, variant, r, dataset) run."""

    preset: str
    variant: str
    r: int
    backend: str
    n_instances: int
    seed: int | None
    min_gap: float | None
    fail_threshold: float
    mae_weights: float
    mae_scaled: float
    mae_weights_ideal: float
    mae_scaled_ideal: float
    max_error_weights: float
    failed_instances: int
    unit_error_instances: int
    success: bool
    depth_weight: dict
    depth_scaled: dict
    depth_matches_estimate: bool | None
    seconds_per_instance: float
    scheme: dict
    encoding: dict
    reference: dict | None = None
    instances: list = field(default_factory=list)
    schema_version: int = REPORT_SCHEMA_VERSION
    kind: str = "eval"
    timestamp: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


_REQUIRED_REPORT_FIELDS = {
    "schema_version": int,
    "kind": str,
    "preset": str,
    "variant": str,
    "r": int,
    "backend": str,
    "n_instances": int,
    "fail_threshold": float,
    "mae_weights": float,
    "mae_scaled": float,
    "mae_weights_ideal": float,
    "mae_scaled_ideal": float,
    "failed_instances": int,
    "success": bool,
    "seconds_per_instance": float,
    "scheme": dict,
    "encoding": dict,
    "instances": list,
    "timestamp": str,
}


def validate_report(report: dict) -> None:
    """Check an eval report against the versioned schema; raises ValueError."""
    if report.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise ValueError(
            f"unsupported schema version {report.get('schema_version')!r}"
        )
    for key, typ in _REQUIRED_REPORT_FIELDS.items():
        if key not in report:
            raise ValueError(f"report missing field {key!r}")
        if not isinstance(report[key], typ):
            raise ValueError(
                f"report field {key!r} has type {type(report[key]).__name__}, "
                f"expected {typ.__name__}"
            )
    for fname in ("mae_weights", "mae_scaled", "mae_weights_ideal", "mae_scaled_ideal"):
        if report[fname] < 0:
            raise ValueError(f"report field {fname!r} must be nonnegative")


def run_encrypted_eval(
    preset: str | Preset,
    variant: str,
    r: int,
    dataset: PairDataset,
    *,
    backend: str = "encrypted",
    seed: int = 0,
    fail_threshold: float | None = None,
    keys: fv.KeySet | None = None,
    keep_instances: bool = True,
    scheme: fv.SchemeParams | None = None,
    encoding: EncodingParams | None = None,
    label: str | None = None,
) -> EvalReport:
    """Full pipeline per pair: encode, encrypt, circuit, decrypt, decode.

    backend "encrypted" runs FV ciphertexts; "simulate" runs the exact
    plaintext-ring arithmetic (identical digit behaviour, no ring noise) and
    is orders of magnitude faster -- the parameter sweep's default.

    Per-instance failure flags: budget_ok (every output's noise budget
    positive) and error_ok (worst deviation from the oracle circuit within
    fail_threshold, default 10x the encoding truncation bound -- far
    stricter than "decodes to garbage").  Failures are reported, never
    raised, mirroring the silent-failure behaviour of decryption itself.
    """
    if scheme is None or encoding is None:
        p = get_preset(preset) if isinstance(preset, str) else preset
        scheme, encoding = p.scheme, p.encoding
        label = label or p.name
    label = label or "custom"
    if backend not in ("encrypted", "simulate"):
        raise ValueError(f"unknown backend {backend!r}")
    validate_pairs(dataset)
    if fail_threshold is None:
        fail_threshold = 10 * encoding_error_bound(encoding)
    cfg = ComparatorConfig(r, variant)
    ob = OracleBackend()

    sk = None
    if backend == "encrypted":
        if keys is None:
            keys = fv.keygen(scheme, random.Random(f"{seed}:{label}:keygen"))
        sk = keys.sk
        be = comparator.EncryptedBackend(
            keys, encoding, random.Random(f"{seed}:{label}:{variant}:{r}:enc")
        )
    else:
        be = comparator.PlainRingBackend(encoding)

    err_w_all, err_s_all, err_wi_all, err_si_all = [], [], [], []
    instances = []
    failed = 0
    unit_errors = 0
    depth_weight_ct = depth_weight_plain = depth_scaled_ct = None
    total_seconds = 0.0
    for x1, x2 in dataset.pairs:
        t0 = time.perf_counter()
        res = comparator.select(be.inject(x1), be.inject(x2), cfg, be)
        outputs = {
            "weights": (res.weight_first, res.weight_second),
            "scaled": (res.scaled_first, res.scaled_second),
        }
        decoded = {}
        min_budget = None
        if backend == "encrypted":
            budgets = []
            for key, pair in outputs.items():
                vals = []
                for ct in pair:
                    pt, budget = fv.decrypt_with_budget(sk, ct)
                    budgets.append(budget)
                    vals.append(decode(pt, encoding))
                decoded[key] = vals
            min_budget = min(budgets)
            depth_weight_ct = res.weight_first.mult_depth
            depth_weight_plain = res.weight_first.plain_mult_count
            depth_scaled_ct = res.scaled_first.mult_depth
        else:
            for key, pair in outputs.items():
                decoded[key] = [be.extract(v) for v in pair]
        seconds = time.perf_counter() - t0
        total_seconds += seconds

        ores = comparator.select(x1, x2, cfg, ob)
        oracle_w = (ores.weight_first, ores.weight_second)
        oracle_s = (ores.scaled_first, ores.scaled_second)
        ideal_w = (ideal_weight(variant, x1, x2), ideal_weight(variant, x2, x1))
        ideal_s = (ideal_w[0] * x1, ideal_w[1] * x2)

        ew = [abs(a - b) for a, b in zip(decoded["weights"], oracle_w)]
        es = [abs(a - b) for a, b in zip(decoded["scaled"], oracle_s)]
        err_w_all += ew
        err_s_all += es
        err_wi_all += [abs(a - b) for a, b in zip(decoded["weights"], ideal_w)]
        err_si_all += [abs(a - b) for a, b in zip(decoded["scaled"], ideal_s)]

        budget_ok = min_budget is None or min_budget > 0
        worst = max(ew + es)
        error_ok = worst <= fail_threshold
        if not (budget_ok and error_ok):
            failed += 1
        if worst > 1.0:
            unit_errors += 1
        if keep_instances:
            instances.append(
                {
                    "x1": x1,
                    "x2": x2,
                    "gap": abs(x1 - x2),
                    "weights": list(decoded["weights"]),
                    "weights_oracle": list(oracle_w),
                    "weights_ideal": list(ideal_w),
                    "scaled": list(decoded["scaled"]),
                    "scaled_oracle": list(oracle_s),
                    "errors_weights": ew,
                    "errors_scaled": es,
                    "min_budget": min_budget,
                    "budget_ok": budget_ok,
                    "error_ok": error_ok,
                    "seconds": seconds,
                }
            )

    est = depth_estimate(variant, r)
    if backend == "encrypted":
        depth_weight = {"ct_muls": depth_weight_ct, "plain_muls": depth_weight_plain}
        depth_scaled = {"ct_muls": depth_scaled_ct, "plain_muls": depth_weight_plain}
        matches = (depth_weight_ct, depth_weight_plain) == est and (
            depth_scaled_ct == est[0] + 1
        )
    else:
        depth_weight = {"ct_muls": est[0], "plain_muls": est[1], "estimated": True}
        depth_scaled = {"ct_muls": est[0] + 1, "plain_muls": est[1], "estimated": True}
        matches = None

    ref = None
    if r == 3 and variant in ENCRYPTED_REFERENCE_R3 and dataset.min_gap is None:
        mw, ms = ENCRYPTED_REFERENCE_R3[variant]
        ref = {"mae_weights_ideal": mw, "mae_scaled_ideal": ms}

    return EvalReport(
        preset=label,
        variant=variant,
        r=r,
        backend=backend,
        n_instances=len(dataset.pairs),
        seed=dataset.seed,
        min_gap=dataset.min_gap,
        fail_threshold=fail_threshold,
        mae_weights=sum(err_w_all) / len(err_w_all),
        mae_scaled=sum(err_s_all) / len(err_s_all),
        mae_weights_ideal=sum(err_wi_all) / len(err_wi_all),
        mae_scaled_ideal=sum(err_si_all) / len(err_si_all),
        max_error_weights=max(err_w_all),
        failed_instances=failed,
        unit_error_instances=unit_errors,
        success=failed == 0,
        depth_weight=depth_weight,
        depth_scaled=depth_scaled,
        depth_matches_estimate=matches,
        seconds_per_instance=total_seconds / len(dataset.pairs),
        scheme=scheme_to_dict(scheme),
        encoding=encoding_to_dict(encoding),
        reference=ref,
        instances=instances,
        timestamp=_timestamp(),
    )


def gap_binned_errors(report: EvalReport, bin_width: float = 0.03) -> list[dict]:
    """Mean weight error (vs the ideal weights) per |x1 - x2| bin."""
    bins: dict[int, list[float]] = {}
    for inst in report.instances:
        idx = int(inst["gap"] / bin_width)
        err = (
            abs(inst["weights"][0] - inst["weights_ideal"][0])
            + abs(inst["weights"][1] - inst["weights_ideal"][1])
        ) / 2
        bins.setdefault(idx, []).append(err)
    return [
        {
            "gap_lo": i * bin_width,
            "gap_hi": (i + 1) * bin_width,
            "mean_error": sum(v) / len(v),
            "count": len(v),
        }
        for i, v in sorted(bins.items())
    ]


def sweep(
    grid: dict | None = None,
    r: int = 3,
    variant: str = "gt_half",
    dataset: PairDataset | None = None,
    *,
    backend: str = "simulate",
    seed: int = 0,
    allow_nonstandard: bool = False,
    fail_threshold: float | None = None,
) -> dict:
    """Evaluate every parameter combination in the grid and rank by
    MAE(weights) against the oracle circuit (smallest first).

    The default backend is the exact plaintext-ring simulation: digit
    truncation and wrap -- the accuracy-determining effects -- are bit-exact
    there, while a full encrypted sweep over the published grid would take
    days.  Pass backend="encrypted" for the real pipeline.

    Combinations with n_i + n_f > d are skipped with a logged reason.
    """
    grid = dict(grid or SWEEP_GRID)
    unknown = set(grid) - set(SWEEP_GRID)
    if unknown:
        raise ValueError(f"unknown grid keys: {sorted(unknown)}")
    for key in SWEEP_GRID:
        grid.setdefault(key, SWEEP_GRID[key])
        if not allow_nonstandard:
            extra = set(grid[key]) - set(SWEEP_GRID[key])
            if extra:
                raise ValueError(
                    f"values {sorted(extra)} for {key!r} are outside the "
                    "published grid; pass allow_nonstandard=True to force"
                )
    if dataset is None:
        dataset = gen_pairs(20, seed)

    keys_order = ("d", "q", "t", "b", "n_i", "n_f")
    ranked = []
    skipped = []
    for combo in itertools.product(*(grid[k] for k in keys_order)):
        d, q, t, b, n_i, n_f = combo
        label = f"d{d}-q{q.bit_length()}b-t{t}-b{b}-ni{n_i}-nf{n_f}"
        if n_i + n_f > d:
            reason = f"n_i + n_f = {n_i + n_f} exceeds degree {d}"
            log.info("skipping %s: %s", label, reason)
            skipped.append({"combo": label, "reason": reason})
            continue
        scheme = fv.SchemeParams(RingParams(d, q), t, security_note="sweep")
        encoding = EncodingParams(b, n_i, n_f, d, t)
        report = run_encrypted_eval(
            None,
            variant,
            r,
            dataset,
            backend=backend,
            seed=seed,
            fail_threshold=fail_threshold,
            keep_instances=False,
            scheme=scheme,
            encoding=encoding,
            label=label,
        )
        entry = report.to_dict()
        entry.pop("instances")
        ranked.append(entry)
    ranked.sort(key=lambda e: (e["mae_weights"], e["preset"]))
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "kind": "sweep",
        "r": r,
        "variant": variant,
        "backend": backend,
        "n_pairs": len(dataset.pairs),
        "seed": dataset.seed,
        "ranked": ranked,
        "skipped": skipped,
        "timestamp": _timestamp(),
    }
