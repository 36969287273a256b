"""Batch experiment runner with analytic-vs-empirical verification.

Rounds are executed in fixed chunks of 2**16; every chunk derives its own
random stream from (seed, chunk index), so the merged tallies are
identical no matter how many workers execute the chunks or in which
order.  Each tallied rate is reported with a 95% Wilson interval and,
where a closed form exists, gated PASS/FAIL against the prediction using
a 5-sigma Wilson band (wide enough to be flake-free at a million rounds).
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

from . import rng as _rng
from .attacks import NO_ATTACK, AttackParams, make_strategy
from .protocol import ProtocolConfig, Tallies, run_round_bb84, run_round_lm05, tally

CHUNK_ROUNDS = 1 << 16
RATE_NAMES = ("q1", "q_ab", "q_ae", "q_be")

_GATE_Z = 5.0   # verdict band
_CI_Z = 1.959963984540054  # two-sided 95%


@dataclass(frozen=True)
class RateReport:
    name: str
    errors: int
    trials: int
    estimate: Optional[float]
    lo95: Optional[float]
    hi95: Optional[float]
    prediction: Optional[float]
    verdict: Optional[str]  # PASS/FAIL, None when skipped


@dataclass(frozen=True)
class BatchReport:
    config: ProtocolConfig
    attack: AttackParams
    rounds: int
    seed: int
    workers: int
    tallies: Tallies
    rates: tuple[RateReport, ...]
    elapsed_s: float


def wilson_interval(errors: int, trials: int, z: float = _CI_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion; always inside [0, 1]."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = errors / trials
    z2n = z * z / trials
    denom = 1.0 + z2n
    center = (p + z2n / 2.0) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials))
    return max(0.0, center - half), min(1.0, center + half)


def predicted_rates(protocol: str, attack: AttackParams) -> dict[str, Optional[float]]:
    """Closed-form expectations for each tallied rate; None = no prediction.

    q1 and q_ab average over all (matched / revealed) rounds, so they scale
    with the attacked fraction xi; q_ae and q_be are conditioned on the
    rounds where Eve actually guessed, so they do not.
    """
    kind = attack.kind
    xi = attack.xi
    none = {name: None for name in RATE_NAMES}
    if protocol == "bb84":
        if kind == "none":
            return {**none, "q1": 0.0}
        if kind == "ir":
            return {**none, "q1": 0.25 * xi, "q_be": 0.25 if xi > 0 else None}
        raise ValueError(f"attack {kind!r} is not defined for bb84")
    if kind == "none":
        return {**none, "q1": 0.0, "q_ab": 0.0}
    guessed = xi > 0
    if kind == "ir":
        return {"q1": 0.25 * xi, "q_ab": 0.25 * xi,
                "q_ae": 0.0 if guessed else None, "q_be": 0.25 if guessed else None}
    if kind == "nort":
        p = (1.0 - math.sin(attack.x)) / 2.0
        pp = (1.0 - math.sin(attack.x_prime)) / 2.0
        copy_exact = abs(attack.x_prime - math.pi / 2) < 1e-9
        return {"q1": xi * (1.0 - math.cos(attack.x)) / 4.0,
                # misaligned backward copy fully scrambles Bob's outcome
                "q_ab": 0.25 * xi if copy_exact else None,
                "q_ae": (p * (1.0 - pp) + (1.0 - p) * pp) if guessed else None,
                "q_be": (2.0 - math.sin(attack.x)) / 4.0 if (guessed and copy_exact) else None}
    chi = attack.chi if kind == "dcnot_star" else 0.0
    return {"q1": 0.25 * xi, "q_ab": chi * xi,
            "q_ae": 0.0 if guessed else None, "q_be": 0.0 if guessed else None}


def _run_chunk(config: ProtocolConfig, attack: AttackParams,
               chunk_index: int, count: int, seed: int) -> Tallies:
    stream = _rng.stream(seed, chunk_index)
    strategy = make_strategy(attack)
    round_fn = run_round_lm05 if config.protocol == "lm05" else run_round_bb84
    return tally(round_fn(config, strategy, stream) for _ in range(count))


def run_batch(config: ProtocolConfig, attack: AttackParams = NO_ATTACK,
              n: Optional[int] = None, seed: Optional[int] = None,
              workers: int = 1) -> BatchReport:
    """Run n rounds under the attack and gate the tallies against predictions."""
    n = config.rounds if n is None else n
    seed = config.seed if seed is None else seed
    if n < 1:
        raise ValueError("n must be >= 1")
    predictions = predicted_rates(config.protocol, attack)  # validates the combo
    started = time.perf_counter()
    chunks = [(i, min(CHUNK_ROUNDS, n - i * CHUNK_ROUNDS))
              for i in range((n + CHUNK_ROUNDS - 1) // CHUNK_ROUNDS)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, *zip(*[(config, attack, i, c, seed) for i, c in chunks])))
    else:
        parts = [_run_chunk(config, attack, i, c, seed) for i, c in chunks]
    total = Tallies()
    for part in parts:
        total = total + part
    elapsed = time.perf_counter() - started

    rates = []
    for name in RATE_NAMES:
        errors, trials = getattr(total, name)
        prediction = predictions[name]
        if trials == 0:
            rates.append(RateReport(name, errors, trials, None, None, None, prediction, None))
            continue
        lo95, hi95 = wilson_interval(errors, trials)
        verdict = None
        if prediction is not None:
            glo, ghi = wilson_interval(errors, trials, z=_GATE_Z)
            verdict = "PASS" if glo - 1e-15 <= prediction <= ghi + 1e-15 else "FAIL"
        rates.append(RateReport(name, errors, trials, errors / trials, lo95, hi95, prediction, verdict))
    return BatchReport(config=config, attack=attack, rounds=n, seed=seed, workers=workers,
                       tallies=total, rates=tuple(rates), elapsed_s=elapsed)


def failures(report: BatchReport) -> list[str]:
    return [r.name for r in report.rates if r.verdict == "FAIL"]


def compare(report: BatchReport) -> int:
    """Exit status: 0 iff every gated rate passed (skipped rates do not fail)."""
    return 1 if failures(report) else 0


def report_text(report: BatchReport) -> str:
    cfg, atk = report.config, report.attack
    lines = [
        f"protocol={cfg.protocol} attack={atk.kind} xi={atk.xi:g} x={atk.x:g} "
        f"x_prime={atk.x_prime:g} chi={atk.chi:g}",
        f"rounds={report.rounds} seed={report.seed} workers={report.workers} "
        f"c={cfg.control_prob:g} reveal={cfg.reveal_fraction:g} elapsed={report.elapsed_s:.2f}s",
        f"{'rate':<6} {'errors':>9} {'trials':>9} {'estimate':>10} {'95% interval':>23} "
        f"{'predicted':>10} verdict",
    ]
    for r in report.rates:
        est = f"{r.estimate:.6f}" if r.estimate is not None else "-"
        ci = f"[{r.lo95:.6f}, {r.hi95:.6f}]" if r.lo95 is not None else "-"
        pred = f"{r.prediction:.6f}" if r.prediction is not None else "-"
        lines.append(f"{r.name:<6} {r.errors:>9} {r.trials:>9} {est:>10} {ci:>23} "
                     f"{pred:>10} {r.verdict or 'skip'}")
    return "\n".join(lines)


def report_rows(report: BatchReport) -> list[dict]:
    return [asdict(r) for r in report.rates]


def write_report(report: BatchReport, file, fmt: str = "csv") -> None:
    """Machine-readable report: one record per rate (jsonl adds a meta record)."""
    rows = report_rows(report)
    if fmt == "jsonl":
        meta = {"record": "meta", "protocol": report.config.protocol,
                "attack": asdict(report.attack), "rounds": report.rounds,
                "seed": report.seed, "workers": report.workers,
                "elapsed_s": report.elapsed_s}
        file.write(json.dumps(meta) + "\n")
        for row in rows:
            file.write(json.dumps({"record": "rate", **row}) + "\n")
        return
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    import csv as _csv

    writer = _csv.writer(file, lineterminator="\n")
    writer.writerow(["rate", "errors", "trials", "estimate", "lo95", "hi95", "prediction", "verdict"])
    for row in rows:
        writer.writerow([row["name"], row["errors"], row["trials"],
                         "" if row["estimate"] is None else repr(row["estimate"]),
                         "" if row["lo95"] is None else repr(row["lo95"]),
                         "" if row["hi95"] is None else repr(row["hi95"]),
                         "" if row["prediction"] is None else repr(row["prediction"]),
                         row["verdict"] or ""])
