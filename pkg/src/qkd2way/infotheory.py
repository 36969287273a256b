"""Closed-form information accounting and security thresholds.

Alice-Bob mutual information is the binary-channel value
I_AB = 1 - H(Q_AB); Eve's information is expressed as a function of the
forward-channel QBER q1 through the per-attack curves below.  The secrecy
capacities are the Csiszar-Korner differences

    C_DR = I_AB - I_AE      (direct reconciliation)
    C_RR = I_AB - I_BE      (reverse reconciliation)

and a protocol is secure at q1 as long as at least one capacity is
positive.  The relation between Q_AB and q1 is a modeling choice: the
"identified" noise model sets Q_AB = q1 (two-way channels controlled to
the same precision as one-way ones); a "fixed" model pins Q_AB to a
constant.

Eve curves (q1 domains in brackets):

* ``ir``         [0, 1/4]: the attacked fraction is xi = 4 q1, Eve learns
  Alice's bit exactly on attacked rounds, so I_AE = xi, and her key-bit
  error is 1/4 there, so I_BE = (1 - H(1/4)) xi.
* ``nort``       [0, 1/4]: invert q1 = (1 - cos x)/4, then
  I_AE = 1 - H((1 - sin x)/2) and I_BE = 1 - H((2 - sin x)/4).
* ``dcnot_star`` [0, 1/4]: I_AE = I_BE = xi = 4 q1.
* ``generic``    [0, 1/2]: the individual-attack bound
  -(1-q1) log2(1-q1) - q1 log2(q1/3), clamped to one bit; the reverse
  direction is exposed for convenience but the bound is only meaningful
  for direct reconciliation.
* ``bb84_ir``    [0, 1/4]: I = 2 q1 (half a bit at q1 = 1/4).
* ``bb84_opt``   [0, 1/2]: optimal individual attack,
  I = 1 - H(1/2 + sqrt(q1 (1 - q1))); its threshold is (1 - 1/sqrt 2)/2.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .numerics import bisect_first_zero

EVE_MODELS = ("ir", "nort", "dcnot_star", "generic", "bb84_ir", "bb84_opt")

_DOMAIN_MAX = {
    "ir": 0.25,
    "nort": 0.25,
    "dcnot_star": 0.25,
    "generic": 0.5,
    "bb84_ir": 0.25,
    "bb84_opt": 0.5,
}
_DOMAIN_EPS = 1e-12
_CAPACITY_TOL = 1e-12
_LOG2_3 = math.log2(3.0)


@dataclass(frozen=True)
class NoiseModel:
    """Relation between the announced-round QBER Q_AB and the control QBER q1."""

    kind: str = "identified"   # "identified": Q_AB = q1; "fixed": Q_AB = value
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("identified", "fixed"):
            raise ValueError(f"unknown noise model kind {self.kind!r}")
        if self.kind == "fixed" and not 0.0 <= self.value <= 0.5:
            raise ValueError("fixed Q_AB must lie in [0, 0.5]")

    def q_ab(self, q1: float) -> float:
        return q1 if self.kind == "identified" else self.value


IDENTIFIED = NoiseModel("identified")


@dataclass(frozen=True)
class InfoPoint:
    q1: float
    i_ab: float
    i_ae: float
    i_be: float
    c_dr: float
    c_rr: float


def binary_entropy(p: float) -> float:
    """Shannon entropy of a bit in bits, with 0 log 0 = 0."""
    if not -_DOMAIN_EPS <= p <= 1.0 + _DOMAIN_EPS:
        raise ValueError(f"probability out of range: {p!r}")
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def generic_bound(q1: float, clamp: bool = True) -> float:
    """Individual-attack information bound; exceeds one bit above ~18.9%."""
    if q1 <= 0.0:
        return 0.0
    # -(1-q)log2(1-q) - q log2(q/3), with the quotient expanded so that
    # subnormal q1 cannot underflow inside the logarithm
    v = -(1.0 - q1) * math.log2(1.0 - q1) - q1 * (math.log2(q1) - _LOG2_3)
    return min(v, 1.0) if clamp else v


def _check_domain(attack: str, q1: float) -> float:
    if attack not in EVE_MODELS:
        raise ValueError(f"unknown eve curve {attack!r}; expected one of {EVE_MODELS}")
    dmax = _DOMAIN_MAX[attack]
    if not -_DOMAIN_EPS <= q1 <= dmax + _DOMAIN_EPS:
        raise ValueError(f"q1={q1!r} outside [0, {dmax}] for {attack}")
    return min(max(q1, 0.0), dmax)


def eve_curves(attack: str, q1: float) -> tuple[float, float]:
    """Eve's (I_AE, I_BE) in bits per sifted symbol at forward QBER q1."""
    q1 = _check_domain(attack, q1)
    if attack == "ir":
        xi = 4.0 * q1
        return xi, (1.0 - binary_entropy(0.25)) * xi
    if attack == "nort":
        cos_x = 1.0 - 4.0 * q1
        sin_x = math.sqrt(max(0.0, 1.0 - cos_x * cos_x))
        i_ae = 1.0 - binary_entropy((1.0 - sin_x) / 2.0)
        i_be = 1.0 - binary_entropy((2.0 - sin_x) / 4.0)
        return i_ae, i_be
    if attack == "dcnot_star":
        xi = 4.0 * q1
        return xi, xi
    if attack == "generic":
        b = generic_bound(q1)
        return b, b
    if attack == "bb84_ir":
        return 2.0 * q1, 2.0 * q1
    # bb84_opt
    i = 1.0 - binary_entropy(0.5 + math.sqrt(q1 * (1.0 - q1)))
    return i, i


def secrecy(q1: float, attack: str, model: NoiseModel = IDENTIFIED) -> InfoPoint:
    """Full information point at q1: I_AB from the noise model, capacities as differences."""
    i_ae, i_be = eve_curves(attack, q1)
    i_ab = 1.0 - binary_entropy(model.q_ab(q1))
    return InfoPoint(q1=q1, i_ab=i_ab, i_ae=i_ae, i_be=i_be,
                     c_dr=i_ab - i_ae, c_rr=i_ab - i_be)


def threshold(attack: str, reconciliation: str = "dr",
              model: NoiseModel = IDENTIFIED, tol: float = 1e-6) -> Optional[float]:
    """q1 where the chosen secrecy capacity first reaches zero.

    Returns None when the capacity stays strictly positive over the whole
    attack domain (secure everywhere).  The capacity must be positive at
    q1 = 0 and is assumed monotone, so plain bisection suffices.
    """
    if reconciliation not in ("dr", "rr"):
        raise ValueError("reconciliation must be 'dr' or 'rr'")
    dmax = _DOMAIN_MAX[attack]

    def capacity(q1: float) -> float:
        p = secrecy(q1, attack, model)
        return p.c_dr if reconciliation == "dr" else p.c_rr

    if capacity(0.0) <= 0.0:
        raise ValueError("capacity not positive at q1 = 0; nothing to bound")
    if capacity(dmax) > _CAPACITY_TOL:
        return None
    return bisect_first_zero(capacity, 0.0, dmax, tol=tol)


def generic_full_information_point(tol: float = 1e-9) -> float:
    """q1 above which the unclamped generic bound exceeds one bit."""
    return bisect_first_zero(lambda q: 1.0 - generic_bound(q, clamp=False), 1e-12, 0.5, tol=tol)


def curve_points(attack: str, model: NoiseModel = IDENTIFIED,
                 grid_step: float = 0.001) -> list[InfoPoint]:
    """Information curve sampled on a q1 grid over the attack's domain."""
    if grid_step <= 0.0:
        raise ValueError("grid_step must be positive")
    dmax = _DOMAIN_MAX[attack]
    points = []
    i = 0
    while True:
        q1 = i * grid_step
        if q1 > dmax + _DOMAIN_EPS:
            break
        points.append(secrecy(min(q1, dmax), attack, model))
        i += 1
    return points


CURVE_COLUMNS = ("q1", "I_AB", "I_AE", "I_BE", "C_DR", "C_RR")


def write_curves_csv(points: Sequence[InfoPoint], file: io.TextIOBase) -> None:
    writer = csv.writer(file, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for p in points:
        writer.writerow([repr(v) for v in (p.q1, p.i_ab, p.i_ae, p.i_be, p.c_dr, p.c_rr)])
