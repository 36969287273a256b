"""Zero-QBER attack analysis for weak coherent pulse sources.

An attenuated laser emits n photons per pulse with Poisson probability
P_n(mu); multi-photon pulses leak information without adding noise.  Two
regimes are modeled:

Beam splitting (BS)
    Eve taps the beam with ideal detectors.  Against BB84 her expected
    information per pulse is I_E = mu (tap ratio ~ 1, clamped at one
    bit).  Against LM05 she needs a detection on both passes; with taps
    R1 on the forward and R2 on the backward path her success probability
    is (1 - exp(-R1 mu)) (1 - exp(-R2 (1-R1) mu)), maximized by R1 = 1/2,
    R2 = 1 at I_E = (1 - exp(-mu/2))^2.  The secure gain is the raw
    detection gain times (1 - I_E).

Photon-number splitting (PNS)
    Eve blocks weak pulses and exploits multi-photon ones with conclusive
    collective measurements (modeled by their success probabilities only).
    BB84 is broken by any n >= 2 pulse: P_PNS = 1 - e^-mu (1 + mu).  LM05
    needs n >= 3 and the conclusive measurement fires with probability
    1/2, so P_PNS = 1 - e^-mu (1 + mu + mu^2/2 + mu^3/12).  The link is
    secure while the raw gain exceeds the dangerous-pulse probability;
    the margin D = G_raw - P_PNS defines the security region.

Raw gains follow the link budget: G_raw = 1 - exp(-mu eta_d Gamma(L))
with Gamma^BB84 = Gamma_QC Gamma_B and, because the LM05 channel is
traversed twice and Alice's box twice, Gamma^LM05 = Gamma_QC^2 Gamma_B
Gamma_A^2, where Gamma_QC(L) = 10^(-atten L).  The mean photon number is
optimized per distance.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .numerics import golden_max

PROTOCOLS = ("bb84", "lm05")
OBJECTIVES = ("secure_gain", "pns_margin")

DEFAULT_ETA_D = 0.12     # detector efficiency
DEFAULT_GAMMA_B = 0.4    # Bob-box transmission
DEFAULT_GAMMA_A = 0.45   # Alice-box transmission
DEFAULT_ATTEN = 0.02     # fiber attenuation, decades per km
MU_BRACKET = (1e-5, 2.0)


@dataclass(frozen=True)
class LinkBudget:
    mu: float
    length_km: float = 0.0
    eta_d: float = DEFAULT_ETA_D
    gamma_B: float = DEFAULT_GAMMA_B
    gamma_A: float = DEFAULT_GAMMA_A
    atten: float = DEFAULT_ATTEN

    def __post_init__(self):
        if self.mu <= 0.0:
            raise ValueError("mean photon number must be positive")
        if self.length_km < 0.0:
            raise ValueError("channel length must be >= 0")
        for name in ("eta_d", "gamma_B", "gamma_A"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.atten < 0.0:
            raise ValueError("attenuation coefficient must be >= 0")

    @property
    def channel_transmission(self) -> float:
        """Gamma_QC(L) = 10^(-atten * L)."""
        return 10.0 ** (-self.atten * self.length_km)


@dataclass(frozen=True)
class GainPoint:
    protocol: str
    objective: str
    length_km: float
    mu_star: float
    value: float


def _check_protocol(protocol: str):
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")


def poisson_pmf(n: int, mu: float) -> float:
    """Probability of n photons in one pulse of mean photon number mu."""
    if n < 0:
        raise ValueError("photon count must be >= 0")
    if mu <= 0.0:
        raise ValueError("mean photon number must be positive")
    return mu ** n * math.exp(-mu) / math.factorial(n)


def bs_success_prob(r1: float, r2: float, mu: float) -> float:
    """Both-pass tap success probability for tap ratios (r1, r2)."""
    return (1.0 - math.exp(-r1 * mu)) * (1.0 - math.exp(-r2 * (1.0 - r1) * mu))


def bs_eve_info(protocol: str, mu: float) -> float:
    """Eve's expected information fraction from beam splitting."""
    _check_protocol(protocol)
    if mu <= 0.0:
        raise ValueError("mean photon number must be positive")
    if protocol == "bb84":
        return min(mu, 1.0)
    return (1.0 - math.exp(-mu / 2.0)) ** 2


def _total_transmission(protocol: str, budget: LinkBudget) -> float:
    g_qc = budget.channel_transmission
    if protocol == "bb84":
        return g_qc * budget.gamma_B
    return g_qc * g_qc * budget.gamma_B * budget.gamma_A ** 2


def raw_gain(protocol: str, budget: LinkBudget) -> float:
    """Detection probability per pulse: 1 - exp(-mu eta_d Gamma(L))."""
    _check_protocol(protocol)
    return -math.expm1(-budget.mu * budget.eta_d * _total_transmission(protocol, budget))


def secure_gain(protocol: str, budget: LinkBudget) -> float:
    """Raw gain times the fraction of the key not leaked through beam splitting."""
    return raw_gain(protocol, budget) * (1.0 - bs_eve_info(protocol, budget.mu))


def pns_multiphoton_prob(protocol: str, mu: float) -> float:
    """Probability of a pulse whose photon number lets Eve attack without noise."""
    _check_protocol(protocol)
    if mu <= 0.0:
        raise ValueError("mean photon number must be positive")
    if protocol == "bb84":
        return 1.0 - math.exp(-mu) * (1.0 + mu)
    # n >= 3 pulses, counted with the conclusive-measurement fraction 1/2 of P_3
    return 1.0 - math.exp(-mu) * (1.0 + mu + mu ** 2 / 2.0 + mu ** 3 / 12.0)


def pns_margin(protocol: str, budget: LinkBudget) -> float:
    """Security-region margin D = G_raw - P_PNS; positive means secure."""
    return raw_gain(protocol, budget) - pns_multiphoton_prob(protocol, budget.mu)


_OBJECTIVE_FN = {"secure_gain": secure_gain, "pns_margin": pns_margin}


def optimize_mu(objective: str, protocol: str, length_km: float, *,
                eta_d: float = DEFAULT_ETA_D, gamma_B: float = DEFAULT_GAMMA_B,
                gamma_A: float = DEFAULT_GAMMA_A, atten: float = DEFAULT_ATTEN,
                bracket: tuple[float, float] = MU_BRACKET,
                tol: float = 1e-7) -> tuple[float, float]:
    """Golden-section maximization of the objective over the mu bracket.

    Returns (mu_star, value); a non-positive value means the link is
    insecure at this distance for every mean photon number in the bracket.
    """
    if objective not in _OBJECTIVE_FN:
        raise ValueError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")
    _check_protocol(protocol)
    fn = _OBJECTIVE_FN[objective]

    def value_at(mu: float) -> float:
        budget = LinkBudget(mu=mu, length_km=length_km, eta_d=eta_d,
                            gamma_B=gamma_B, gamma_A=gamma_A, atten=atten)
        return fn(protocol, budget)

    return golden_max(value_at, bracket[0], bracket[1], tol=tol)


def scan_distances(objective: str, protocol: str, lengths_km: Sequence[float],
                   **link_kwargs) -> list[GainPoint]:
    """Per-distance optimized curve, one GainPoint per length."""
    points = []
    for length in lengths_km:
        mu_star, value = optimize_mu(objective, protocol, length, **link_kwargs)
        points.append(GainPoint(protocol=protocol, objective=objective,
                                length_km=length, mu_star=mu_star, value=value))
    return points


def crossover_distance(*, l_lo: float = 0.0, l_hi: float = 100.0, tol_km: float = 0.01,
                       eta_d: float = DEFAULT_ETA_D, gamma_B: float = DEFAULT_GAMMA_B,
                       gamma_A: float = DEFAULT_GAMMA_A, atten: float = DEFAULT_ATTEN) -> float:
    """Distance where the optimized PNS margins of LM05 and BB84 cross.

    LM05's margin is larger at short range (it needs three-photon pulses
    to be broken) but decays faster with distance; raises ValueError when
    no crossing with LM05 initially on top exists in [l_lo, l_hi].
    """
    kwargs = dict(eta_d=eta_d, gamma_B=gamma_B, gamma_A=gamma_A, atten=atten)

    def diff(length: float) -> float:
        lm05 = optimize_mu("pns_margin", "lm05", length, **kwargs)[1]
        bb84 = optimize_mu("pns_margin", "bb84", length, **kwargs)[1]
        return lm05 - bb84

    if diff(l_lo) <= 0.0:
        raise ValueError(f"LM05 margin does not exceed BB84 at L = {l_lo} km; no crossover in range")
    step = max(tol_km, min(1.0, (l_hi - l_lo) / 16.0))
    lo = l_lo
    hi = None
    length = l_lo + step
    while length <= l_hi + 1e-12:
        if diff(length) <= 0.0:
            hi = length
            break
        lo = length
        length += step
    if hi is None:
        raise ValueError(f"no PNS crossover found in [{l_lo}, {l_hi}] km; check the link parameters")
    while hi - lo > tol_km:
        mid = 0.5 * (lo + hi)
        if diff(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


GAIN_COLUMNS = ("L_km", "mu_star", "value", "log10_value", "protocol", "objective")


def write_gain_csv(points: Sequence[GainPoint], file: io.TextIOBase,
                   crossover_km: Optional[float] = None,
                   crossover_note: Optional[str] = None) -> None:
    """Distance-scan CSV; log10 of non-positive values is left empty.

    When a crossover footer is requested the last row carries
    protocol="crossover" with the distance in L_km (empty if none found).
    """
    writer = csv.writer(file, lineterminator="\n")
    writer.writerow(GAIN_COLUMNS)
    for p in points:
        log10 = repr(math.log10(p.value)) if p.value > 0.0 else ""
        writer.writerow([repr(p.length_km), repr(p.mu_star), repr(p.value),
                         log10, p.protocol, p.objective])
    if crossover_km is not None or crossover_note is not None:
        cell = repr(crossover_km) if crossover_km is not None else ""
        writer.writerow([cell, "", "", "", "crossover", crossover_note or "pns_margin"])
