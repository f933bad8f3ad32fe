"""Fidelity measures for characterizing a QND measurement of a qubit.

Three outcome distributions matter: the signal input ``p_in``, the signal
output ``p_out`` and the meter reading ``p_m``. Each criterion compares two
of them with the classical fidelity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TOL = 1e-12
COMPLEMENTARITY_TOL = 1e-9


@dataclass(frozen=True)
class BinaryDistribution:
    p_h: float
    p_v: float

    def __post_init__(self):
        if self.p_h < -TOL or self.p_v < -TOL or abs(self.p_h + self.p_v - 1) > TOL:
            raise ValueError(f"not a probability distribution: ({self.p_h!r}, {self.p_v!r})")

    @classmethod
    def from_weights(cls, w_h: float, w_v: float) -> BinaryDistribution:
        total = w_h + w_v
        if total <= 0:
            raise ValueError("weights must have positive sum")
        return cls(w_h / total, w_v / total)

    def as_tuple(self) -> tuple[float, float]:
        return (self.p_h, self.p_v)


@dataclass(frozen=True)
class JointDistribution:
    """Coincidence probabilities; first letter is the signal outcome, second the meter."""

    p_hh: float
    p_hv: float
    p_vh: float
    p_vv: float

    def __post_init__(self):
        ps = self.as_tuple()
        if min(ps) < -TOL or max(ps) > 1 + TOL or abs(sum(ps) - 1) > TOL:
            raise ValueError(f"not a joint distribution: {ps}")

    @classmethod
    def from_weights(cls, hh: float, hv: float, vh: float, vv: float) -> JointDistribution:
        total = hh + hv + vh + vv
        if total <= 0:
            raise ValueError("weights must have positive sum")
        return cls(hh / total, hv / total, vh / total, vv / total)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_hh, self.p_hv, self.p_vh, self.p_vv)

    def signal_marginal(self) -> BinaryDistribution:
        return BinaryDistribution.from_weights(self.p_hh + self.p_hv, self.p_vh + self.p_vv)

    def meter_marginal(self) -> BinaryDistribution:
        return BinaryDistribution.from_weights(self.p_hh + self.p_vh, self.p_hv + self.p_vv)


def classical_fidelity(p: BinaryDistribution, q: BinaryDistribution) -> float:
    """Squared Bhattacharyya coefficient ``(sum_i sqrt(p_i q_i))**2``."""
    bc = sum(math.sqrt(max(a, 0.0) * max(b, 0.0)) for a, b in zip(p.as_tuple(), q.as_tuple()))
    return min(bc * bc, 1.0)


def measurement_fidelity(p_in: BinaryDistribution, p_m: BinaryDistribution) -> float:
    return classical_fidelity(p_in, p_m)


def qnd_fidelity(p_in: BinaryDistribution, p_out: BinaryDistribution) -> float:
    return classical_fidelity(p_in, p_out)


def qsp_fidelity(j: JointDistribution) -> float:
    """Probability the signal output matches the meter reading: ``P_HH + P_VV``."""
    return j.p_hh + j.p_vv


def qsp_fidelity_conditional(j: JointDistribution) -> float:
    """General form ``sum_i p^m_i * p^out_{i|i}``, built from conditionals.

    Agrees with :func:`qsp_fidelity` whenever the joint distribution comes
    from a single signal/meter coincidence measurement.
    """
    total = 0.0
    for p_m, p_match in ((j.p_hh + j.p_vh, j.p_hh), (j.p_hv + j.p_vv, j.p_vv)):
        if p_m > 0:
            total += p_m * (p_match / p_m)
    return total


likelihood = qsp_fidelity


def knowledge(j: JointDistribution) -> float:
    """Signal/meter correlation ``P_HH + P_VV - P_HV - P_VH``."""
    return j.p_hh + j.p_vv - j.p_hv - j.p_vh


def complementarity_check(k: float, v: float) -> tuple[float, bool]:
    total = k * k + v * v
    return total, total <= 1 + COMPLEMENTARITY_TOL
