"""The linear-optics QND measurement of a polarization qubit.

Circuit (mode order ``s_H, s_V, m_H, m_V`` then a loss ancilla):

1. signal photon ``gamma|H> + delta|V>`` and meter photon ``alpha|H> + beta|V>``
2. reflectivity-``eta`` beam splitter on ``(s_H, m_H)``
3. optional 2/3 loss on ``s_V``, dilated to a vacuum ancilla
4. half-wave plate on the meter, then fixed detector labeling (``m_H <-> m_V``)
5. post-selection on one photon in each of the signal and meter pairs and
   none in the ancilla

With ``eta = 1/3`` and the meter in ``|D'>`` this is a strong QND measurement
in the H/V basis that succeeds with probability ``(|gamma|^2 + 3|delta|^2)/6``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import optics
from .fock import (
    PureState,
    QubitDensityMatrix,
    apply_linear_optics,
    pattern_probability,
    purity,
    reduce_to_qubit,
    tensor,
)
from .metrics import (
    BinaryDistribution,
    JointDistribution,
    classical_fidelity,
    knowledge,
    qsp_fidelity,
)

S_H, S_V, M_H, M_V = 0, 1, 2, 3
LOSS_ANCILLA = 4
BALANCING_LOSS = 2 / 3
STRONG_ETA = 1 / 3

TWO_IN_SIGNAL = "two-in-signal"
TWO_IN_METER = "two-in-meter"
PHOTON_LOST = "photon-lost"


class ZeroSuccessError(ValueError):
    """The heralding event has zero probability for this configuration."""


@dataclass(frozen=True)
class PolarizationQubit:
    h_amp: complex
    v_amp: complex

    def __post_init__(self):
        h, v = complex(self.h_amp), complex(self.v_amp)
        if abs(abs(h) ** 2 + abs(v) ** 2 - 1) > 1e-12:
            raise ValueError(f"qubit ({h}, {v}) is not normalized")
        object.__setattr__(self, "h_amp", h)
        object.__setattr__(self, "v_amp", v)

    @classmethod
    def normalized(cls, h_amp: complex, v_amp: complex) -> PolarizationQubit:
        n = math.hypot(abs(h_amp), abs(v_amp))
        if n == 0:
            raise ValueError("polarization amplitudes cannot both be zero")
        return cls(h_amp / n, v_amp / n)

    @property
    def populations(self) -> tuple[float, float]:
        return abs(self.h_amp) ** 2, abs(self.v_amp) ** 2

    def to_state(self) -> PureState:
        return PureState({(1, 0): self.h_amp, (0, 1): self.v_amp}, 2)


H = PolarizationQubit(1, 0)
V = PolarizationQubit(0, 1)
EQUAL_SUPERPOSITION = PolarizationQubit(1 / math.sqrt(2), 1 / math.sqrt(2))


@dataclass(frozen=True)
class CircuitConfig:
    eta: float = STRONG_ETA
    balanced_loss: bool = False
    meter_hwp_angle: float = math.radians(22.5)

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")


STRONG = CircuitConfig()
WEAK = CircuitConfig(balanced_loss=True)


@dataclass(frozen=True)
class Analyzer:
    """Polarization analyzer: QWP then HWP in front of a PBS (angles in radians)."""

    hwp: float = 0.0
    qwp: float = 0.0

    @classmethod
    def hv(cls) -> Analyzer:
        return cls()

    @classmethod
    def diagonal(cls) -> Analyzer:
        return cls(hwp=math.radians(22.5))

    @classmethod
    def circular(cls) -> Analyzer:
        return cls(qwp=math.radians(45))

    @property
    def transform(self) -> optics.ModeTransform:
        return optics.quarter_wave_plate(self.qwp).then(optics.half_wave_plate(self.hwp))


def prepare_meter(eta: float) -> PolarizationQubit:
    """Meter state ``|D(eta)>``; ``prepare_meter(1/3)`` is ``|D'>``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta!r}")
    return PolarizationQubit(math.sqrt(1 / (1 + eta)), math.sqrt(eta / (1 + eta)))


D_PRIME = prepare_meter(STRONG_ETA)


def standard_inputs() -> dict[str, PolarizationQubit]:
    """The six test inputs; every non-eigenstate has equal H/V success-weighted statistics."""
    a = math.sqrt(3) / 2
    return {
        "H": H,
        "V": V,
        "D+": PolarizationQubit(a, 0.5),
        "D-": PolarizationQubit(-a, 0.5),
        "R+": PolarizationQubit(1j * a, 0.5),
        "R-": PolarizationQubit(-1j * a, 0.5),
    }


def meter_from_alpha(alpha: float) -> PolarizationQubit:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    return PolarizationQubit(alpha, math.sqrt(max(0.0, 1 - alpha * alpha)))


def qnd_stage(
    state: PureState,
    modes: Sequence[int],
    config: CircuitConfig,
    ancilla: int | None = None,
    rotate_meter: bool = True,
) -> PureState:
    """Apply the QND interaction to ``modes = (s_H, s_V, m_H, m_V)`` of ``state``."""
    s_h, s_v, m_h, m_v = modes
    state = apply_linear_optics(state, optics.beam_splitter(config.eta), [s_h, m_h])
    if config.balanced_loss:
        if ancilla is None:
            raise ValueError("balanced loss needs an ancilla mode")
        state = apply_linear_optics(state, optics.loss_channel(BALANCING_LOSS), [s_v, ancilla])
    if rotate_meter:
        state = apply_linear_optics(state, optics.half_wave_plate(config.meter_hwp_angle), [m_h, m_v])
        state = apply_linear_optics(state, optics.swap(), [m_h, m_v])
    return state


def _input_state(signal: PolarizationQubit, meter: PolarizationQubit, config: CircuitConfig) -> PureState:
    state = tensor(signal.to_state(), meter.to_state())
    if config.balanced_loss:
        state = tensor(state, PureState.vacuum(1))
    return state


def evolve(
    signal: PolarizationQubit,
    meter: PolarizationQubit,
    config: CircuitConfig = STRONG,
    rotate_meter: bool = True,
) -> PureState:
    """Full output state of the circuit before any post-selection."""
    state = _input_state(signal, meter, config)
    ancilla = LOSS_ANCILLA if config.balanced_loss else None
    return qnd_stage(state, (S_H, S_V, M_H, M_V), config, ancilla, rotate_meter)


@dataclass(frozen=True)
class RunOutcome:
    success_state: PureState
    success_probability: float
    failure_breakdown: dict[str, float] = field(default_factory=dict)

    @property
    def total_probability(self) -> float:
        return self.success_probability + sum(self.failure_breakdown.values())


def classify(state: PureState) -> RunOutcome:
    """Split a two-photon circuit output into the heralded branch and failure classes."""
    fails = {TWO_IN_SIGNAL: 0.0, TWO_IN_METER: 0.0, PHOTON_LOST: 0.0}
    success = {}
    for occ, amp in state.amplitudes.items():
        p = abs(amp) ** 2
        n_s, n_m, n_anc = occ[S_H] + occ[S_V], occ[M_H] + occ[M_V], sum(occ[4:])
        if n_anc:
            fails[PHOTON_LOST] += p
        elif n_s == 1 and n_m == 1:
            success[occ[:4]] = amp
        elif n_s == 2:
            fails[TWO_IN_SIGNAL] += p
        elif n_m == 2:
            fails[TWO_IN_METER] += p
        else:
            raise ValueError(f"unexpected photon pattern {list(occ)}")
    p_success = sum(abs(a) ** 2 for a in success.values())
    if p_success == 0:
        branch = PureState({}, 4, 0.0)
    else:
        scale = 1 / math.sqrt(p_success)
        branch = PureState({o: a * scale for o, a in success.items()}, 4, p_success)
    return RunOutcome(branch, p_success, fails)


def run(
    signal: PolarizationQubit, meter: PolarizationQubit, config: CircuitConfig = STRONG
) -> RunOutcome:
    return classify(evolve(signal, meter, config))


def _require_success(outcome: RunOutcome) -> PureState:
    if outcome.success_probability <= 0 or outcome.success_state.is_empty:
        raise ZeroSuccessError("success probability is zero for this input and configuration")
    return outcome.success_state


def joint_distribution(
    signal: PolarizationQubit,
    meter: PolarizationQubit,
    config: CircuitConfig = STRONG,
    signal_basis: Analyzer = Analyzer(),
    meter_basis: Analyzer = Analyzer(),
) -> JointDistribution:
    """Success-conditioned coincidence probabilities after the two analyzers."""
    state = _require_success(run(signal, meter, config))
    state = apply_linear_optics(state, signal_basis.transform, [S_H, S_V])
    state = apply_linear_optics(state, meter_basis.transform, [M_H, M_V])
    p = {
        (s, m): pattern_probability(state, {S_H: 1 - s, S_V: s, M_H: 1 - m, M_V: m})
        for s in (0, 1)
        for m in (0, 1)
    }
    return JointDistribution.from_weights(p[0, 0], p[0, 1], p[1, 0], p[1, 1])


def signal_output_density_matrix(
    signal: PolarizationQubit, meter: PolarizationQubit, config: CircuitConfig = STRONG
) -> QubitDensityMatrix:
    return reduce_to_qubit(_require_success(run(signal, meter, config)), S_H, S_V)


def input_distribution(
    signal: PolarizationQubit,
    meter: PolarizationQubit,
    config: CircuitConfig = STRONG,
    raw: bool = False,
) -> BinaryDistribution:
    """Signal input populations, by default reweighted by the eigenstate success rates.

    Post-selection favours whichever eigenstate heralds more often, so the
    input statistics seen among successful runs are ``|gamma|^2 P(H)`` versus
    ``|delta|^2 P(V)``. ``raw=True`` returns the bare populations.
    """
    pop_h, pop_v = signal.populations
    if raw:
        return BinaryDistribution.from_weights(pop_h, pop_v)
    p_h = run(H, meter, config).success_probability
    p_v = run(V, meter, config).success_probability
    return BinaryDistribution.from_weights(pop_h * p_h, pop_v * p_v)


@dataclass(frozen=True)
class InputReport:
    name: str
    p_in: BinaryDistribution
    p_m: BinaryDistribution
    p_out: BinaryDistribution
    joint: JointDistribution
    f_m: float
    f_qnd: float
    f_qsp: float
    k: float
    p_success: float

    def to_json(self) -> dict:
        def sig(x):
            return float(f"{x:.12g}")

        def dist(d):
            return {"H": sig(d.p_h), "V": sig(d.p_v)}

        return {
            "input": self.name,
            "p_in": dist(self.p_in),
            "p_m": dist(self.p_m),
            "p_out": dist(self.p_out),
            "F_M": sig(self.f_m),
            "F_QND": sig(self.f_qnd),
            "F_QSP": sig(self.f_qsp),
            "K": sig(self.k),
            "P_sm": {
                "HH": sig(self.joint.p_hh),
                "HV": sig(self.joint.p_hv),
                "VH": sig(self.joint.p_vh),
                "VV": sig(self.joint.p_vv),
            },
            "p_success": sig(self.p_success),
        }


def characterize(
    name: str,
    signal: PolarizationQubit,
    meter: PolarizationQubit = D_PRIME,
    config: CircuitConfig = STRONG,
    raw_input_dist: bool = False,
) -> InputReport:
    """All three QND fidelities and the knowledge for one signal input."""
    joint = joint_distribution(signal, meter, config)
    p_in = input_distribution(signal, meter, config, raw=raw_input_dist)
    p_m, p_out = joint.meter_marginal(), joint.signal_marginal()
    return InputReport(
        name=name,
        p_in=p_in,
        p_m=p_m,
        p_out=p_out,
        joint=joint,
        f_m=classical_fidelity(p_in, p_m),
        f_qnd=classical_fidelity(p_in, p_out),
        f_qsp=qsp_fidelity(joint),
        k=knowledge(joint),
        p_success=run(signal, meter, config).success_probability,
    )


def h_input_meter_coefficients(eta: float) -> tuple[complex, complex]:
    """Amplitudes of ``|H>_s|H>_m`` and ``|H>_s|V>_m`` before the meter wave plate.

    Signal ``|H>``, meter ``|D(eta)>``, no balancing loss; amplitudes are not
    renormalized.
    """
    state = evolve(H, prepare_meter(eta), CircuitConfig(eta=eta), rotate_meter=False)
    return state.amplitude((1, 0, 1, 0)), state.amplitude((1, 0, 0, 1))


def fringe_visibility(rho_source: PureState, step_deg: float = 1.0) -> float:
    """Linear-polarization fringe contrast of the signal in a heralded state.

    The signal analyzer polarization angle is scanned over ``[0, 180]`` degrees
    (analyzer HWP at half that angle) and ``(max - min) / (max + min)`` of the
    H-port probability is returned.
    """
    probs = []
    for phi in np.arange(0.0, 180.0 + step_deg / 2, step_deg):
        turned = apply_linear_optics(
            rho_source, optics.half_wave_plate(math.radians(phi) / 2), [S_H, S_V]
        )
        probs.append(pattern_probability(turned, {S_H: 1}))
    hi, lo = max(probs), min(probs)
    return (hi - lo) / (hi + lo)


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    k: float
    v: float
    purity: float
    p_success: float

    @property
    def k2_plus_v2(self) -> float:
        return self.k * self.k + self.v * self.v


def _sweep_point(signal: PolarizationQubit, alpha: float, config: CircuitConfig) -> SweepRow:
    meter = meter_from_alpha(alpha)
    outcome = run(signal, meter, config)
    rho = reduce_to_qubit(_require_success(outcome), S_H, S_V)
    joint = joint_distribution(signal, meter, config)
    return SweepRow(
        alpha=alpha,
        k=knowledge(joint),
        v=2 * abs(rho.coherence),
        purity=purity(rho),
        p_success=outcome.success_probability,
    )


def weak_sweep(
    signal: PolarizationQubit,
    alphas: Iterable[float],
    config: CircuitConfig = WEAK,
    workers: int | None = None,
) -> list[SweepRow]:
    """Knowledge, visibility and purity as the meter moves from ``|V>`` toward ``|D'>``.

    The meter is ``alpha|H> + sqrt(1 - alpha^2)|V>``. Rows come back in the
    order of ``alphas`` whatever ``workers`` is.
    """
    if not config.balanced_loss:
        raise ValueError("weak sweep needs the 2/3 balancing loss on s_V (balanced_loss=True)")
    alphas = list(alphas)
    if workers is None:
        workers = int(os.environ.get("QND_THREADS", "1") or 1)
    if workers <= 1:
        return [_sweep_point(signal, a, config) for a in alphas]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda a: _sweep_point(signal, a, config), alphas))


@dataclass(frozen=True)
class ChainOutcome:
    """Two QND measurements in series on the same signal photon."""

    success_probability: float
    agreement: float
    conditional_agreement: dict[str, float]


def chained_measurement(
    signal: PolarizationQubit,
    meter: PolarizationQubit = D_PRIME,
    config: CircuitConfig = STRONG,
) -> ChainOutcome:
    """Feed the signal output of one QND circuit into a second with a fresh meter.

    Simulated as one three-photon state on modes ``s_H, s_V, m1_H, m1_V, m2_H,
    m2_V`` (plus two loss ancillas when balancing is on). The signal is left
    unmeasured; both meters are read in H/V.
    """
    state = tensor(tensor(signal.to_state(), meter.to_state(), n_max=3), meter.to_state(), n_max=3)
    anc = (None, None)
    if config.balanced_loss:
        state = tensor(state, PureState.vacuum(2, n_max=3), n_max=3)
        anc = (6, 7)
    state = qnd_stage(state, (S_H, S_V, 2, 3), config, anc[0])
    state = qnd_stage(state, (S_H, S_V, 4, 5), config, anc[1])

    heralds = {m: 0 for m in range(6, state.mode_count)}
    p = {}
    for first in (0, 1):
        for second in (0, 1):
            pat = dict(heralds)
            pat.update({2: 1 - first, 3: first, 4: 1 - second, 5: second})
            p[first, second] = pattern_probability(state, pat)
    total = sum(p.values())
    if total <= 0:
        raise ZeroSuccessError("chained measurement never heralds for this input")
    conditional = {}
    for i, label in ((0, "H"), (1, "V")):
        p_first = p[i, 0] + p[i, 1]
        if p_first > 0:
            conditional[label] = p[i, i] / p_first
    return ChainOutcome(total, (p[0, 0] + p[1, 1]) / total, conditional)


__all__ = [
    "Analyzer",
    "ChainOutcome",
    "CircuitConfig",
    "D_PRIME",
    "EQUAL_SUPERPOSITION",
    "H",
    "InputReport",
    "PolarizationQubit",
    "RunOutcome",
    "STRONG",
    "SweepRow",
    "V",
    "WEAK",
    "ZeroSuccessError",
    "chained_measurement",
    "characterize",
    "classify",
    "evolve",
    "fringe_visibility",
    "h_input_meter_coefficients",
    "input_distribution",
    "joint_distribution",
    "meter_from_alpha",
    "prepare_meter",
    "run",
    "signal_output_density_matrix",
    "standard_inputs",
    "weak_sweep",
]
