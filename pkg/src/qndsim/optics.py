"""Two-mode transforms for the optical elements of the QND circuit.

Every element is a 2x2 unitary acting on a mode pair. Angles are radians;
use :func:`math.radians` at the user-facing boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import check_unitary


@dataclass(frozen=True)
class ModeTransform:
    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        check_unitary(m, tol=1e-12)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def arity(self) -> int:
        return self.matrix.shape[0]

    def then(self, other: ModeTransform) -> ModeTransform:
        """Element ``self`` followed by ``other`` on the same modes."""
        return ModeTransform(other.matrix @ self.matrix, f"{self.name}>{other.name}")


def _unit_interval(x: float, what: str) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{what} must lie in [0, 1], got {x!r}")
    return float(x)


def beam_splitter(eta: float) -> ModeTransform:
    """Reflectivity-``eta`` beam splitter on (signal-side, meter-side) modes.

    ``s -> -sqrt(eta) s + sqrt(1-eta) m`` and ``m -> sqrt(1-eta) s + sqrt(eta) m``;
    the sign sits on the reflected signal amplitude.
    """
    eta = _unit_interval(eta, "reflectivity")
    r, t = math.sqrt(eta), math.sqrt(1.0 - eta)
    return ModeTransform(np.array([[-r, t], [t, r]]), f"BS({eta:g})")


def half_wave_plate(theta: float) -> ModeTransform:
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return ModeTransform(np.array([[c, s], [s, -c]]), f"HWP({math.degrees(theta):g}deg)")


def quarter_wave_plate(theta: float) -> ModeTransform:
    """QWP with fast axis at ``theta``; phase ``i`` on the slow axis, no global phase.

    ``quarter_wave_plate(t)`` applied twice equals ``half_wave_plate(t)`` exactly.
    """
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    m = rot @ np.diag([1, 1j]) @ rot.T
    return ModeTransform(m, f"QWP({math.degrees(theta):g}deg)")


def loss_channel(fraction: float) -> ModeTransform:
    """Dilated loss on (lossy mode, vacuum ancilla).

    A photon survives with amplitude ``sqrt(1 - fraction)`` and is routed to
    the ancilla with amplitude ``sqrt(fraction)``. Heralding the ancilla empty
    implements the loss.
    """
    f = _unit_interval(fraction, "loss fraction")
    keep, lose = math.sqrt(1.0 - f), math.sqrt(f)
    return ModeTransform(np.array([[keep, -lose], [lose, keep]]), f"loss({f:g})")


def swap() -> ModeTransform:
    return ModeTransform(np.array([[0, 1], [1, 0]]), "swap")


def identity() -> ModeTransform:
    return ModeTransform(np.eye(2), "id")
