"""Exact few-photon Fock-space states and linear-optical evolution.

States are sparse maps from occupation vectors (tuples of photon counts, one
per mode) to complex amplitudes. Mode order is canonical:
``s_H, s_V, m_H, m_V, ancilla_0, ...``. Every operation returns a new state.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

DEFAULT_N_MAX = 2
HARD_N_MAX = 4
PRUNE = 1e-14
NORM_TOL = 1e-12

Occupation = tuple[int, ...]


class CapacityError(ValueError):
    """Raised when a state would hold more photons than allowed."""


class DualRailError(ValueError):
    """Raised when a branch does not hold exactly one photon in a qubit's mode pair."""

    def __init__(self, occupation: Occupation, h_mode: int, v_mode: int):
        self.occupation = occupation
        super().__init__(
            f"basis state {list(occupation)} has "
            f"{occupation[h_mode] + occupation[v_mode]} photons in modes "
            f"({h_mode}, {v_mode}); dual-rail encoding needs exactly 1"
        )


@dataclass(frozen=True)
class PureState:
    """Sparse pure state of ``mode_count`` bosonic modes.

    ``branch_probability`` records the probability of the heralding event that
    produced this state (1.0 for an unconditioned state).
    """

    amplitudes: Mapping[Occupation, complex]
    mode_count: int
    branch_probability: float = 1.0
    n_max: int = field(default=DEFAULT_N_MAX, compare=False)

    def __post_init__(self):
        if not 1 <= self.n_max <= HARD_N_MAX:
            raise CapacityError(f"n_max must be in [1, {HARD_N_MAX}], got {self.n_max}")
        cleaned = {}
        for occ, amp in self.amplitudes.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != self.mode_count:
                raise ValueError(
                    f"occupation {list(occ)} has {len(occ)} modes, expected {self.mode_count}"
                )
            if any(n < 0 for n in occ):
                raise ValueError(f"negative photon count in {list(occ)}")
            if sum(occ) > self.n_max:
                raise CapacityError(
                    f"occupation {list(occ)} holds {sum(occ)} photons, n_max is {self.n_max}"
                )
            amp = complex(amp)
            if abs(amp) >= PRUNE:
                cleaned[occ] = amp
        object.__setattr__(self, "amplitudes", dict(sorted(cleaned.items())))

    @classmethod
    def basis(cls, occupation: Sequence[int], n_max: int = DEFAULT_N_MAX) -> PureState:
        occ = tuple(occupation)
        return cls({occ: 1.0}, len(occ), n_max=max(n_max, sum(occ)))

    @classmethod
    def vacuum(cls, mode_count: int, n_max: int = DEFAULT_N_MAX) -> PureState:
        return cls({(0,) * mode_count: 1.0}, mode_count, n_max=n_max)

    @property
    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    @property
    def is_empty(self) -> bool:
        """True for the branch of an impossible heralding event."""
        return not self.amplitudes

    def amplitude(self, occupation: Sequence[int]) -> complex:
        return self.amplitudes.get(tuple(occupation), 0j)

    def photon_numbers(self) -> set[int]:
        return {sum(occ) for occ in self.amplitudes}

    def normalized(self) -> PureState:
        n = self.norm
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return PureState(
            {k: v / n for k, v in self.amplitudes.items()},
            self.mode_count,
            self.branch_probability,
            self.n_max,
        )

    def drop_modes(self, modes: Sequence[int]) -> PureState:
        """Remove modes that are empty in every basis state (e.g. heralded ancillas)."""
        drop = set(modes)
        out = {}
        for occ, amp in self.amplitudes.items():
            if any(occ[m] for m in drop):
                raise ValueError(f"mode occupied in {list(occ)}; cannot drop {sorted(drop)}")
            out[tuple(n for i, n in enumerate(occ) if i not in drop)] = amp
        return PureState(out, self.mode_count - len(drop), self.branch_probability, self.n_max)

    def close_to(self, other: PureState, tol: float = 1e-12) -> bool:
        if self.mode_count != other.mode_count:
            return False
        keys = set(self.amplitudes) | set(other.amplitudes)
        return all(abs(self.amplitude(k) - other.amplitude(k)) <= tol for k in keys)

    def to_json(self) -> dict:
        return {
            "modes": self.mode_count,
            "terms": [
                {"occ": list(occ), "re": _sig(amp.real), "im": _sig(amp.imag)}
                for occ, amp in self.amplitudes.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping, n_max: int = DEFAULT_N_MAX) -> PureState:
        amps = {tuple(t["occ"]): complex(t["re"], t["im"]) for t in data["terms"]}
        top = max((sum(o) for o in amps), default=0)
        return cls(amps, int(data["modes"]), n_max=max(n_max, top))


def _sig(x: float) -> float:
    return float(f"{x:.12g}")


def tensor(a: PureState, b: PureState, n_max: int | None = None) -> PureState:
    """Tensor product; ``b``'s modes are appended after ``a``'s."""
    if n_max is None:
        n_max = max(a.n_max, b.n_max)
    top = max(a.photon_numbers(), default=0) + max(b.photon_numbers(), default=0)
    if top > n_max:
        raise CapacityError(f"combined state can hold {top} photons, n_max is {n_max}")
    amps = {
        oa + ob: xa * xb
        for oa, xa in a.amplitudes.items()
        for ob, xb in b.amplitudes.items()
    }
    return PureState(
        amps, a.mode_count + b.mode_count, a.branch_probability * b.branch_probability, n_max
    )


def check_unitary(u: np.ndarray, tol: float = 1e-10) -> None:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"mode transform must be square, got shape {u.shape}")
    err = np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))
    if err > tol:
        raise ValueError(f"mode transform is not unitary (max deviation {err:.3g})")


def apply_linear_optics(state: PureState, u, target_modes: Sequence[int]) -> PureState:
    """Evolve ``state`` through a passive linear-optical element.

    ``u`` acts on the modes listed in ``target_modes`` via the creation-operator
    substitution ``a†_j -> sum_k u[k, j] a†_k``. Each basis state is expanded as
    a normal-ordered monomial, the substitution multiplied out, and the
    ``sqrt(n!)`` normalisation restored per output occupation.
    """
    matrix = getattr(u, "matrix", u)
    matrix = np.asarray(matrix, dtype=complex)
    check_unitary(matrix)
    targets = list(target_modes)
    if len(set(targets)) != len(targets):
        raise ValueError(f"target modes must be distinct, got {targets}")
    if len(targets) != matrix.shape[0]:
        raise ValueError(f"{matrix.shape[0]}x{matrix.shape[0]} transform given {len(targets)} modes")
    for m in targets:
        if not 0 <= m < state.mode_count:
            raise IndexError(f"mode {m} out of range for {state.mode_count}-mode state")

    local = {m: i for i, m in enumerate(targets)}
    out: dict[Occupation, complex] = defaultdict(complex)
    for occ, amp in state.amplitudes.items():
        # monomial coefficients keyed by output exponent vector
        poly: dict[Occupation, complex] = {(0,) * state.mode_count: 1.0 + 0j}
        for mode, count in enumerate(occ):
            for _ in range(count):
                if mode in local:
                    col = matrix[:, local[mode]]
                    images = [(targets[k], col[k]) for k in range(len(targets)) if col[k] != 0]
                else:
                    images = [(mode, 1.0)]
                nxt: dict[Occupation, complex] = defaultdict(complex)
                for mono, c in poly.items():
                    for k, w in images:
                        bumped = list(mono)
                        bumped[k] += 1
                        nxt[tuple(bumped)] += c * w
                poly = nxt
        inv_in = 1.0 / math.sqrt(math.prod(math.factorial(n) for n in occ))
        for mono, c in poly.items():
            out[mono] += amp * c * inv_in * math.sqrt(math.prod(math.factorial(n) for n in mono))
    return PureState(out, state.mode_count, state.branch_probability, state.n_max)


def _matches(occ: Occupation, pattern: Mapping[int, int]) -> bool:
    return all(occ[m] == n for m, n in pattern.items())


def _as_pattern(pattern, mode_count: int) -> dict[int, int]:
    if isinstance(pattern, Mapping):
        pat = {int(m): int(n) for m, n in pattern.items() if n is not None}
    else:
        if len(pattern) != mode_count:
            raise ValueError(f"pattern has {len(pattern)} entries for {mode_count} modes")
        pat = {m: int(n) for m, n in enumerate(pattern) if n is not None}
    for m in pat:
        if not 0 <= m < mode_count:
            raise IndexError(f"pattern mode {m} out of range")
    return pat


def pattern_probability(state: PureState, pattern) -> float:
    pat = _as_pattern(pattern, state.mode_count)
    return sum(abs(a) ** 2 for o, a in state.amplitudes.items() if _matches(o, pat))


def project_pattern(state: PureState, pattern) -> tuple[PureState, float]:
    """Herald on a photon-number pattern.

    ``pattern`` is either a mapping ``{mode: count}`` (unlisted modes are
    unconstrained) or a per-mode sequence with ``None`` meaning "any".
    Returns the renormalised branch and its probability. An impossible pattern
    gives an empty branch (``branch.is_empty``) with probability 0.
    """
    if abs(state.norm - 1.0) > NORM_TOL:
        raise ValueError(f"projection requires a normalized state (norm {state.norm!r})")
    pat = _as_pattern(pattern, state.mode_count)
    kept = {o: a for o, a in state.amplitudes.items() if _matches(o, pat)}
    p = sum(abs(a) ** 2 for a in kept.values())
    if p == 0:
        return PureState({}, state.mode_count, 0.0, state.n_max), 0.0
    scale = 1.0 / math.sqrt(p)
    branch = PureState(
        {o: a * scale for o, a in kept.items()},
        state.mode_count,
        state.branch_probability * p,
        state.n_max,
    )
    return branch, p


@dataclass(frozen=True)
class QubitDensityMatrix:
    """2x2 density matrix in the (H, V) basis."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"qubit density matrix must be 2x2, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > 1e-12:
            raise ValueError(f"density matrix trace {np.trace(m).real!r} != 1")
        if np.min(np.linalg.eigvalsh(m)) < -1e-12:
            raise ValueError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def coherence(self) -> complex:
        return complex(self.entries[0, 1])

    @property
    def populations(self) -> tuple[float, float]:
        return float(self.entries[0, 0].real), float(self.entries[1, 1].real)

    def to_json(self) -> list[list[dict]]:
        return [
            [{"re": _sig(z.real), "im": _sig(z.imag)} for z in row] for row in self.entries
        ]


def reduce_to_qubit(state: PureState, h_mode: int, v_mode: int) -> QubitDensityMatrix:
    """Partial trace onto the dual-rail qubit carried by ``(h_mode, v_mode)``."""
    env: dict[Occupation, np.ndarray] = defaultdict(lambda: np.zeros(2, dtype=complex))
    for occ, amp in state.amplitudes.items():
        if occ[h_mode] + occ[v_mode] != 1:
            raise DualRailError(occ, h_mode, v_mode)
        rest = tuple(n for i, n in enumerate(occ) if i not in (h_mode, v_mode))
        env[rest][0 if occ[h_mode] else 1] += amp
    rho = np.zeros((2, 2), dtype=complex)
    for vec in env.values():
        rho += np.outer(vec, vec.conj())
    tr = np.trace(rho).real
    if tr == 0:
        raise ValueError("cannot reduce an empty state")
    rho /= tr
    rho = (rho + rho.conj().T) / 2
    return QubitDensityMatrix(rho)


def purity(rho: QubitDensityMatrix) -> float:
    m = rho.entries
    return float(np.real(np.trace(m @ m)))
