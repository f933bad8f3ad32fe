"""Reference computations that share no code with the simulator."""

import itertools
import math

import numpy as np


def permanent(m):
    n = len(m)
    if n == 0:
        return 1.0 + 0j
    return sum(
        math.prod(m[i][p[i]] for i in range(n)) for p in itertools.permutations(range(n))
    )


def embed(u, targets, mode_count):
    """Single-photon matrix on all modes with ``u`` placed on ``targets``."""
    full = np.eye(mode_count, dtype=complex)
    for a, ta in enumerate(targets):
        for b, tb in enumerate(targets):
            full[ta, tb] = u[a][b]
    return full


def occupations(mode_count, photons):
    for combo in itertools.combinations_with_replacement(range(mode_count), photons):
        occ = [0] * mode_count
        for m in combo:
            occ[m] += 1
        yield tuple(occ)


def _expand(occ):
    return [m for m, n in enumerate(occ) for _ in range(n)]


def fock_transition(full, out_occ, in_occ):
    """<out| U |in> via the permanent of the repeated-index submatrix."""
    rows, cols = _expand(out_occ), _expand(in_occ)
    sub = [[full[r][c] for c in cols] for r in rows]
    norm = math.sqrt(
        math.prod(math.factorial(n) for n in out_occ) * math.prod(math.factorial(n) for n in in_occ)
    )
    return permanent(sub) / norm


def evolve_dict(amplitudes, u, targets, mode_count):
    """Evolve ``{occupation: amplitude}`` through ``u`` using permanents."""
    full = embed(u, targets, mode_count)
    out = {}
    for in_occ, amp in amplitudes.items():
        for out_occ in occupations(mode_count, sum(in_occ)):
            a = fock_transition(full, out_occ, in_occ)
            if abs(a) > 0:
                out[out_occ] = out.get(out_occ, 0) + amp * a
    return {k: v for k, v in out.items() if abs(v) > 1e-14}


def random_unitary(n, rng):
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


# Hand expansion of the circuit (signal gamma,delta; meter a,b) at reflectivity
# eta, before the meter wave plate. Derived term by term from the creation
# operator substitution s_H -> -r s_H + t m_H, m_H -> t s_H + r m_H.
def circuit_pre_hwp(gamma, delta, a, b, eta, survive=1.0):
    r, t = math.sqrt(eta), math.sqrt(1 - eta)
    amps = {
        (1, 0, 1, 0): gamma * a * (t * t - r * r),
        (1, 0, 0, 1): -gamma * b * r,
        (2, 0, 0, 0): -gamma * a * r * t * math.sqrt(2),
        (0, 0, 2, 0): gamma * a * t * r * math.sqrt(2),
        (0, 0, 1, 1): gamma * b * t,
        (0, 1, 1, 0): delta * survive * a * r,
        (0, 1, 0, 1): delta * survive * b,
        (1, 1, 0, 0): delta * survive * a * t,
    }
    return amps


def hwp_then_relabel(h, v, theta):
    """Meter amplitudes after HWP(theta) and the m_H <-> m_V detector relabel."""
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    h2, v2 = c * h + s * v, s * h - c * v
    return v2, h2
