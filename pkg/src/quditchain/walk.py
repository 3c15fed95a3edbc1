"""Continuous-time quantum walk on an open path graph.

The Hamiltonian is minus the adjacency matrix of the L-site path.  Its
spectrum is known in closed form, which gives exact propagators, exact
time-averaged position distributions (per-eigenvalue-pair integrals, no
quadrature) and the infinite-time limiting distribution.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def spectrum(length: int) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigensystem of the path-graph Hamiltonian.

    Returns (eigenvalues, modes) with eigenvalues[j-1] = -2 cos(j pi / (L+1))
    and modes[j-1, k-1] = sqrt(2/(L+1)) sin(j k pi / (L+1)).  The mode matrix
    is real, symmetric and orthogonal.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    j = np.arange(1, length + 1)
    eigenvalues = -2.0 * np.cos(j * np.pi / (length + 1))
    modes = np.sqrt(2.0 / (length + 1)) * np.sin(
        np.outer(j, j) * np.pi / (length + 1)
    )
    eigenvalues.setflags(write=False)
    modes.setflags(write=False)
    return eigenvalues, modes


def path_hamiltonian(length: int) -> np.ndarray:
    """Dense -adjacency matrix of the path, for cross-checks."""
    h = np.zeros((length, length))
    for i in range(length - 1):
        h[i, i + 1] = h[i + 1, i] = -1.0
    return h


def propagator(length: int, tau: float) -> np.ndarray:
    """Unitary u(tau) with u[m-1, c-1] = <m| exp(-i H tau) |c>."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    lam, phi = spectrum(length)
    return (phi.T * np.exp(-1j * lam * tau)) @ phi


def propagator_column(length: int, tau, start: int) -> np.ndarray:
    """Amplitudes <m| exp(-i H tau) |start> for one (or an array of) tau.

    For scalar tau returns shape (L,); for an array of taus returns (L, n).
    """
    lam, phi = spectrum(length)
    phase = np.exp(-1j * np.multiply.outer(lam, np.asarray(tau)))
    return phi.T @ (phase.T * phi[:, start - 1]).T


def walk_probability(length: int, tau: float, start: int, site: int) -> float:
    """|<site| exp(-i H tau) |start>|^2."""
    col = propagator_column(length, tau, start)
    return float(np.abs(col[site - 1]) ** 2)


def position_distribution(length: int, tau: float, start: int) -> np.ndarray:
    col = propagator_column(length, tau, start)
    return np.abs(col) ** 2


def limiting_distribution(length: int, start: int) -> np.ndarray:
    """Infinite-time average of the position distribution, in closed form."""
    if not 1 <= start <= length:
        raise ValueError("start site out of range")
    m = np.arange(1, length + 1)
    pi = 2.0 + (m == start) + (m == length + 1 - start)
    return pi / (2.0 * (length + 1))


def _average_kernel(delta: np.ndarray, tau_max: float) -> np.ndarray:
    """Mean of exp(-i delta t) over t in [0, tau_max], elementwise exact."""
    x = delta * tau_max
    out = np.empty(x.shape, dtype=complex)
    small = np.abs(x) < 1e-6
    xs = x[small]
    # series keeps full precision where exp(-ix)-1 would cancel
    out[small] = 1.0 - 1j * xs / 2.0 - xs**2 / 6.0 + 1j * xs**3 / 24.0
    xl = x[~small]
    out[~small] = (np.exp(-1j * xl) - 1.0) / (-1j * xl)
    return out


def averaged_distribution(length: int, start: int, tau_max: float) -> np.ndarray:
    """Time average of the position distribution over tau in [0, tau_max].

    Uses the exact per-eigenvalue-pair integral of the double spectral sum;
    there is no numerical quadrature anywhere.
    """
    if tau_max < 0:
        raise ValueError("tau_max must be >= 0")
    if tau_max == 0:
        out = np.zeros(length)
        out[start - 1] = 1.0
        return out
    lam, phi = spectrum(length)
    kernel = _average_kernel(lam[:, None] - lam[None, :], tau_max)
    weights = kernel * np.outer(phi[:, start - 1], phi[:, start - 1])
    # p_bar[m] = sum_{j,k} weights[j,k] phi[j,m] phi[k,m]
    p_bar = np.einsum("jm,jk,km->m", phi, weights, phi, optimize=True).real
    return p_bar


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    """Standard total variation distance, half the L1 distance."""
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def tail_success_probability(length: int, start: int, tau_max: float) -> float:
    """Time-averaged probability of measuring a site strictly beyond floor(L/6).

    The threshold uses strict inequality with an integer floor, so the summed
    sites are m = floor(L/6)+1 .. L.
    """
    threshold = length // 6
    p_bar = averaged_distribution(length, start, tau_max)
    return float(p_bar[threshold:].sum())


def limiting_tail(length: int, start: int) -> float:
    threshold = length // 6
    return float(limiting_distribution(length, start)[threshold:].sum())
