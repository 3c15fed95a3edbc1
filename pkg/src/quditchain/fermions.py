"""Free fermions hopping on an open line, reduced to one-particle propagators.

A block of particles starts on a set of sites and hops under minus the path
adjacency matrix.  All observables on a region follow from the one-particle
correlation matrix C_mn(tau) = sum_occ u_mc conj(u_nc): site occupations,
the expected particle count in the region, and the full counting statistics
of that count (a Poisson-binomial over the eigenvalues of C restricted to
the region).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .walk import averaged_distribution, propagator, spectrum

EIGENVALUE_TOL = 1e-9


@dataclass(frozen=True)
class FermionBlock:
    """Initial occupation pattern and counting region on a line.

    `occupied` are 1-based sites holding one particle each at tau = 0;
    `region` is the inclusive 1-based window whose particle count is measured.
    """

    length: int
    occupied: tuple[int, ...]
    region: tuple[int, int]

    def __post_init__(self):
        occ = tuple(sorted(int(s) for s in self.occupied))
        object.__setattr__(self, "occupied", occ)
        if not occ or occ[0] < 1 or occ[-1] > self.length:
            raise ValueError("occupied sites out of range")
        if len(set(occ)) != len(occ):
            raise ValueError("occupied sites must be distinct")
        lo, hi = self.region
        if not 1 <= lo <= hi <= self.length:
            raise ValueError("region out of range")

    @classmethod
    def right_block(cls, padding_factor: int, half_gates: int) -> "FermionBlock":
        """2M particles packed on the right of an (f+2)M line; region is [1, fM].

        This is the configuration the gate-hopping chain reduces to: M = K*N
        real gates plus M padding identities start at sites fM+1 .. (f+2)M.
        """
        f, m = int(padding_factor), int(half_gates)
        if f < 1 or m < 1:
            raise ValueError("padding factor and gate count must be positive")
        length = (f + 2) * m
        occupied = tuple(range(f * m + 1, length + 1))
        return cls(length, occupied, (1, f * m))

    @property
    def n_particles(self) -> int:
        return len(self.occupied)

    @property
    def region_slice(self) -> slice:
        lo, hi = self.region
        return slice(lo - 1, hi)


def correlation_matrix(block: FermionBlock, tau: float) -> np.ndarray:
    """C_mn(tau) = sum over initially occupied c of u_mc(tau) conj(u_nc(tau))."""
    u = propagator(block.length, tau)
    cols = u[:, [c - 1 for c in block.occupied]]
    return cols @ cols.conj().T


def expected_region_count(block: FermionBlock, tau: float) -> float:
    """E(X) at time tau, X = particle count in the region."""
    corr = correlation_matrix(block, tau)
    return float(np.diagonal(corr)[block.region_slice].real.sum())


def averaged_region_count(block: FermionBlock, tau_max: float) -> float:
    """Exact time average of E(X) over tau in [0, tau_max]."""
    total = 0.0
    for c in block.occupied:
        p_bar = averaged_distribution(block.length, c, tau_max)
        total += float(p_bar[block.region_slice].sum())
    return total


def limiting_region_count(block: FermionBlock) -> float:
    """Infinite-time average of E(X) from the limiting walk distribution."""
    from .walk import limiting_distribution

    total = 0.0
    for c in block.occupied:
        total += float(limiting_distribution(block.length, c)[block.region_slice].sum())
    return total


def poisson_binomial(probs) -> np.ndarray:
    """PMF of a sum of independent Bernoulli(p_i), by polynomial multiplication."""
    pmf = np.array([1.0])
    for p in probs:
        nxt = np.zeros(pmf.size + 1)
        nxt[: pmf.size] += pmf * (1.0 - p)
        nxt[1:] += pmf * p
        pmf = nxt
    return pmf


def region_count_distribution(block: FermionBlock, tau: float) -> np.ndarray:
    """PMF of X, the particle count in the region, at time tau.

    The eigenvalues of the correlation matrix restricted to the region are
    independent Bernoulli parameters; the count is their Poisson-binomial
    convolution.  Returned PMF has length n_particles + 1 (X cannot exceed
    the particle number).
    """
    corr = correlation_matrix(block, tau)
    sub = corr[block.region_slice, block.region_slice]
    nu = np.linalg.eigvalsh(sub)
    if nu.min() < -EIGENVALUE_TOL or nu.max() > 1.0 + EIGENVALUE_TOL:
        raise ValueError(
            f"correlation eigenvalue outside [0, 1]: range [{nu.min()}, {nu.max()}]"
        )
    nu = np.clip(nu, 0.0, 1.0)
    pmf = poisson_binomial(nu)
    n = block.n_particles
    if pmf.size > n + 1:
        # weight beyond the particle number is numerical noise
        pmf = np.concatenate([pmf[:n], [pmf[n:].sum()]])
    else:
        pmf = np.pad(pmf, (0, n + 1 - pmf.size))
    return pmf


def region_count_success(block: FermionBlock, tau: float, threshold: int) -> float:
    """Pr[X >= threshold] at time tau."""
    pmf = region_count_distribution(block, tau)
    return float(pmf[threshold:].sum())


def sampled_region_success(
    block: FermionBlock,
    tau_max: float,
    threshold: int,
    samples: int,
    seed: int,
) -> dict:
    """Monte-Carlo average of Pr[X >= threshold] over tau ~ Uniform(0, tau_max).

    Deterministic for a fixed seed (numpy PCG64).  Returns the per-sample
    trace so callers can emit it verbatim.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    taus = rng.uniform(0.0, tau_max, size=samples)
    rows = []
    for tau in taus:
        rows.append(
            (
                float(tau),
                expected_region_count(block, float(tau)),
                region_count_success(block, float(tau), threshold),
            )
        )
    estimate = float(np.mean([r[2] for r in rows])) if rows else 0.0
    return {
        "estimate": estimate,
        "trace": rows,
        "seed": seed,
        "rng": "numpy PCG64",
        "tau_max": tau_max,
        "threshold": threshold,
        "samples": samples,
    }
