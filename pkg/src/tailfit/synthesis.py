"""Seeded random generation: lognormal / power-law samples, the
exponential-of-exponential construction and the multiplicative
(Gibrat) growth process.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import LognormalModel, PowerLawModel
from .sample import DurationSample

# Engine pinned per release so seeded fixtures stay stable.
ALGORITHM_ID = "pcg64"


@dataclass(frozen=True)
class SeededGenerator:
    """Deterministic random source: same (seed, parameters, n) gives a
    bit-identical sample sequence. Substreams derived from (seed, index)
    are independent, for parallel or repeated use.
    """

    seed: int
    algorithm_id: str = ALGORITHM_ID

    def __post_init__(self):
        if self.algorithm_id != ALGORITHM_ID:
            raise ValueError(f"unknown algorithm id {self.algorithm_id!r}")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))

    def substream(self, index: int) -> np.random.Generator:
        # spawn_key keeps substream 0 distinct from the root stream
        # (appending the index to the entropy would not: trailing zeros
        # are absorbed by the seed-sequence pool).
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(index,))
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class GibratProcess:
    """Multiplicative growth S_t = a_t * S_{t-1} with log-factors
    xi_t = ln a_t drawn i.i.d. (normal by default; any sampler with
    finite variance may be plugged in).
    """

    s0: float
    steps: int
    agents: int
    xi_mean: float = 0.0
    xi_std: float = 1.0
    xi_sampler: object = None  # callable(rng, size) -> log-factors

    def __post_init__(self):
        if self.s0 <= 0:
            raise ValueError("initial size must be positive")
        if self.steps < 1:
            raise ValueError("need at least one step")
        if self.agents < 1:
            raise ValueError("need at least one agent")


def sample_lognormal(m: LognormalModel, n: int, g: SeededGenerator) -> DurationSample:
    """n i.i.d. draws of exp(N(mu, sigma**2))."""
    if n < 1:
        raise ValueError("sample size must be at least 1")
    rng = g.rng()
    values = np.exp(rng.normal(m.mu, m.sigma, size=n))
    return DurationSample(np.sort(values))


def sample_powerlaw(m: PowerLawModel, n: int, g: SeededGenerator) -> DurationSample:
    """Inverse-transform draws tau * (1-U)**(-1/(gamma-1)).

    U is uniform on [0, 1); U = 1 never occurs, so draws are finite.
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    rng = g.rng()
    u = rng.random(n)
    values = m.tau * (1.0 - u) ** (-1.0 / (m.gamma - 1.0))
    return DurationSample(np.sort(values))


def sample_exp_of_exponential(
    gamma: float, tau: float, n: int, g: SeededGenerator
) -> DurationSample:
    """X = exp(Y) with Y exponential(rate gamma-1) shifted by ln tau.

    Distributionally identical to a power-law sample with the same
    (gamma, tau): Pr[X <= t] = 1 - (t/tau)**(1-gamma).
    """
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    if tau <= 0:
        raise ValueError("tau must be positive")
    if n < 1:
        raise ValueError("sample size must be at least 1")
    rng = g.rng()
    y = rng.exponential(scale=1.0 / (gamma - 1.0), size=n)
    values = tau * np.exp(y)
    return DurationSample(np.sort(values))


def run_gibrat(p: GibratProcess, g: SeededGenerator) -> np.ndarray:
    """Run the multiplicative process for every agent.

    Returns sizes of shape (agents, steps + 1); column 0 is S_0.
    Sizes are accumulated in log-space, so ln S_t is exactly
    ln S_0 + sum of the log-factors.
    """
    rng = g.rng()
    if p.xi_sampler is not None:
        xi = np.asarray(p.xi_sampler(rng, (p.agents, p.steps)), dtype=float)
    else:
        xi = rng.normal(p.xi_mean, p.xi_std, size=(p.agents, p.steps))
    log_sizes = np.empty((p.agents, p.steps + 1))
    log_sizes[:, 0] = np.log(p.s0)
    np.cumsum(xi, axis=1, out=log_sizes[:, 1:])
    log_sizes[:, 1:] += np.log(p.s0)
    return np.exp(log_sizes)
