"""Exact truncated Fock-space reference for the full detection chain.

This module recomputes every closed-form probability by direct enumeration
so the analytic expressions can be validated against an independent route.
Per Schmidt mode it enumerates the joint pair number up to a truncation,
propagates idler photons through loss and uniform port routing with a
dynamic-programming occupancy ladder, and signal photons through the
50:50 split plus arm losses as a three-outcome multinomial.  Modes are then
aggregated by convolving the joint distribution over (number of occupied
idler ports, arm-1 click, arm-2 click); the union of two random port sets
of known sizes follows the hypergeometric overlap law.  Every result
carries a rigorous truncation bound (the summed geometric tails).

A Monte-Carlo sampler provides a second, statistically independent route.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import ParameterError
from .jsi import SchmidtSpectrum
from .model import ProbabilitySet

DEFAULT_N_MAX = 32


@dataclass(frozen=True)
class OracleConfig:
    """Configuration of one exact evaluation.

    The tree depth must be a non-negative integer here: the enumeration
    routes photons over physically countable ports.
    """

    spectrum: SchmidtSpectrum
    mu: float
    eta_i: float
    eta_s1: float
    eta_s2: float
    k: int
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self):
        if self.mu < 0:
            raise ParameterError("mu must be >= 0")
        for name in ("eta_i", "eta_s1", "eta_s2"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ParameterError(f"{name} must be in [0, 1]")
        if self.k != int(self.k) or self.k < 0:
            raise ParameterError("k must be a non-negative integer")
        if self.n_max < 6:
            raise ParameterError("n_max must be >= 6")

    @property
    def n_ports(self) -> int:
        return 2 ** int(self.k)


@dataclass(frozen=True)
class OracleResult:
    """Exact probabilities for both detector configurations.

    ``pnr`` conditions the idler on exactly one occupied port, ``threshold``
    on at least one.  ``p_multibin`` is the chance of two or more occupied
    ports.  ``truncation_bound`` bounds the total probability mass dropped
    by the per-mode pair-number truncation.
    """

    pnr: ProbabilitySet
    threshold: ProbabilitySet
    p_multibin: float
    truncation_bound: float


def pair_distribution(mean: float, n_max: int):
    """Per-mode pair-number law of a two-mode squeezed state.

    P(n) = mean^n / (1 + mean)^(n+1), a geometric distribution.  Returns
    the probabilities for n = 0..n_max and the exact tail mass beyond.
    """
    if mean < 0:
        raise ParameterError("mean must be >= 0")
    n = np.arange(n_max + 1)
    if mean == 0.0:
        pmf = np.zeros(n_max + 1)
        pmf[0] = 1.0
        return pmf, 0.0
    pmf = np.exp(n * np.log(mean) - (n + 1.0) * np.log1p(mean))
    tail = float((mean / (1.0 + mean)) ** (n_max + 1))
    return pmf, tail


def _occupancy_ladder(n_ports: int, eta: float, n_max: int) -> np.ndarray:
    """dp[n, j] = P(exactly j ports occupied | n photons offered).

    Photon by photon: a photon is lost with 1 - eta, lands on an already
    occupied port with eta * j / N, or occupies a new one.
    """
    dp = np.zeros((n_max + 1, n_ports + 1))
    dp[0, 0] = 1.0
    j = np.arange(n_ports + 1)
    stay = (1.0 - eta) + eta * j / n_ports
    grow = eta * (n_ports - j + 1.0) / n_ports
    for n in range(1, n_max + 1):
        dp[n] = dp[n - 1] * stay
        dp[n, 1:] += dp[n - 1, :-1] * grow[1:]
    return dp


def _mode_joint(pair_mean, eta_i, p_arm1, p_arm2, n_ports, n_max):
    """Joint (occupied ports, arm-1 click, arm-2 click) for one mode."""
    pmf, tail = pair_distribution(pair_mean, n_max)
    occ = _occupancy_ladder(n_ports, eta_i, n_max)
    n = np.arange(n_max + 1)
    v1 = (1.0 - p_arm1) ** n
    v2 = (1.0 - p_arm2) ** n
    v12 = (1.0 - p_arm1 - p_arm2) ** n
    # arm[n, a1, a2]; a = 0 means no click on that arm
    arm = np.empty((n_max + 1, 2, 2))
    arm[:, 0, 0] = v12
    arm[:, 0, 1] = v1 - v12
    arm[:, 1, 0] = v2 - v12
    arm[:, 1, 1] = 1.0 - v1 - v2 + v12
    joint = np.einsum("n,nj,nab->jab", pmf, occ, arm)
    return joint, tail


def _union_table(n_ports: int) -> np.ndarray:
    """u_table[a, b, u] = P(|A u B| = u) for independent uniform random
    port sets of sizes a and b (hypergeometric overlap)."""
    table = np.zeros((n_ports + 1, n_ports + 1, n_ports + 1))
    for a in range(n_ports + 1):
        for b in range(n_ports + 1):
            denom = comb(n_ports, b)
            for i in range(max(0, a + b - n_ports), min(a, b) + 1):
                table[a, b, a + b - i] = comb(a, i) * comb(n_ports - a, b - i) / denom
    return table


def _combine(j1: np.ndarray, j2: np.ndarray, u_table: np.ndarray) -> np.ndarray:
    """Convolve two independent mode contributions.

    Port sets union (sizes via the hypergeometric table); a combined arm
    clicks when either contribution clicked.
    """
    n_ports = j1.shape[0] - 1
    out = np.zeros_like(j1)
    for a1 in range(2):
        for b1 in range(2):
            for a2 in range(2):
                for b2 in range(2):
                    mix = np.einsum(
                        "a,b,abu->u", j1[:, a1, b1], j2[:, a2, b2], u_table
                    )
                    out[:, a1 | a2, b1 | b2] += mix
    return out


def exact_probabilities(cfg: OracleConfig) -> OracleResult:
    """Enumerate the full chain and return both configurations' statistics."""
    n_ports = cfg.n_ports
    u_table = _union_table(n_ports)
    joint = None
    bound = 0.0
    for lam in cfg.spectrum.lambdas:
        mode, tail = _mode_joint(
            lam * cfg.mu,
            cfg.eta_i,
            cfg.eta_s1 / 2.0,
            cfg.eta_s2 / 2.0,
            n_ports,
            cfg.n_max,
        )
        bound += tail
        joint = mode if joint is None else _combine(joint, mode, u_table)

    def pset(sel) -> ProbabilitySet:
        return ProbabilitySet(
            p_i=float(joint[sel].sum()),
            p_is1=float(joint[sel, 1, :].sum()),
            p_is2=float(joint[sel, :, 1].sum()),
            p_is1s2=float(joint[sel, 1, 1].sum()),
        )

    return OracleResult(
        pnr=pset(np.s_[1:2]),
        threshold=pset(np.s_[1:]),
        p_multibin=float(joint[2:].sum()),
        truncation_bound=float(bound),
    )


def povm_click_probability(n_photons: int, eta: float, k: int) -> float:
    """Exact P(exactly one of 2^k ports clicks | n photons offered)."""
    if n_photons < 0 or k < 0 or int(k) != k:
        raise ParameterError("need n_photons >= 0 and integer k >= 0")
    if not 0.0 <= eta <= 1.0:
        raise ParameterError("eta must be in [0, 1]")
    dp = _occupancy_ladder(2 ** int(k), eta, n_photons)
    return float(dp[n_photons, 1])


def total_pair_pmf(spectrum: SchmidtSpectrum, mu: float, tol: float = 1e-12):
    """Distribution of the pulse's total pair number across all modes.

    Convolution of the per-mode geometric laws, truncated once the summed
    tail falls below ``tol``.  Shared by the Monte-Carlo sampler and the
    tag-stream generator.
    """
    if mu < 0:
        raise ParameterError("mu must be >= 0")
    if mu == 0.0:
        return np.array([1.0])
    n_max = 8
    while True:
        total = np.array([1.0])
        dropped = 0.0
        for lam in spectrum.lambdas:
            pmf, tail = pair_distribution(lam * mu, n_max)
            dropped += tail
            total = np.convolve(total, pmf)[: n_max + 1]
        if dropped < tol or n_max > 4096:
            break
        n_max *= 2
    return total / total.sum()


@dataclass(frozen=True)
class MonteCarloResult:
    """Sampled click statistics with per-probability standard errors."""

    pnr: ProbabilitySet
    threshold: ProbabilitySet
    p_multibin: float
    shots: int

    def standard_error(self, p: float) -> float:
        return float(np.sqrt(max(p * (1.0 - p), 0.0) / self.shots))


def sample_pulses(cfg: OracleConfig, shots: int, rng: np.random.Generator):
    """Sample per-pulse outcomes: occupied idler ports and arm photon counts.

    Returns (clicks, s1, s2) integer arrays of length ``shots``.
    """
    n_ports = cfg.n_ports
    pmf = total_pair_pmf(cfg.spectrum, cfg.mu)
    n = rng.choice(pmf.size, size=shots, p=pmf)

    p1 = cfg.eta_s1 / 2.0  # both arm probabilities are <= 1/2
    p2 = cfg.eta_s2 / 2.0
    s1 = rng.binomial(n, p1)
    s2 = rng.binomial(n - s1, p2 / (1.0 - p1))

    survivors = rng.binomial(n, cfg.eta_i)
    clicks = np.zeros(shots, dtype=np.int64)
    hit = np.flatnonzero(survivors)
    if hit.size:
        rows = np.repeat(np.arange(hit.size), survivors[hit])
        ports = rng.integers(0, n_ports, size=rows.size)
        occupied = np.zeros((hit.size, n_ports), dtype=bool)
        occupied[rows, ports] = True
        clicks[hit] = occupied.sum(axis=1)
    return clicks, s1, s2


def monte_carlo_probabilities(
    cfg: OracleConfig, shots: int, seed: int
) -> MonteCarloResult:
    """Monte-Carlo estimate of the same statistics (explicit 64-bit seed)."""
    if shots < 1:
        raise ParameterError("shots must be positive")
    rng = np.random.default_rng(np.uint64(seed))
    clicks, s1, s2 = sample_pulses(cfg, shots, rng)

    def pset(idler_mask) -> ProbabilitySet:
        return ProbabilitySet(
            p_i=float(idler_mask.mean()),
            p_is1=float((idler_mask & (s1 > 0)).mean()),
            p_is2=float((idler_mask & (s2 > 0)).mean()),
            p_is1s2=float((idler_mask & (s1 > 0) & (s2 > 0)).mean()),
        )

    return MonteCarloResult(
        pnr=pset(clicks == 1),
        threshold=pset(clicks >= 1),
        p_multibin=float((clicks >= 2).mean()),
        shots=shots,
    )
