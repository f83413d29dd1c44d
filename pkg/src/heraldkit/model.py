"""Closed-form click and coincidence statistics of the heralded source.

Each Schmidt mode s carries an independent two-mode squeezed vacuum with
mean pair number lambda_s * mu.  The idler beam passes a path efficiency
eta_i into a photon-number-resolving detector modeled as a uniform splitter
over N = 2^k ports with a threshold detector on each port; the signal beam
is split 50:50 into two arms with path efficiencies eta_s1 and eta_s2.

Because every measured operator is diagonal in photon number, each
probability is an alternating sum of products over Schmidt modes, one
product per combination of vacuum projectors.  The "exactly one port
clicks" outcome is the difference between leaving one port unobserved and
projecting all ports on vacuum, scaled by the number of ports.  Those
differences of near-unity products cancel catastrophically at small mu, so
the evaluator works in extended precision with log1p/expm1 throughout and
uses the algebraic identity

    d_all - d_rest = m * eta_i * 2^-k * (1 - w)

for the per-mode log-ratio, which keeps full relative accuracy for any
tree depth (k = 60 loses none of the leading digits).

The threshold-detector configuration is the k = 0 limit of every formula.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError, ParameterError, ZeroDenominatorError
from .jsi import SchmidtSpectrum

Config = Literal["pnr", "threshold"]


@dataclass(frozen=True)
class ModelParams:
    """Source and detection-chain parameters.

    mu: mean pair number per pulse, summed over Schmidt modes.
    eta_i, eta_s1, eta_s2: path efficiencies including detection.
    k: splitter-tree depth of the number-resolving detector (real valued;
       the fitted effective depth need not be an integer).
    """

    mu: float
    eta_i: float
    eta_s1: float
    eta_s2: float
    k: float
    spectrum: SchmidtSpectrum

    def __post_init__(self):
        if self.mu < 0:
            raise ParameterError("mu must be >= 0")
        for name in ("eta_i", "eta_s1", "eta_s2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ParameterError(f"{name} must be in [0, 1]")
        if self.k < 0:
            raise ParameterError("k must be >= 0")

    def with_mu(self, mu: float) -> "ModelParams":
        return replace(self, mu=mu)


@dataclass(frozen=True)
class ProbabilitySet:
    """Herald, twofold and threefold probabilities for one configuration."""

    p_i: float
    p_is1: float
    p_is2: float
    p_is1s2: float

    def check_ordering(self, tol: float = 1e-12) -> bool:
        """0 <= p_is1s2 <= min(p_is1, p_is2) <= p_i <= 1."""
        return (
            -tol <= self.p_is1s2 <= min(self.p_is1, self.p_is2) + tol
            and max(self.p_is1, self.p_is2) <= self.p_i + tol
            and self.p_i <= 1.0 + tol
        )


def _click_and_arms(lambdas, mu, eta_i, k, arm_ps) -> float:
    """P(exactly one tree port clicks and every arm in ``arm_ps`` clicks).

    ``arm_ps`` holds the per-photon catch probabilities of the required
    signal arms (eta_sj / 2 each).  Inclusion-exclusion runs over the arm
    vacuum projectors; for each term the port-exclusion difference is
    evaluated as F * (1 - exp(-D)) with F the rest-off product and D the
    exact log-ratio sum, all in extended precision.
    """
    lam = np.asarray(lambdas, dtype=np.longdouble)
    m = lam * np.longdouble(mu)
    eta = np.longdouble(eta_i)
    n_inv = np.exp2(np.longdouble(-k))  # 1/N
    beta = np.longdouble(1.0) - n_inv  # (N-1)/N
    total = np.longdouble(0.0)
    for r in range(len(arm_ps) + 1):
        for subset in combinations(arm_ps, r):
            w = np.longdouble(sum(subset))
            sign = -1.0 if r % 2 else 1.0
            d_rest = m * (beta * eta) + m * w * (1.0 - beta * eta)
            log_f = -np.sum(np.log1p(d_rest))
            delta = m * eta * n_inv * (1.0 - w) / (1.0 + d_rest)
            d_gap = np.sum(np.log1p(delta))
            total += sign * np.exp(log_f) * (-np.expm1(-d_gap))
    return float(np.exp2(np.longdouble(k)) * total)


def _arm_ps(params: ModelParams, arms) -> tuple:
    catch = {1: params.eta_s1 / 2.0, 2: params.eta_s2 / 2.0}
    return tuple(catch[a] for a in arms)


def p_idler(params: ModelParams) -> float:
    """Probability that the number-resolving detector reports exactly one photon.

    Equals 2^k times the difference between the product over modes of
    2^k / (2^k + (2^k - 1) lambda mu eta_i) and the product of
    1 / (1 + lambda mu eta_i).
    """
    return _click_and_arms(params.spectrum.lambdas, params.mu, params.eta_i, params.k, ())


def p_idler_threshold(params: ModelParams) -> float:
    """Probability of any idler click: 1 - prod_s 1/(1 + lambda_s mu eta_i)."""
    m = params.spectrum.lambdas.astype(np.longdouble) * np.longdouble(params.mu)
    return float(-np.expm1(-np.sum(np.log1p(m * np.longdouble(params.eta_i)))))


def p_idler_multibin(params: ModelParams) -> float:
    """Probability of a multi-photon report: any click minus a single click."""
    return p_idler_threshold(params) - p_idler(params)


def p_signal(params: ModelParams, which_signal: int) -> float:
    """Probability that signal arm 1 or 2 registers at least one photon."""
    if which_signal not in (1, 2):
        raise ParameterError("which_signal must be 1 or 2")
    (w,) = _arm_ps(params, (which_signal,))
    m = params.spectrum.lambdas.astype(np.longdouble) * np.longdouble(params.mu)
    return float(-np.expm1(-np.sum(np.log1p(m * np.longdouble(w)))))


def _effective_k(params: ModelParams, config: Config) -> float:
    if config == "pnr":
        return params.k
    if config == "threshold":
        return 0.0
    raise ParameterError(f"unknown configuration {config!r}")


def p_twofold(params: ModelParams, which_signal: int, config: Config = "pnr") -> float:
    """Idler and signal-j coincidence probability."""
    if which_signal not in (1, 2):
        raise ParameterError("which_signal must be 1 or 2")
    return _click_and_arms(
        params.spectrum.lambdas,
        params.mu,
        params.eta_i,
        _effective_k(params, config),
        _arm_ps(params, (which_signal,)),
    )


def p_threefold(params: ModelParams, config: Config = "pnr") -> float:
    """Idler, signal-1 and signal-2 coincidence probability.

    The eight-product alternating sum; the four terms with the idler-vacuum
    projector mirror the four rest-off terms exactly (same arm factors with
    the port fraction replaced by one), which the evaluator exploits.
    """
    return _click_and_arms(
        params.spectrum.lambdas,
        params.mu,
        params.eta_i,
        _effective_k(params, config),
        _arm_ps(params, (1, 2)),
    )


def probability_set(params: ModelParams, config: Config = "pnr") -> ProbabilitySet:
    """All four probabilities of one detector configuration."""
    k_eff = _effective_k(params, config)
    lam = params.spectrum.lambdas
    args = (lam, params.mu, params.eta_i, k_eff)
    return ProbabilitySet(
        p_i=_click_and_arms(*args, ()),
        p_is1=_click_and_arms(*args, _arm_ps(params, (1,))),
        p_is2=_click_and_arms(*args, _arm_ps(params, (2,))),
        p_is1s2=_click_and_arms(*args, _arm_ps(params, (1, 2))),
    )


def g2(params: ModelParams, config: Config = "pnr") -> float:
    """Heralded cross-correlation (p_is1s2 * p_i) / (p_is1 * p_is2)."""
    ps = probability_set(params, config)
    if ps.p_is1 <= 0.0:
        raise ZeroDenominatorError("p_is1")
    if ps.p_is2 <= 0.0:
        raise ZeroDenominatorError("p_is2")
    return ps.p_is1s2 * ps.p_i / (ps.p_is1 * ps.p_is2)


def mu_for_g2(
    target_g2: float,
    params: ModelParams,
    config: Config = "pnr",
    bracket=(1e-8, 1.0),
    rtol: float = 1e-6,
) -> float:
    """Invert g2(mu) = target over the bracket by bisection.

    g2 is monotone increasing in mu over the search range, so the root is
    unique when it exists.  ``params.mu`` is ignored.

    Raises:
        BracketError: target outside [g2(lo), g2(hi)].
    """
    lo, hi = bracket
    g_lo = g2(params.with_mu(lo), config)
    g_hi = g2(params.with_mu(hi), config)
    if not g_lo < target_g2 < g_hi:
        raise BracketError(
            f"target {target_g2} outside achievable range [{g_lo:.3e}, {g_hi:.3e}]"
        )
    return float(
        brentq(
            lambda mu: g2(params.with_mu(mu), config) - target_g2,
            lo,
            hi,
            rtol=rtol,
        )
    )


def multiplexed_success(p_single: float, modes: int) -> float:
    """Success probability of ``modes`` independent attempts: 1 - (1-p)^M."""
    if not 0.0 <= p_single <= 1.0:
        raise ParameterError("p_single must be in [0, 1]")
    if modes < 1:
        raise ParameterError("modes must be a positive integer")
    if p_single == 1.0:
        return 1.0
    return float(-np.expm1(modes * np.log1p(-p_single)))
