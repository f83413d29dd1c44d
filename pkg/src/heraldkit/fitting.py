"""Parameter recovery from count data across pump-power settings.

Efficiencies come from low-power Klyshko-style ratios of singles and
twofold coincidences; the mean pair number per setting from a monotone
root find on the threshold threefold rate; the effective tree depth from a
weighted least-squares fit of the single-photon-bin rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import BracketError, ParameterError, ZeroDenominatorError
from .jsi import SchmidtSpectrum
from .model import ModelParams, p_idler, p_threefold
from .tags import CountSummary

# Klyshko ratios acquire O(mu) multi-pair bias; flag settings whose
# heralding rate suggests the linear regime no longer holds.
HERALD_RATE_REGIME_MAX = 0.05
MIN_SETTINGS = 4


@dataclass(frozen=True)
class EfficiencyEstimate:
    eta_i: float
    eta_s1: float
    eta_s2: float
    eta_i_err: float
    eta_s1_err: float
    eta_s2_err: float
    out_of_regime: bool
    settings_used: int


@dataclass(frozen=True)
class TreeDepthFit:
    k: float
    residual: float


def estimate_efficiencies(settings: Sequence[CountSummary]) -> EfficiencyEstimate:
    """Channel efficiencies from the lowest-power settings.

    The 50:50 split halves each arm's conditional probability, so
    eta_sj = 2 C_isj / C_i; heralding on either arm gives
    eta_i = C_isj / C_sj.  Estimates are averaged over the four
    lowest-power settings (and both arms for eta_i) with the standard
    error across settings.

    Settings must be ordered by increasing pump power.
    """
    if len(settings) < MIN_SETTINGS:
        raise ParameterError(f"need at least {MIN_SETTINGS} settings")
    low = settings[:MIN_SETTINGS]
    s1_vals, s2_vals, i_vals = [], [], []
    out_of_regime = False
    for counts in low:
        cc = counts.threshold
        for name, value in (
            ("c_i_total", counts.c_i_total),
            ("c_s1", counts.c_s1),
            ("c_s2", counts.c_s2),
        ):
            if value == 0:
                raise ZeroDenominatorError(name, f"no singles on {name}")
        s1_vals.append(2.0 * cc.c_is1 / counts.c_i_total)
        s2_vals.append(2.0 * cc.c_is2 / counts.c_i_total)
        i_vals.append(0.5 * (cc.c_is1 / counts.c_s1 + cc.c_is2 / counts.c_s2))
        if counts.c_i_total / counts.pulses > HERALD_RATE_REGIME_MAX:
            out_of_regime = True

    def mean_err(values):
        arr = np.asarray(values)
        return float(arr.mean()), float(arr.std(ddof=1) / np.sqrt(arr.size))

    eta_s1, err_s1 = mean_err(s1_vals)
    eta_s2, err_s2 = mean_err(s2_vals)
    eta_i, err_i = mean_err(i_vals)
    return EfficiencyEstimate(
        eta_i=eta_i,
        eta_s1=eta_s1,
        eta_s2=eta_s2,
        eta_i_err=err_i,
        eta_s1_err=err_s1,
        eta_s2_err=err_s2,
        out_of_regime=out_of_regime,
        settings_used=len(low),
    )


def _params(mu, etas, k, spectrum) -> ModelParams:
    eta_i, eta_s1, eta_s2 = etas
    return ModelParams(
        mu=mu, eta_i=eta_i, eta_s1=eta_s1, eta_s2=eta_s2, k=k, spectrum=spectrum
    )


def fit_mu(
    settings: Sequence[CountSummary],
    etas: tuple,
    spectrum: SchmidtSpectrum,
    mu_max: float = 10.0,
    rtol: float = 1e-8,
) -> np.ndarray:
    """Mean pair number per setting from the threshold threefold rate.

    Solves p_threefold(mu; threshold) = C_is1s2 / pulses per setting; the
    left side is monotone in mu, so bisection on [0, mu_max] finds the
    unique root.  A setting with zero threefolds fits mu = 0.

    Raises:
        BracketError: a rate exceeds the model's reachable range
            (counts inconsistent with the efficiencies).
    """
    mus = []
    for counts in settings:
        rate = counts.threshold.c_is1s2 / counts.pulses
        if rate == 0.0:
            mus.append(0.0)
            continue

        def excess(mu):
            return p_threefold(_params(mu, etas, 0.0, spectrum), "threshold") - rate

        if excess(mu_max) < 0:
            raise BracketError(
                f"threefold rate {rate:.3e} not reachable below mu = {mu_max}"
            )
        mus.append(float(brentq(excess, 0.0, mu_max, rtol=rtol)))
    return np.asarray(mus)


def fit_tree_depth(
    settings: Sequence[CountSummary],
    mus: Sequence[float],
    eta_i: float,
    spectrum: SchmidtSpectrum,
    bounds=(0.0, 12.0),
) -> TreeDepthFit:
    """Effective tree depth from single-photon-bin rates across settings.

    Minimizes the Poisson-weighted squared residual between the measured
    single-photon-bin rate and the model's exactly-one-click probability
    at the per-setting mean pair numbers.
    """
    if len(settings) != len(mus):
        raise ParameterError("one mu per setting required")
    rates = np.array([c.c_i_single / c.pulses for c in settings])
    if np.all(rates == 0):
        raise ParameterError("all single-photon-bin rates are zero")
    weights = np.array([c.pulses for c in settings]) / np.maximum(rates, 1e-300)

    def loss(k):
        model = np.array(
            [
                p_idler(_params(mu, (eta_i, 0.0, 0.0), k, spectrum))
                for mu in mus
            ]
        )
        return float(np.sum(weights * (model - rates) ** 2))

    res = minimize_scalar(loss, bounds=bounds, method="bounded", options={"xatol": 1e-5})
    return TreeDepthFit(k=float(res.x), residual=float(res.fun))
