import numpy as np
import pytest

from heraldkit import (
    BracketError,
    CoincidenceCounts,
    CountSummary,
    ModelParams,
    ParameterError,
    SchmidtSpectrum,
    ZeroDenominatorError,
    counts_from_truth,
    estimate_efficiencies,
    fit_mu,
    fit_tree_depth,
    generate_run,
    p_idler,
    p_idler_multibin,
    p_idler_threshold,
    p_signal,
    p_threefold,
    p_twofold,
)
from conftest import ETA_I, ETA_S1, ETA_S2, TREE_DEPTH


def expected_counts(mu, etas, k, spectrum, pulses) -> CountSummary:
    """Deterministic synthetic data: expectation values rounded to counts."""
    eta_i, eta_s1, eta_s2 = etas
    p = ModelParams(
        mu=mu, eta_i=eta_i, eta_s1=eta_s1, eta_s2=eta_s2, k=k, spectrum=spectrum
    )

    def n(prob):
        return int(round(prob * pulses))

    return CountSummary(
        pulses=pulses,
        c_i_single=n(p_idler(p)),
        c_i_multi=n(p_idler_multibin(p)),
        c_s1=n(p_signal(p, 1)),
        c_s2=n(p_signal(p, 2)),
        threshold=CoincidenceCounts(
            n(p_twofold(p, 1, "threshold")),
            n(p_twofold(p, 2, "threshold")),
            n(p_threefold(p, "threshold")),
        ),
        pnr_single=CoincidenceCounts(
            n(p_twofold(p, 1)), n(p_twofold(p, 2)), n(p_threefold(p))
        ),
    )


def synthetic_sweep(mus, etas, k, spectrum, pulses):
    return [expected_counts(mu, etas, k, spectrum, pulses) for mu in mus]


FITTED = (ETA_I, ETA_S1, ETA_S2)
LOW_MUS = (1e-3, 2e-3, 3e-3, 4e-3)


# ------------------------------------------------------------- efficiencies

def test_efficiency_round_trip_at_fitted_values(calibrated_spectrum):
    data = synthetic_sweep(LOW_MUS, FITTED, TREE_DEPTH, calibrated_spectrum, 10 ** 9)
    est = estimate_efficiencies(data)
    assert est.eta_i == pytest.approx(ETA_I, rel=0.02)
    assert est.eta_s1 == pytest.approx(ETA_S1, rel=0.02)
    assert est.eta_s2 == pytest.approx(ETA_S2, rel=0.02)
    assert not est.out_of_regime


def test_efficiency_perfect_channels_approach_one():
    spec = SchmidtSpectrum(np.array([1.0]))
    data = synthetic_sweep((1e-4, 2e-4, 3e-4, 4e-4), (1.0, 1.0, 1.0), 2.0, spec, 10 ** 10)
    est = estimate_efficiencies(data)
    for value in (est.eta_i, est.eta_s1, est.eta_s2):
        assert value == pytest.approx(1.0, abs=0.01)


def test_efficiency_bias_flagged_out_of_regime(calibrated_spectrum):
    data = synthetic_sweep((0.5, 0.6, 0.7, 0.8), FITTED, TREE_DEPTH, calibrated_spectrum, 10 ** 8)
    est = estimate_efficiencies(data)
    assert est.out_of_regime
    assert abs(est.eta_s1 / ETA_S1 - 1.0) > 0.02  # the documented multi-pair bias


def test_efficiency_requires_four_settings(calibrated_spectrum):
    data = synthetic_sweep(LOW_MUS[:3], FITTED, TREE_DEPTH, calibrated_spectrum, 10 ** 9)
    with pytest.raises(ParameterError):
        estimate_efficiencies(data)


def test_efficiency_requires_singles():
    zero = CountSummary(
        pulses=1000,
        c_i_single=0,
        c_i_multi=0,
        c_s1=0,
        c_s2=0,
        threshold=CoincidenceCounts(0, 0, 0),
        pnr_single=CoincidenceCounts(0, 0, 0),
    )
    with pytest.raises(ZeroDenominatorError):
        estimate_efficiencies([zero] * 4)


# ----------------------------------------------------------------- mean mu

def test_fit_mu_round_trip(calibrated_spectrum):
    # the lowest setting has a threefold rate near 6e-9, so the pulse count
    # must be large enough that count quantization stays below 2%
    mus = (1e-3, 1e-2, 0.1, 0.5)
    data = synthetic_sweep(mus, FITTED, 0.0, calibrated_spectrum, 10 ** 12)
    recovered = fit_mu(data, FITTED, calibrated_spectrum)
    assert np.all(np.abs(recovered / np.asarray(mus) - 1.0) < 0.02)


def test_fit_mu_zero_threefolds_is_vacuum(calibrated_spectrum):
    data = synthetic_sweep((0.0,), FITTED, 0.0, calibrated_spectrum, 10 ** 6)
    assert fit_mu(data, FITTED, calibrated_spectrum)[0] == 0.0


def test_fit_mu_monotone_in_power(calibrated_spectrum):
    mus = np.geomspace(2e-3, 0.5, 8)
    data = synthetic_sweep(mus, FITTED, 0.0, calibrated_spectrum, 10 ** 9)
    recovered = fit_mu(data, FITTED, calibrated_spectrum)
    assert np.all(np.diff(recovered) > 0)


def test_fit_mu_scale_consistent(calibrated_spectrum):
    counts = expected_counts(0.05, FITTED, 0.0, calibrated_spectrum, 10 ** 8)
    doubled = counts + counts
    a = fit_mu([counts], FITTED, calibrated_spectrum)[0]
    b = fit_mu([doubled], FITTED, calibrated_spectrum)[0]
    assert a == pytest.approx(b, rel=1e-9)


def test_fit_mu_unreachable_rate(calibrated_spectrum):
    bogus = CountSummary(
        pulses=100,
        c_i_single=90,
        c_i_multi=0,
        c_s1=90,
        c_s2=90,
        threshold=CoincidenceCounts(90, 90, 90),
        pnr_single=CoincidenceCounts(90, 90, 90),
    )
    with pytest.raises(BracketError):
        fit_mu([bogus], FITTED, calibrated_spectrum, mu_max=1.0)


# -------------------------------------------------------------- tree depth

def test_fit_tree_depth_integer_round_trip(calibrated_spectrum):
    mus = (0.05, 0.1, 0.2, 0.4)
    data = synthetic_sweep(mus, FITTED, 2.0, calibrated_spectrum, 10 ** 10)
    fit = fit_tree_depth(data, mus, ETA_I, calibrated_spectrum)
    assert abs(fit.k - 2.0) <= 0.1


def test_fit_tree_depth_threshold_round_trip(calibrated_spectrum):
    mus = (0.05, 0.1, 0.2, 0.4)
    data = synthetic_sweep(mus, FITTED, 0.0, calibrated_spectrum, 10 ** 10)
    fit = fit_tree_depth(data, mus, ETA_I, calibrated_spectrum)
    assert fit.k <= 0.1


def test_fit_tree_depth_paper_regime(calibrated_spectrum):
    mus = (0.05, 0.1, 0.2, 0.4)
    data = synthetic_sweep(mus, FITTED, TREE_DEPTH, calibrated_spectrum, 10 ** 10)
    fit = fit_tree_depth(data, mus, ETA_I, calibrated_spectrum)
    assert fit.k == pytest.approx(TREE_DEPTH, abs=0.1)


def test_fit_tree_depth_objective_unimodal(calibrated_spectrum):
    # scan the objective before trusting the bounded 1-d minimizer
    mus = (0.05, 0.1, 0.2, 0.4)
    data = synthetic_sweep(mus, FITTED, TREE_DEPTH, calibrated_spectrum, 10 ** 10)
    rates = np.array([c.c_i_single / c.pulses for c in data])
    ks = np.linspace(0.0, 12.0, 49)

    def loss(k):
        model = np.array(
            [
                p_idler(
                    ModelParams(
                        mu=mu,
                        eta_i=ETA_I,
                        eta_s1=0.0,
                        eta_s2=0.0,
                        k=k,
                        spectrum=calibrated_spectrum,
                    )
                )
                for mu in mus
            ]
        )
        return float(np.sum((model - rates) ** 2))

    values = np.array([loss(k) for k in ks])
    sign_changes = np.sum(np.diff(np.sign(np.diff(values))) != 0)
    assert sign_changes <= 1  # single interior minimum


def test_fit_tree_depth_rejects_degenerate_data(calibrated_spectrum):
    zero = CountSummary(
        pulses=1000,
        c_i_single=0,
        c_i_multi=0,
        c_s1=0,
        c_s2=0,
        threshold=CoincidenceCounts(0, 0, 0),
        pnr_single=CoincidenceCounts(0, 0, 0),
    )
    with pytest.raises(ParameterError):
        fit_tree_depth([zero, zero], [0.1, 0.2], ETA_I, calibrated_spectrum)


# --------------------------------------------------------- sampled variant

def test_monte_carlo_fit_round_trip():
    # statistical version on generated tag data; tolerances follow the
    # Poisson noise of the counts (the singles rate moves by only about
    # one percent per unit of tree depth, so k is the loosest)
    spec = SchmidtSpectrum(np.array([0.7, 0.3]))
    etas = (0.5, 0.3, 0.4)
    mus = (0.05, 0.1, 0.2, 0.4)
    data = []
    for i, mu in enumerate(mus):
        params = ModelParams(
            mu=mu, eta_i=0.5, eta_s1=0.3, eta_s2=0.4, k=2, spectrum=spec
        )
        _, truth = generate_run(params, 4_000_000, seed=500 + i)
        data.append(counts_from_truth(truth))
    recovered = fit_mu(data, etas, spec)
    assert np.all(np.abs(recovered / np.asarray(mus) - 1.0) < 0.03)
    depth = fit_tree_depth(data, recovered, 0.5, spec)
    assert depth.k == pytest.approx(2.0, abs=0.75)
