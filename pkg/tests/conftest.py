import numpy as np
import pytest

from heraldkit import ModelParams, SchmidtSpectrum, schmidt_decompose, synthesize_jsi

# measured chain parameters used throughout the tests
ETA_I = 0.3280
ETA_S1 = 0.1802
ETA_S2 = 0.2210
TREE_DEPTH = 2.55


@pytest.fixture(scope="session")
def calibrated_spectrum() -> SchmidtSpectrum:
    """Schmidt spectrum of the default synthesized joint spectral intensity."""
    return schmidt_decompose(synthesize_jsi())


@pytest.fixture(scope="session")
def two_mode_spectrum() -> SchmidtSpectrum:
    return SchmidtSpectrum(np.array([0.7, 0.3]))


def fitted_params(mu: float, spectrum: SchmidtSpectrum, k: float = TREE_DEPTH) -> ModelParams:
    return ModelParams(
        mu=mu, eta_i=ETA_I, eta_s1=ETA_S1, eta_s2=ETA_S2, k=k, spectrum=spectrum
    )
