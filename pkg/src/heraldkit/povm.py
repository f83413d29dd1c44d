"""Single-photon POVM element of the tree-modeled number-resolving detector.

The detector is a uniform splitter over N = 2^k ports with a threshold
detector on each port.  Its single-photon outcome ("exactly one port
clicks") is diagonal in the Fock basis; the coefficient for an n-photon
input is the chance that at least one photon survives the detection
efficiency and every survivor lands on one common port.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .errors import DivergentSumError, ParameterError


@dataclass(frozen=True)
class PovmElement:
    """Diagonal Fock-basis coefficients c_n of the single-photon outcome.

    ``coeffs[n]`` is c_n, with c_0 = 0 (no dark counts are modeled).
    ``normalized`` records whether the coefficients were rescaled to sum to
    one over n >= 1; the raw (unnormalized) element has c_1 equal to the
    detector efficiency.  ``eta`` and ``tree_depth`` are kept so series
    tails can be evaluated in closed form.
    """

    coeffs: np.ndarray
    eta: float
    tree_depth: float
    normalized: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size < 2:
            raise ParameterError("coeffs must cover at least n = 0, 1")
        if c[0] != 0.0:
            raise ParameterError("c_0 must be zero")
        if np.any(c < 0) or np.any(c > 1):
            raise ParameterError("coefficients must lie in [0, 1]")
        if self.normalized and abs(c.sum() - 1.0) > 1e-12:
            raise ParameterError("normalized element must sum to 1")
        object.__setattr__(self, "coeffs", c)

    @property
    def n_max(self) -> int:
        return self.coeffs.size - 1


def pi_one_coefficients(eta: float, tree_depth: float, n_max: int = 12) -> PovmElement:
    """Unnormalized coefficients c_n for n = 0..n_max.

    c_n = sum_{m=1}^{n} C(n, m) eta^m (1-eta)^(n-m) N^(1-m) with N = 2^k:
    m survivors out of n, all routed to one common port.  A real-valued
    tree depth is allowed; N is then simply 2^k.
    """
    if not 0.0 <= eta <= 1.0:
        raise ParameterError("eta must be in [0, 1]")
    if tree_depth < 0:
        raise ParameterError("tree_depth must be >= 0")
    if n_max < 6:
        raise ParameterError("n_max must be >= 6")
    n_ports = 2.0 ** tree_depth
    c = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        m = np.arange(1, n + 1)
        c[n] = np.sum(
            comb(n, m) * eta ** m * (1.0 - eta) ** (n - m) * n_ports ** (1.0 - m)
        )
    return PovmElement(c, eta=eta, tree_depth=tree_depth, normalized=False)


def normalize_pi_one(element: PovmElement) -> PovmElement:
    """Rescale so the stored coefficients sum to one (display convention).

    Accuracy of the leading normalized coefficients needs the stored range
    to carry most of the series weight; n_max >= 9 suffices at the
    parameters of interest.
    """
    if element.normalized:
        return element
    total = element.coeffs.sum()
    if total <= 0:
        raise ParameterError("cannot normalize an all-zero element")
    return PovmElement(
        element.coeffs / total,
        eta=element.eta,
        tree_depth=element.tree_depth,
        normalized=True,
    )


def _geometric_tail(element: PovmElement, n_from: int) -> float:
    """Exact sum of the unnormalized c_n for n >= n_from.

    c_n = N (a^n - b^n) with a = 1 - eta (1 - 1/N) and b = 1 - eta, both
    below one for k > 0, so the tail is a pair of geometric series.
    """
    if element.eta == 0.0:
        return 0.0
    n_ports = 2.0 ** element.tree_depth
    a = 1.0 - element.eta * (1.0 - 1.0 / n_ports)
    b = 1.0 - element.eta
    if a >= 1.0:
        raise DivergentSumError(
            "the coefficient series diverges for tree depth 0 (threshold case)"
        )
    tail = n_ports * a ** n_from / (1.0 - a)
    if b > 0.0:
        tail -= n_ports * b ** n_from / (1.0 - b)
    return float(tail)


def eta_pnr(element: PovmElement, n_max: int | None = None) -> float:
    """Single-photon discrimination efficiency.

    Trace-norm closeness of the element to the ideal projector onto one
    photon: 1 - [(1 - c_1) + sum_{n>=2} c_n] / 2, with the sum taken to
    convergence (the stored range plus the closed-form geometric tail,
    which is below 1e-6 at the default n_max for the parameters of
    interest).  Requires the unnormalized element; the series diverges at
    tree depth 0, where the quantity is undefined.

    Raises:
        DivergentSumError: tree depth is 0.
        ParameterError: the element was normalized.
    """
    if element.normalized:
        raise ParameterError("eta_pnr is defined on the unnormalized element")
    if element.tree_depth <= 0:
        raise DivergentSumError(
            "the coefficient series diverges for tree depth 0 (threshold case)"
        )
    stop = element.n_max if n_max is None else min(n_max, element.n_max)
    c1 = element.coeffs[1]
    partial = element.coeffs[2 : stop + 1].sum()
    tail = _geometric_tail(element, stop + 1)
    return float(1.0 - 0.5 * ((1.0 - c1) + partial + tail))
