"""Composite Gauss-Legendre quadrature with cumulative evaluation.

The geometry and reduction modules need running integrals
``I(s) = int_0^s f`` of smooth functions at many points at once.  A
:class:`CumulativeQuadrature` stores the integral at a fixed set of
breakpoints and finishes each request with one Gauss-Legendre rule on the
partial panel, so every evaluation is fully vectorised.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

ArrayFunc = Callable[[np.ndarray], np.ndarray]


class CumulativeQuadrature:
    """Running integral of a smooth function on ``[breaks[0], breaks[-1]]``.

    Parameters
    ----------
    func : callable
        Vectorised integrand.  It is only evaluated strictly inside panels,
        so integrable endpoint behaviour that is merely ill-conditioned
        (difference quotients) is harmless.
    breaks : array_like
        Increasing panel boundaries.
    order : int
        Number of Gauss-Legendre nodes per panel.
    """

    def __init__(self, func: ArrayFunc, breaks, order: int = 20):
        self.func = func
        self.breaks = np.asarray(breaks, dtype=float)
        if self.breaks.ndim != 1 or self.breaks.size < 2:
            raise ValueError("need at least two breakpoints")
        if np.any(np.diff(self.breaks) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        self.nodes, self.weights = np.polynomial.legendre.leggauss(order)
        a, b = self.breaks[:-1], self.breaks[1:]
        panel = self._rule(a, b)
        self.cumulative = np.concatenate([[0.0], np.cumsum(panel)])

    def _rule(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        half = 0.5 * (b - a)
        pts = (0.5 * (a + b))[..., None] + half[..., None] * self.nodes
        vals = self.func(pts.ravel()).reshape(pts.shape)
        return half * (vals @ self.weights)

    @property
    def lower(self) -> float:
        return float(self.breaks[0])

    @property
    def upper(self) -> float:
        return float(self.breaks[-1])

    @property
    def total(self) -> float:
        return float(self.cumulative[-1])

    def __call__(self, s) -> np.ndarray:
        """Return ``int_{breaks[0]}^s func`` for each entry of ``s``."""
        s = np.asarray(s, dtype=float)
        flat = s.ravel()
        slack = 1e-12 * max(abs(self.lower), abs(self.upper))
        if flat.size and (flat.min() < self.lower - slack
                          or flat.max() > self.upper + slack):
            raise ValueError("evaluation point outside the quadrature range")
        flat = np.clip(flat, self.lower, self.upper)
        idx = np.clip(np.searchsorted(self.breaks, flat, side="right") - 1,
                      0, self.breaks.size - 2)
        left = self.breaks[idx]
        out = self.cumulative[idx] + self._rule(left, flat)
        return out.reshape(s.shape)


def graded_breaks(upper: float, n_uniform: int = 64, n_graded: int = 0,
                  grade_from: float = 1e-6) -> np.ndarray:
    """Breakpoints on ``[0, upper]``: uniform, optionally refined near 0."""
    uni = np.linspace(0.0, upper, n_uniform + 1)
    if n_graded <= 0:
        return uni
    first = uni[1]
    graded = np.geomspace(grade_from * first, first, n_graded, endpoint=False)
    return np.unique(np.concatenate([[0.0], graded, uni[1:]]))
