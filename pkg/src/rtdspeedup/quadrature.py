"""Globally adaptive Gauss-Legendre quadrature with interval bisection."""
from __future__ import annotations

import heapq
from functools import lru_cache

import numpy as np


class QuadratureError(RuntimeError):
    def __init__(self, message, value, abserr):
        super().__init__(f"{message} (estimate={value!r}, abserr={abserr:.3g})")
        self.value = value
        self.abserr = abserr


@lru_cache(maxsize=None)
def _nodes(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _gl(f, a, b, order):
    x, w = _nodes(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * float(np.dot(w, f(mid + half * x)))


def _panel(f, a, b, order):
    whole = _gl(f, a, b, order)
    m = 0.5 * (a + b)
    left = _gl(f, a, m, order)
    right = _gl(f, m, b, order)
    fine = left + right
    return fine, abs(fine - whole)


def adaptive_gauss_legendre(f, a, b, *, rtol=1e-8, atol=0.0, order=15,
                            breakpoints=(), max_intervals=5000):
    """Integrate a vectorized ``f`` over the finite interval [a, b].

    Each panel is estimated by ``order``-point Gauss-Legendre on its two
    halves; the difference from the single-panel rule is the error estimate.
    The panel with the largest error is bisected until the summed error is
    below ``max(atol, rtol * |integral|)``.

    Returns ``(value, abserr)``; raises :class:`QuadratureError` when the
    interval budget runs out.
    """
    if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
        raise ValueError(f"need a finite interval with a < b, got [{a}, {b}]")
    pts = sorted({a, b, *(p for p in breakpoints if a < p < b)})
    heap = []
    total = 0.0
    err = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        v, e = _panel(f, lo, hi, order)
        heapq.heappush(heap, (-e, lo, hi, v))
        total += v
        err += e
    while err > max(atol, rtol * abs(total)):
        if len(heap) >= max_intervals:
            raise QuadratureError("quadrature did not converge", total, err)
        neg_e, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise QuadratureError("interval became too small to bisect", total, err)
        total -= v
        err += neg_e
        for s, t in ((lo, mid), (mid, hi)):
            v2, e2 = _panel(f, s, t, order)
            heapq.heappush(heap, (-e2, s, t, v2))
            total += v2
            err += e2
    # resum to shed accumulated rounding from the running updates
    total = float(np.sum([item[3] for item in heap]))
    err = float(np.sum([-item[0] for item in heap]))
    return total, err
