"""Parametric runtime models, their maximum-likelihood fits and KS testing.

Three families are supported: exponential, shifted exponential and
lognormal.  Fits and KS statistics use the uncensored runs only; cutoff
values are not real runtimes and would bias the rate and location.

KS p-values come from the asymptotic Kolmogorov distribution without a
correction for estimated parameters, so they are optimistic in the
Lilliefors sense.  That matches the usual practice of fitting, then testing
the same sample.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import special

from .rtd import Rtd

KS_ALPHA = 0.05
SHIFT_EPS = 1e-6
CENSOR_WARN_FRACTION = 0.05
DEFAULT_FAMILIES = ("shifted-exp", "lognormal")


class DegenerateFitError(ValueError):
    """The sample cannot identify the model (e.g. all values equal)."""


class CensoringWarning(UserWarning):
    pass


class _ExponentialBase:
    x0: float
    lam: float

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > self.x0, -np.expm1(-self.lam * np.maximum(x - self.x0, 0.0)), 0.0)

    def sf(self, x):
        return np.exp(self.logsf(x))

    def logsf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > self.x0, -self.lam * np.maximum(x - self.x0, 0.0), 0.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > self.x0, self.lam * np.exp(-self.lam * np.maximum(x - self.x0, 0.0)), 0.0)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > self.x0, math.log(self.lam) - self.lam * (x - self.x0), -np.inf)

    def ppf(self, q):
        return self.x0 - np.log1p(-np.asarray(q, dtype=float)) / self.lam

    def mean(self) -> float:
        return self.x0 + 1.0 / self.lam

    @property
    def support_min(self) -> float:
        return self.x0

    def sample(self, rng: np.random.Generator, size=None):
        return self.x0 + rng.exponential(1.0 / self.lam, size)


@dataclass(frozen=True)
class ShiftedExponential(_ExponentialBase):
    """Exponential with rate ``lam`` translated right by ``x0``."""

    x0: float
    lam: float
    family = "shifted-exp"

    def __post_init__(self):
        if not self.lam > 0 or not math.isfinite(self.lam):
            raise ValueError(f"rate must be positive, got {self.lam}")
        if not self.x0 >= 0 or not math.isfinite(self.x0):
            raise ValueError(f"shift must be >= 0, got {self.x0}")

    @property
    def params(self):
        return {"x0": self.x0, "lambda": self.lam}


@dataclass(frozen=True)
class Exponential(_ExponentialBase):
    lam: float
    family = "exp"
    x0 = 0.0

    def __post_init__(self):
        if not self.lam > 0 or not math.isfinite(self.lam):
            raise ValueError(f"rate must be positive, got {self.lam}")

    @property
    def params(self):
        return {"lambda": self.lam}


@dataclass(frozen=True)
class Lognormal:
    """``log Y ~ Normal(mu, sigma**2)``."""

    mu: float
    sigma: float
    family = "lognormal"

    def __post_init__(self):
        if not self.sigma > 0 or not math.isfinite(self.sigma):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise ValueError("mu must be finite")

    @property
    def params(self):
        return {"mu": self.mu, "sigma": self.sigma}

    def _z(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (np.log(np.where(x > 0, x, np.nan)) - self.mu) / self.sigma

    def cdf(self, x):
        z = self._z(x)
        return np.where(np.isnan(z), 0.0, special.ndtr(np.nan_to_num(z)))

    def sf(self, x):
        z = self._z(x)
        return np.where(np.isnan(z), 1.0, special.ndtr(-np.nan_to_num(z)))

    def logsf(self, x):
        z = self._z(x)
        return np.where(np.isnan(z), 0.0, special.log_ndtr(-np.nan_to_num(z)))

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        z = self._z(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = -0.5 * z * z - np.log(self.sigma * x) - 0.5 * math.log(2 * math.pi)
        return np.where(np.isnan(z), -np.inf, val)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def ppf(self, q):
        return np.exp(self.mu + self.sigma * special.ndtri(np.asarray(q, dtype=float)))

    def mean(self) -> float:
        return math.exp(self.mu + 0.5 * self.sigma ** 2)

    @property
    def support_min(self) -> float:
        return 0.0

    def sample(self, rng: np.random.Generator, size=None):
        return rng.lognormal(self.mu, self.sigma, size)


DistModel = Union[Exponential, ShiftedExponential, Lognormal]


def model_cdf(m: DistModel, x):
    out = m.cdf(x)
    return float(out) if np.ndim(out) == 0 else out


def model_pdf(m: DistModel, x):
    out = m.pdf(x)
    return float(out) if np.ndim(out) == 0 else out


def model_mean(m: DistModel) -> float:
    return m.mean()


def model_to_dict(m: DistModel) -> dict:
    return {"family": m.family, "params": dict(m.params)}


def model_from_dict(d: dict) -> DistModel:
    fam = canonical_family(d["family"])
    p = d["params"]
    if fam == "exp":
        return Exponential(float(p["lambda"]))
    if fam == "shifted-exp":
        return ShiftedExponential(float(p["x0"]), float(p["lambda"]))
    return Lognormal(float(p["mu"]), float(p["sigma"]))


# --- fitting -----------------------------------------------------------------

def _fit_sample(rtd: Rtd) -> np.ndarray:
    if rtd.n_censored > CENSOR_WARN_FRACTION * rtd.n:
        warnings.warn(
            f"{rtd.n_censored} of {rtd.n} runs are censored; they are excluded "
            "from fitting, which truncates the right tail",
            CensoringWarning, stacklevel=3,
        )
    x = rtd.uncensored
    if x.size < 2 or x[0] == x[-1]:
        raise DegenerateFitError(
            "need at least 2 distinct uncensored runtimes to fit a model"
        )
    return x


def fit_exponential(rtd: Rtd) -> Exponential:
    """Rate MLE with the shift pinned to 0."""
    x = _fit_sample(rtd)
    return Exponential(1.0 / float(np.mean(x)))


def fit_shifted_exponential(rtd: Rtd, eps: float = SHIFT_EPS) -> ShiftedExponential:
    """Shift just below the smallest runtime; rate is the MLE given that shift."""
    x = _fit_sample(rtd)
    x0 = float(x[0]) * (1.0 - eps)
    return ShiftedExponential(x0, 1.0 / (float(np.mean(x)) - x0))


def fit_lognormal(rtd: Rtd) -> Lognormal:
    x = _fit_sample(rtd)
    logs = np.log(x)
    return Lognormal(float(np.mean(logs)), float(np.std(logs)))


FITTERS = {
    "exp": fit_exponential,
    "shifted-exp": fit_shifted_exponential,
    "lognormal": fit_lognormal,
}

_ALIASES = {
    "exponential": "exp",
    "shifted-exponential": "shifted-exp",
    "shifted_exp": "shifted-exp",
    "sexp": "shifted-exp",
    "ln": "lognormal",
}


def canonical_family(name: str) -> str:
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in FITTERS:
        raise ValueError(f"unknown model family {name!r}; choose from {sorted(FITTERS)}")
    return key


# --- Kolmogorov-Smirnov ------------------------------------------------------

def kolmogorov_sf(t: float, tol: float = 1e-12, max_terms: int = 100) -> float:
    """P(K > t) for the limiting Kolmogorov distribution.

    For t >= 1 the alternating series ``2 sum (-1)^(k-1) exp(-2 k^2 t^2)`` is
    used.  Below 1 it converges too slowly, so the equivalent theta-function
    form of the CDF is summed instead.
    """
    if t <= 0:
        return 1.0
    total = 0.0
    if t >= 1.0:
        for k in range(1, max_terms + 1):
            term = math.exp(-2.0 * k * k * t * t)
            total += term if k % 2 else -term
            if term < tol:
                break
        p = 2.0 * total
    else:
        c = -math.pi ** 2 / (8.0 * t * t)
        for k in range(1, max_terms + 1):
            term = math.exp(c * (2 * k - 1) ** 2)
            total += term
            if term < tol:
                break
        p = 1.0 - math.sqrt(2.0 * math.pi) / t * total
    return min(1.0, max(0.0, p))


def ks_statistic(sorted_x: np.ndarray, cdf_values: np.ndarray) -> float:
    n = sorted_x.size
    i = np.arange(1, n + 1)
    upper = np.abs(i / n - cdf_values)
    lower = np.abs((i - 1) / n - cdf_values)
    return float(max(upper.max(), lower.max()))


@dataclass(frozen=True)
class FitReport:
    model: DistModel
    ks_statistic: float
    p_value: float
    accepted: bool
    n: int
    n_censored: int

    @property
    def family(self) -> str:
        return self.model.family

    def to_dict(self) -> dict:
        return {
            "family": self.model.family,
            "params": dict(self.model.params),
            "ks_d": self.ks_statistic,
            "p_value": self.p_value,
            "accepted": self.accepted,
            "n": self.n,
            "n_censored": self.n_censored,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitReport":
        return cls(model_from_dict(d), float(d["ks_d"]), float(d["p_value"]),
                   bool(d["accepted"]), int(d["n"]), int(d["n_censored"]))


def ks_test(rtd: Rtd, m: DistModel, alpha: float = KS_ALPHA) -> FitReport:
    """One-sample KS test of the uncensored runtimes against ``m``."""
    x = rtd.uncensored
    d = ks_statistic(x, np.asarray(m.cdf(x), dtype=float))
    p = kolmogorov_sf(math.sqrt(x.size) * d)
    return FitReport(m, d, p, p > alpha, rtd.n, rtd.n_censored)


def fit_all(rtd: Rtd, candidates: Sequence[str] = DEFAULT_FAMILIES) -> list[FitReport]:
    if not candidates:
        raise ValueError("need at least one candidate family")
    reports = []
    for name in candidates:
        model = FITTERS[canonical_family(name)](rtd)
        reports.append(ks_test(rtd, model))
    return reports


def best_report(reports: Sequence[FitReport]) -> FitReport:
    # first candidate wins ties
    return max(reports, key=lambda r: r.p_value)


def select_model(rtd: Rtd, candidates: Sequence[str] = DEFAULT_FAMILIES) -> FitReport:
    """Fit every candidate family and return the report with the highest p-value."""
    return best_report(fit_all(rtd, candidates))
