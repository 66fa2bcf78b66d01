"""Parametric Lévy families, their Lévy-measure tails, Laplace exponents and
jump samplers.

Conventions
-----------
Every model describes a real Lévy process ``X`` started at 0.  Jump laws are
given by their Lévy measure ``nu``; ``tail_neg(x) = nu((-inf, -x])``.

Stable processes use the Samorodnitsky-Taqqu S1 parameterisation with scale
``c``: ``E exp(i u X_1) = exp(-c^a |u|^a (1 - i beta sgn(u) tan(pi a / 2)))``,
with ``beta`` recovered from the negativity parameter ``rhobar = P(X_1 < 0)``
through ``P(X_1 > 0) = 1/2 + arctan(beta tan(pi a/2)) / (pi a)``.  The Lévy
density is ``c_+ x^{-1-a}`` on ``x > 0`` and ``c_- |x|^{-1-a}`` on ``x < 0``
with ``c_+ + c_- = c^a / (-Gamma(-a) cos(pi a / 2))``.  With ``alpha = 1`` only
the symmetric Cauchy process is supported (``c_+ = c_- = c / pi``); with
``alpha = 2`` the process is Brownian motion with variance ``2 c^2`` per unit
time.

The negative stable subordinator is normalised by its Laplace exponent
``phi(lam) = scale * lam^alpha``; the negative Gamma subordinator has Lévy
density ``a x^{-1} e^{-b x}`` and ``phi(lam) = a log(1 + lam / b)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Mapping

import numpy as np
from scipy.special import exp1

from .errors import ConfigurationError, DomainError, ParameterError, UnsupportedOperationError

_TOL = 1e-12


class Family(str, Enum):
    COMPOUND_POISSON_DRIFT = "compound-poisson-drift"
    STABLE = "stable"
    STABLE_SUBORDINATOR_NEG = "stable-subordinator-neg"
    GAMMA_SUBORDINATOR_NEG = "gamma-subordinator-neg"
    BROWNIAN_COMPOUND_POISSON = "brownian-compound-poisson"


class LongRun(str, Enum):
    DRIFTS_PLUS = "DriftsPlus"
    DRIFTS_MINUS = "DriftsMinus"
    OSCILLATES = "Oscillates"


FAMILY_ALIASES = {
    "cp": Family.COMPOUND_POISSON_DRIFT,
    "compound-poisson": Family.COMPOUND_POISSON_DRIFT,
    "compound-poisson-drift": Family.COMPOUND_POISSON_DRIFT,
    "stable": Family.STABLE,
    "stable-subordinator": Family.STABLE_SUBORDINATOR_NEG,
    "stable-subordinator-neg": Family.STABLE_SUBORDINATOR_NEG,
    "gamma": Family.GAMMA_SUBORDINATOR_NEG,
    "gamma-subordinator": Family.GAMMA_SUBORDINATOR_NEG,
    "gamma-subordinator-neg": Family.GAMMA_SUBORDINATOR_NEG,
    "bcp": Family.BROWNIAN_COMPOUND_POISSON,
    "brownian": Family.BROWNIAN_COMPOUND_POISSON,
    "brownian-compound-poisson": Family.BROWNIAN_COMPOUND_POISSON,
}

# parameter names and defaults per family; None means required
_CP_PARAMS = {"b": 0.0, "lam_up": 0.0, "mu_up": 1.0, "lam_down": 0.0, "mu_down": 1.0}
PARAMETERS: dict[Family, dict[str, float | None]] = {
    Family.COMPOUND_POISSON_DRIFT: dict(_CP_PARAMS),
    Family.STABLE: {"alpha": None, "rhobar": None, "c": 1.0},
    Family.STABLE_SUBORDINATOR_NEG: {"alpha": None, "scale": 1.0},
    Family.GAMMA_SUBORDINATOR_NEG: {"a": None, "b": None},
    Family.BROWNIAN_COMPOUND_POISSON: {"sigma": None, **_CP_PARAMS},
}


@dataclass(frozen=True)
class PropertyFlags:
    """Qualitative facts about a family, declared rather than estimated."""

    creeps_down: bool
    zero_regular_down: bool
    long_run: LongRun
    is_neg_subordinator: bool
    has_neg_jumps: bool
    finite_neg_activity: bool
    # downward ladder height process has finite mean (used by the creeping rule)
    ladder_down_finite_mean: bool = False

    def as_dict(self) -> dict:
        return {
            "creeps_down": self.creeps_down,
            "zero_regular_down": self.zero_regular_down,
            "long_run": self.long_run.value,
            "is_neg_subordinator": self.is_neg_subordinator,
            "has_neg_jumps": self.has_neg_jumps,
            "finite_neg_activity": self.finite_neg_activity,
            "ladder_down_finite_mean": self.ladder_down_finite_mean,
        }


@dataclass(frozen=True)
class Truncation:
    """Finite-activity approximation of a model at small-jump cutoff ``delta``.

    Jumps with ``|size| >= delta`` arrive at rates ``rate_up``/``rate_down``;
    the small jumps are replaced by ``drift`` (their mean, or the compensator)
    and a Gaussian part of variance ``gauss_var`` per unit time.  Array
    fields broadcast against an array of per-path cutoffs.
    """

    delta: np.ndarray | float
    rate_up: np.ndarray | float
    rate_down: np.ndarray | float
    drift: np.ndarray | float
    gauss_var: float


@dataclass(frozen=True)
class LevyModel:
    family: Family
    params: Mapping[str, float]
    flags: PropertyFlags = field(compare=False)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"LevyModel({self.family.value}: {inner})"

    def __getitem__(self, key: str) -> float:
        return self.params[key]

    def __reduce__(self):
        # the read-only params mapping cannot be pickled; rebuild instead
        return (make_model, (self.family.value, dict(self.params)))

    def to_dict(self) -> dict:
        return {"family": self.family.value, "params": dict(self.params)}

    # ------------------------------------------------------------------
    # stable helpers
    @property
    def stable_beta(self) -> float:
        alpha, rhobar = self.params["alpha"], self.params["rhobar"]
        if alpha == 2.0 or alpha == 1.0:
            return 0.0
        rho = 1.0 - rhobar
        beta = math.tan(math.pi * alpha * (rho - 0.5)) / math.tan(math.pi * alpha / 2.0)
        return float(np.clip(beta, -1.0, 1.0))

    @property
    def stable_levy_constants(self) -> tuple[float, float]:
        """Lévy density constants ``(c_plus, c_minus)`` for the Stable family."""
        alpha, c = self.params["alpha"], self.params["c"]
        if alpha == 2.0:
            return 0.0, 0.0
        if alpha == 1.0:
            return c / math.pi, c / math.pi
        total = c**alpha / (-math.gamma(-alpha) * math.cos(math.pi * alpha / 2.0))
        beta = self.stable_beta
        return 0.5 * total * (1.0 + beta), 0.5 * total * (1.0 - beta)

    @property
    def has_gaussian(self) -> bool:
        if self.family is Family.BROWNIAN_COMPOUND_POISSON:
            return self.params["sigma"] > 0
        if self.family is Family.STABLE:
            return self.params["alpha"] >= 1.0
        return False

    @property
    def neg_activity(self) -> float:
        """``nu((-inf, 0))``; ``inf`` for infinite-activity families."""
        if self.family in (Family.COMPOUND_POISSON_DRIFT, Family.BROWNIAN_COMPOUND_POISSON):
            return self.params["lam_down"]
        if self.family is Family.STABLE and not self.flags.has_neg_jumps:
            return 0.0
        return math.inf

    @property
    def is_finite_activity(self) -> bool:
        return self.family in (Family.COMPOUND_POISSON_DRIFT, Family.BROWNIAN_COMPOUND_POISSON) or (
            self.family is Family.STABLE and self.params["alpha"] == 2.0
        )

    def tail_neg(self, x):
        return tail_neg(self, x)

    def tail_neg_integral(self, y0, slope, h):
        return tail_neg_integral(self, y0, slope, h)

    def laplace_exponent(self, lam):
        return laplace_exponent(self, lam)

    def truncation(self, delta) -> Truncation:
        return truncation(self, delta)


def _require(cond: bool, param: str, message: str) -> None:
    if not cond:
        raise ParameterError(param, message)


def resolve_family(name: str | Family) -> Family:
    if isinstance(name, Family):
        return name
    key = str(name).strip().lower().replace("_", "-")
    try:
        return FAMILY_ALIASES[key]
    except KeyError:
        raise ParameterError("family", f"unknown family {name!r}") from None


def _cp_flags(p: Mapping[str, float], sigma: float) -> PropertyFlags:
    mean = p["b"] + p["lam_up"] / p["mu_up"] - p["lam_down"] / p["mu_down"]
    if mean > _TOL:
        long_run = LongRun.DRIFTS_PLUS
    elif mean < -_TOL:
        long_run = LongRun.DRIFTS_MINUS
    else:
        long_run = LongRun.OSCILLATES
    creeps = sigma > 0 or p["b"] < 0
    return PropertyFlags(
        creeps_down=creeps,
        zero_regular_down=creeps,
        long_run=long_run,
        is_neg_subordinator=False,
        has_neg_jumps=p["lam_down"] > 0,
        finite_neg_activity=True,
        # exponential jump tails: every moment is finite
        ladder_down_finite_mean=True,
    )


def _stable_flags(alpha: float, rhobar: float) -> PropertyFlags:
    if alpha < 1:
        no_neg_jumps = rhobar == 0.0
        regular = rhobar > 0.0
        if rhobar == 1.0:
            long_run = LongRun.DRIFTS_MINUS
        elif rhobar == 0.0:
            long_run = LongRun.DRIFTS_PLUS
        else:
            long_run = LongRun.OSCILLATES
        creeps = False
    else:
        # alpha > 1 with alpha * rhobar = 1 is spectrally positive
        no_neg_jumps = alpha == 2.0 or (alpha > 1.0 and abs(alpha * rhobar - 1.0) < _TOL)
        regular = True
        long_run = LongRun.OSCILLATES
        creeps = no_neg_jumps and alpha > 1.0
    return PropertyFlags(
        creeps_down=creeps,
        zero_regular_down=regular,
        long_run=long_run,
        is_neg_subordinator=alpha < 1 and rhobar == 1.0,
        has_neg_jumps=not no_neg_jumps,
        finite_neg_activity=no_neg_jumps,
        ladder_down_finite_mean=alpha == 2.0,
    )


_SUBORDINATOR_FLAGS = PropertyFlags(
    creeps_down=False,
    zero_regular_down=True,
    long_run=LongRun.DRIFTS_MINUS,
    is_neg_subordinator=True,
    has_neg_jumps=True,
    finite_neg_activity=False,
)


def make_model(family: str | Family, params: Mapping[str, float] | None = None, **kwargs: float) -> LevyModel:
    """Build a validated, immutable model with its property flags.

    Parameters are passed either as a mapping or as keyword arguments; see
    ``PARAMETERS`` for the names each family accepts.  Unknown names, missing
    required names and out-of-range values raise ``ParameterError`` naming the
    offending parameter.
    """
    fam = resolve_family(family)
    given = dict(params or {})
    given.update(kwargs)
    spec = PARAMETERS[fam]
    for key in given:
        _require(key in spec, key, f"not a parameter of family {fam.value}")
    p: dict[str, float] = {}
    for key, default in spec.items():
        if key not in given:
            _require(default is not None, key, f"required for family {fam.value}")
            p[key] = float(default)
        else:
            value = float(given[key])
            _require(math.isfinite(value), key, "must be finite")
            p[key] = value

    if fam in (Family.COMPOUND_POISSON_DRIFT, Family.BROWNIAN_COMPOUND_POISSON):
        for key in ("lam_up", "lam_down"):
            _require(p[key] >= 0, key, "jump rate must be >= 0")
        for key in ("mu_up", "mu_down"):
            _require(p[key] > 0, key, "exponential jump rate must be > 0")
        sigma = 0.0
        if fam is Family.BROWNIAN_COMPOUND_POISSON:
            sigma = p["sigma"]
            _require(sigma >= 0, "sigma", "volatility must be >= 0")
        flags = _cp_flags(p, sigma)
    elif fam is Family.STABLE:
        alpha, rhobar = p["alpha"], p["rhobar"]
        _require(0 < alpha <= 2, "alpha", "stable index must lie in (0, 2]")
        _require(0 <= rhobar <= 1, "rhobar", "negativity parameter must lie in [0, 1]")
        _require(p["c"] > 0, "c", "scale must be > 0")
        _require(
            alpha * rhobar <= 1 + _TOL and alpha * (1 - rhobar) <= 1 + _TOL,
            "rhobar",
            f"inadmissible for alpha={alpha:g}: need alpha*rhobar <= 1 and alpha*(1-rhobar) <= 1",
        )
        if alpha == 1.0:
            _require(rhobar == 0.5, "rhobar", "alpha = 1 supports the symmetric case rhobar = 0.5 only")
        if alpha == 2.0:
            _require(rhobar == 0.5, "rhobar", "alpha = 2 is Brownian motion, rhobar = 0.5")
        flags = _stable_flags(alpha, rhobar)
    elif fam is Family.STABLE_SUBORDINATOR_NEG:
        _require(0 < p["alpha"] < 1, "alpha", "subordinator index must lie in (0, 1)")
        _require(p["scale"] > 0, "scale", "scale must be > 0")
        flags = _SUBORDINATOR_FLAGS
    else:
        _require(p["a"] > 0, "a", "shape must be > 0")
        _require(p["b"] > 0, "b", "rate must be > 0")
        flags = _SUBORDINATOR_FLAGS
    return LevyModel(fam, MappingProxyType(p), flags)


# ----------------------------------------------------------------------------
# Lévy measure


def tail_neg(model: LevyModel, x):
    """Lower tail ``nu((-inf, -x])`` of the Lévy measure, for ``x > 0``."""
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("tail_neg requires x > 0")
    p = model.params
    fam = model.family
    if fam in (Family.COMPOUND_POISSON_DRIFT, Family.BROWNIAN_COMPOUND_POISSON):
        out = p["lam_down"] * np.exp(-p["mu_down"] * xa)
    elif fam is Family.STABLE:
        alpha = p["alpha"]
        _, c_minus = model.stable_levy_constants
        out = c_minus / alpha * xa**-alpha if c_minus > 0 else np.zeros_like(xa)
    elif fam is Family.STABLE_SUBORDINATOR_NEG:
        out = p["scale"] * xa ** -p["alpha"] / math.gamma(1.0 - p["alpha"])
    else:
        out = p["a"] * exp1(p["b"] * xa)
    return out if np.ndim(x) else float(out)


def tail_up(model: LevyModel, x):
    """Upper tail ``nu([x, inf))`` for ``x > 0``."""
    xa = np.asarray(x, dtype=float)
    p = model.params
    if model.family in (Family.COMPOUND_POISSON_DRIFT, Family.BROWNIAN_COMPOUND_POISSON):
        out = p["lam_up"] * np.exp(-p["mu_up"] * xa)
    elif model.family is Family.STABLE:
        c_plus, _ = model.stable_levy_constants
        out = c_plus / p["alpha"] * xa ** -p["alpha"] if c_plus > 0 else np.zeros_like(xa)
    else:
        out = np.zeros_like(xa)
    return out if np.ndim(x) else float(out)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)


def _gauss_legendre(model: LevyModel, y0, slope, h):
    mid = 0.5 * h
    total = 0.0
    for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
        s = mid * (1.0 + node)
        total = total + weight * tail_neg(model, np.maximum(y0 + slope * s, 1e-300))
    return mid * total


def _power_integral(k: float, alpha: float, y0, m, h):
    # int_0^h k (y0 + m s)^(-alpha) ds, with y0 + m h >= 0
    r = np.maximum(m * h / y0, -1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if alpha == 1.0:
            growth = np.log1p(r)
        else:
            growth = np.expm1((1.0 - alpha) * np.log1p(r)) / (1.0 - alpha)
        exact = k * y0 ** (1.0 - alpha) * growth / m
    return np.where(np.abs(m * h) > 1e-14 * y0, exact, k * y0**-alpha * h)


def _e1_antiderivative(u):
    # d/du (u E1(u) - e^{-u}) = E1(u); the limit at u = 0 is -1
    u = np.asarray(u, dtype=float)
    with np.errstate(invalid="ignore"):
        return np.where(u > 0, u * exp1(np.maximum(u, 1e-300)) - np.exp(-u), -1.0)


def tail_neg_integral(model: LevyModel, y0, slope, h):
    """``int_0^h tail_neg(y0 + slope * s) ds`` along a linear segment with
    ``y0 > 0`` and ``y0 + slope * h >= 0``.

    Closed forms for every family; the Gamma family falls back to Gauss-Legendre
    on short segments where the closed form would cancel.  The integral stays
    finite when the segment ends at 0 (the tails are integrable there).
    """
    y0 = np.asarray(y0, dtype=float)
    slope = np.broadcast_to(np.asarray(slope, dtype=float), np.broadcast(y0, h).shape)
    h = np.asarray(h, dtype=float)
    p = model.params
    fam = model.family
    if fam in (Family.COMPOUND_POISSON_DRIFT, Family.BROWNIAN_COMPOUND_POISSON):
        lam, mu = p["lam_down"], p["mu_down"]
        if lam == 0:
            return np.zeros(slope.shape)
        k = mu * slope
        # (1 - exp(-k h)) / k, continuous at k = 0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            factor = np.where(np.abs(k * h) > 1e-12, -np.expm1(-k * h) / np.where(k == 0, 1.0, k), h)
        return lam * np.exp(-mu * y0) * factor
    if fam is Family.STABLE:
        _, c_minus = model.stable_levy_constants
        if c_minus == 0:
            return np.zeros(slope.shape)
        return _power_integral(c_minus / p["alpha"], p["alpha"], y0, slope, h)
    if fam is Family.STABLE_SUBORDINATOR_NEG:
        return _power_integral(p["scale"] / math.gamma(1 - p["alpha"]), p["alpha"], y0, slope, h)
    a, b = p["a"], p["b"]
    short = np.abs(slope * h) < 1e-3 * y0
    with np.errstate(divide="ignore", invalid="ignore"):
        y1 = np.maximum(y0 + slope * h, 0.0)
        closed = a * (_e1_antiderivative(b * y1) - _e1_antiderivative(b * y0)) / (b * slope)
    if np.any(short):
        return np.where(short, _gauss_legendre(model, y0, slope, h), closed)
    return closed


# ----------------------------------------------------------------------------
# Laplace exponent


def tail_neg_cumint(model: LevyModel, w):
    """``int_0^w tail_neg(v) dv`` for ``w >= 0`` (finite for every family)."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise DomainError("tail_neg_cumint requires w >= 0")
    p = model.params
    fam = model.family
    if fam in (Family.COMPOUND_POISSON_DRIFT, Family.BROWNIAN_COMPOUND_POISSON):
        return p["lam_down"] * -np.expm1(-p["mu_down"] * w) / p["mu_down"]
    if fam is Family.STABLE:
        _, c_minus = model.stable_levy_constants
        alpha = p["alpha"]
        if alpha >= 1 and c_minus > 0:
            raise UnsupportedOperationError("the tail is not integrable at 0 for alpha >= 1")
        return c_minus / alpha * w ** (1 - alpha) / (1 - alpha) if c_minus > 0 else np.zeros(w.shape)
    if fam is Family.STABLE_SUBORDINATOR_NEG:
        alpha = p["alpha"]
        return p["scale"] / math.gamma(2 - alpha) * w ** (1 - alpha)
    a, b = p["a"], p["b"]
    return a / b * (_e1_antiderivative(b * w) + 1.0)


def laplace_exponent(model: LevyModel, lam):
    """``phi(lam) = -log E exp(lam X_1)`` for the negative-subordinator families."""
    lam_a = np.asarray(lam)
    if np.any(np.real(lam_a) < 0) and not np.iscomplexobj(lam_a):
        raise DomainError("laplace_exponent requires lam >= 0")
    p = model.params
    if model.family is Family.STABLE_SUBORDINATOR_NEG:
        out = p["scale"] * lam_a ** p["alpha"]
    elif model.family is Family.GAMMA_SUBORDINATOR_NEG:
        out = p["a"] * np.log1p(lam_a / p["b"])
    elif model.family is Family.STABLE and model.flags.is_neg_subordinator:
        alpha = p["alpha"]
        out = p["c"] ** alpha / math.cos(math.pi * alpha / 2) * lam_a**alpha
    else:
        raise UnsupportedOperationError(f"laplace_exponent is defined for negative subordinators, not {model!r}")
    return out if np.ndim(lam) else complex(out) if np.iscomplexobj(out) else float(out)


def as_stable_subordinator(model: LevyModel) -> LevyModel | None:
    """Return the equivalent ``StableSubordinatorNeg`` model, if any."""
    if model.family is Family.STABLE_SUBORDINATOR_NEG:
        return model
    if model.family is Family.STABLE and model.flags.is_neg_subordinator:
        alpha = model.params["alpha"]
        scale = model.params["c"] ** alpha / math.cos(math.pi * alpha / 2)
        return make_model(Family.STABLE_SUBORDINATOR_NEG, alpha=alpha, scale=scale)
    return None


# ----------------------------------------------------------------------------
# truncation used by the path engine


def truncation(model: LevyModel, delta) -> Truncation:
    """Finite-activity approximation with small-jump cutoff ``delta``.

    Subordinators and stable processes with ``alpha < 1`` replace jumps below
    the cutoff by their mean; ``alpha > 1`` stable processes compensate the big
    jumps and add a Gaussian slab of matched variance.  Compound Poisson
    families are exact and ignore ``delta``.
    """
    p = model.params
    fam = model.family
    d = np.asarray(delta, dtype=float)
    if fam in (Family.COMPOUND_POISSON_DRIFT, Family.BROWNIAN_COMPOUND_POISSON):
        sigma = p.get("sigma", 0.0)
        return Truncation(d, p["lam_up"], p["lam_down"], p["b"], sigma * sigma)
    if fam is Family.STABLE and p["alpha"] == 2.0:
        return Truncation(d, 0.0, 0.0, 0.0, 2.0 * p["c"] ** 2)
    if np.any(~(d > 0)):
        raise ConfigurationError(f"{model!r} has infinite activity: truncation_delta must be > 0")
    if fam is Family.STABLE:
        alpha = p["alpha"]
        c_plus, c_minus = model.stable_levy_constants
        rate_up = c_plus / alpha * d**-alpha
        rate_down = c_minus / alpha * d**-alpha
        if alpha < 1:
            return Truncation(d, rate_up, rate_down, (c_plus - c_minus) * d ** (1 - alpha) / (1 - alpha), 0.0)
        if np.ndim(d):
            raise ConfigurationError("relative truncation needs a pure-jump model")
        slab = (c_plus + c_minus) * float(d) ** (2 - alpha) / (2 - alpha)
        drift = 0.0 if alpha == 1.0 else -(c_plus - c_minus) * d ** (1 - alpha) / (alpha - 1)
        return Truncation(d, rate_up, rate_down, drift, slab)
    if fam is Family.STABLE_SUBORDINATOR_NEG:
        alpha, scale = p["alpha"], p["scale"]
        rate = scale * d**-alpha / math.gamma(1 - alpha)
        drift = -scale * alpha * d ** (1 - alpha) / math.gamma(2 - alpha)
        return Truncation(d, 0.0, rate, drift, 0.0)
    a, b = p["a"], p["b"]
    return Truncation(d, 0.0, a * exp1(b * d), -a * (-np.expm1(-b * d)) / b, 0.0)


# ----------------------------------------------------------------------------
# samplers


def _pareto(rng: np.random.Generator, delta, alpha: float, size) -> np.ndarray:
    return delta * rng.random(size) ** (-1.0 / alpha)


def _gamma_big_jumps(rng: np.random.Generator, delta, a: float, b: float, size) -> np.ndarray:
    """Jumps from the density proportional to ``x^{-1} e^{-b x}`` on ``[delta, inf)``.

    Rejection from a two-piece envelope: ``1/x`` on ``[delta, 1/b)`` (accept
    with probability ``e^{-b x}``) and ``e^{-b x} / start`` above
    ``start = max(delta, 1/b)`` (accept with probability ``start / x``).
    """
    delta = np.broadcast_to(np.asarray(delta, dtype=float), size).ravel()
    out = np.empty(delta.size)
    pending = np.ones(delta.size, dtype=bool)
    split = 1.0 / b
    lo = np.minimum(delta, split)
    start = np.maximum(delta, split)
    # envelope masses of the two pieces
    m_low = np.log(split / lo)
    m_high = np.exp(-b * start) / (b * start)
    p_low = m_low / (m_low + m_high)
    while np.any(pending):
        idx = np.flatnonzero(pending)
        k = idx.size
        use_low = rng.random(k) < p_low[idx]
        x_low = lo[idx] * np.exp(rng.random(k) * m_low[idx])
        x_high = start[idx] + rng.exponential(1.0 / b, k)
        x = np.where(use_low, x_low, x_high)
        accept_p = np.where(use_low, np.exp(-b * x), start[idx] / x)
        ok = rng.random(k) < accept_p
        out[idx[ok]] = x[ok]
        pending[idx[ok]] = False
    out = out.reshape(size)
    return out


def sample_jump_neg(model: LevyModel, rng: np.random.Generator, size=None, delta=None):
    """Magnitudes of downward jumps.

    For compound Poisson families these are the exponential jump sizes; for
    infinite-activity families ``delta`` is the cutoff and sizes follow the Lévy
    measure restricted to ``[delta, inf)`` (``delta`` may be an array
    broadcasting against ``size``).
    """
    p = model.params
    fam = model.family
    shape = () if size is None else size
    if fam in (Family.COMPOUND_POISSON_DRIFT, Family.BROWNIAN_COMPOUND_POISSON):
        out = rng.exponential(1.0 / p["mu_down"], shape)
    else:
        if delta is None:
            raise ConfigurationError("a truncation cutoff is required for infinite-activity jumps")
        if fam is Family.GAMMA_SUBORDINATOR_NEG:
            out = _gamma_big_jumps(rng, delta, p["a"], p["b"], shape if shape else (1,))
            out = out if shape else out[0]
        else:
            out = _pareto(rng, delta, p["alpha"], shape)
    return float(out) if size is None else out


def sample_jump_up(model: LevyModel, rng: np.random.Generator, size=None, delta=None):
    p = model.params
    shape = () if size is None else size
    if model.family in (Family.COMPOUND_POISSON_DRIFT, Family.BROWNIAN_COMPOUND_POISSON):
        out = rng.exponential(1.0 / p["mu_up"], shape)
    elif model.family is Family.STABLE:
        if delta is None:
            raise ConfigurationError("a truncation cutoff is required for infinite-activity jumps")
        out = _pareto(rng, delta, p["alpha"], shape)
    else:
        out = np.zeros(shape)
    return float(out) if size is None else out


def sample_stable_increment(alpha: float, rhobar: float, dt: float, rng: np.random.Generator, size=None, c: float = 1.0):
    """Chambers-Mallows-Stuck draw of a strictly stable increment over ``dt``.

    Uses the S1 parameterisation with scale ``c``; the increment over ``dt``
    equals ``dt^{1/alpha}`` times a unit-time draw.  ``alpha = 2`` gives
    ``N(0, 2 c^2 dt)``.
    """
    if not 0 < alpha <= 2:
        raise ParameterError("alpha", "stable index must lie in (0, 2]")
    if dt <= 0:
        raise DomainError("dt must be > 0")
    shape = () if size is None else size
    v = rng.uniform(-math.pi / 2, math.pi / 2, shape)
    w = rng.exponential(1.0, shape)
    if alpha == 1.0:
        if rhobar != 0.5:
            raise ParameterError("rhobar", "alpha = 1 supports rhobar = 0.5 only")
        x = np.tan(v)
    else:
        beta = 0.0 if alpha == 2.0 else math.tan(math.pi * alpha * (0.5 - rhobar)) / math.tan(math.pi * alpha / 2)
        beta = min(1.0, max(-1.0, beta))
        zeta = beta * math.tan(math.pi * alpha / 2)
        shift = math.atan(zeta) / alpha
        s = (1 + zeta * zeta) ** (1 / (2 * alpha))
        x = (
            s
            * np.sin(alpha * (v + shift))
            / np.cos(v) ** (1 / alpha)
            * (np.cos(v - alpha * (v + shift)) / w) ** ((1 - alpha) / alpha)
        )
    out = c * dt ** (1 / alpha) * x
    return float(out) if size is None else out


def sample_increment(model: LevyModel, dt: float, rng: np.random.Generator, size=None):
    """Exact draw of ``X_dt`` for families with a closed-form marginal.

    Stable families use CMS; the Gamma subordinator uses Gamma variates.
    Compound Poisson families are simulated jump by jump.
    """
    p = model.params
    shape = () if size is None else size
    if model.family is Family.STABLE:
        out = sample_stable_increment(p["alpha"], p["rhobar"], dt, rng, size=shape, c=p["c"])
    elif model.family is Family.STABLE_SUBORDINATOR_NEG:
        alpha = p["alpha"]
        c = (p["scale"] * math.cos(math.pi * alpha / 2)) ** (1 / alpha)
        out = sample_stable_increment(alpha, 1.0, dt, rng, size=shape, c=c)
    elif model.family is Family.GAMMA_SUBORDINATOR_NEG:
        out = -rng.gamma(p["a"] * dt, 1.0 / p["b"], shape)
    else:
        n_up = rng.poisson(p["lam_up"] * dt, shape)
        n_down = rng.poisson(p["lam_down"] * dt, shape)
        # a sum of k Exp(mu) variables is Gamma(k, 1/mu); gamma(0) is 0
        up = rng.gamma(np.maximum(n_up, 1e-300), 1.0 / p["mu_up"]) * (n_up > 0)
        down = rng.gamma(np.maximum(n_down, 1e-300), 1.0 / p["mu_down"]) * (n_down > 0)
        out = p["b"] * dt + up - down
        if model.family is Family.BROWNIAN_COMPOUND_POISSON:
            out = out + p["sigma"] * math.sqrt(dt) * rng.standard_normal(shape)
    return float(out) if size is None else out
