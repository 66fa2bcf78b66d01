"""Renewal functions of the negative-subordinator families and derived quantities.

For a subordinator ``S = -X`` without drift the renewal function
``U*(x) = int_0^inf P(S_t <= x) dt`` has Laplace-Stieltjes transform
``1 / phi(lam)``.  The stable family has closed forms; the Gamma family is
inverted numerically on the Talbot contour and cross-checked against a
discretised renewal equation ``int_0^x tail(x - z) U*(dz) = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate, linalg, special

from .errors import DomainError, NumericalMethodError, UnsupportedOperationError
from .levy_models import Family, LevyModel, as_stable_subordinator, laplace_exponent, tail_neg, tail_neg_cumint
from .special import talbot_inverse

__all__ = [
    "RenewalMethod",
    "RenewalTable",
    "HinfResult",
    "renewal_value",
    "renewal_density",
    "renewal_function",
    "renewal_equation_table",
    "laplace_stieltjes",
    "hinf_product",
    "hinf_supremum",
    "overshoot_probability",
    "kernel_density",
    "kernel_cdf",
    "kernel_inverse_cdf_sampler",
]


class RenewalMethod(str, Enum):
    CLOSED_FORM = "ClosedForm"
    LAPLACE_INVERSION = "LaplaceInversion"
    RENEWAL_EQUATION = "RenewalEquation"


@dataclass(frozen=True)
class RenewalTable:
    """``U*`` tabulated on an increasing grid of positive points."""

    grid: np.ndarray
    values: np.ndarray
    method: RenewalMethod

    def __call__(self, x):
        """Interpolate linearly in log-log coordinates (exact for power laws)."""
        x = np.asarray(x, dtype=float)
        return np.exp(np.interp(np.log(x), np.log(self.grid), np.log(self.values)))


def _subordinator(model: LevyModel) -> LevyModel:
    if model.family is Family.GAMMA_SUBORDINATOR_NEG:
        return model
    sub = as_stable_subordinator(model)
    if sub is None:
        raise UnsupportedOperationError(f"renewal functions are implemented for negative subordinators, not {model!r}")
    return sub


def renewal_value(model: LevyModel, x):
    """``U*(x)``: closed form for the stable family, Talbot inversion of
    ``1 / (s phi(s))`` for the Gamma family."""
    sub = _subordinator(model)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("renewal function evaluated at x <= 0")
    if sub.family is Family.STABLE_SUBORDINATOR_NEG:
        alpha = sub.params["alpha"]
        return x**alpha / (math.gamma(1 + alpha) * sub.params["scale"])
    return talbot_inverse(lambda s: 1.0 / (s * laplace_exponent(sub, s)), x)


def renewal_density(model: LevyModel, x):
    """Renewal density ``u*(x)``, the inverse Laplace transform of ``1 / phi``."""
    sub = _subordinator(model)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("renewal density evaluated at x <= 0")
    if sub.family is Family.STABLE_SUBORDINATOR_NEG:
        alpha = sub.params["alpha"]
        return x ** (alpha - 1) / (math.gamma(alpha) * sub.params["scale"])
    return talbot_inverse(lambda s: 1.0 / laplace_exponent(sub, s), x)


def renewal_function(model: LevyModel, grid) -> RenewalTable:
    """Tabulate ``U*`` on ``grid``.

    Raises
    ------
    NumericalMethodError
        If the inverted values are not positive and nondecreasing.
    """
    sub = _subordinator(model)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    values = np.asarray(renewal_value(sub, grid), dtype=float)
    method = RenewalMethod.CLOSED_FORM if sub.family is Family.STABLE_SUBORDINATOR_NEG else RenewalMethod.LAPLACE_INVERSION
    steps = np.diff(values)
    if np.any(~np.isfinite(values)) or np.any(values <= 0) or np.any(steps < -1e-12 * values[1:]):
        worst = int(np.argmin(steps)) if steps.size else 0
        raise NumericalMethodError(
            "renewal function is not positive and nondecreasing",
            {"model": repr(model), "worst_index": worst, "worst_step": float(steps[worst]) if steps.size else 0.0},
        )
    return RenewalTable(grid, values, method)


def renewal_equation_table(model: LevyModel, x_max: float, points: int = 1000) -> RenewalTable:
    """Solve the discretised renewal equation ``int_0^x tail(x - z) U*(dz) = 1``.

    ``U*`` is approximated by a measure with constant density on each cell of
    a uniform grid; collocating at the right cell ends gives a lower-triangular
    Toeplitz system whose weights are exact cell integrals of the tail.  The
    scheme is first-order in the cell width.
    """
    sub = _subordinator(model)
    h = x_max / points
    ends = h * np.arange(points + 1)
    cum = tail_neg_cumint(sub, ends)
    # weight of cell j at collocation point i depends on i - j only
    first_col = (cum[1:] - cum[:-1]) / h
    mat = linalg.toeplitz(first_col, np.zeros(points))
    mass = linalg.solve_triangular(mat, np.ones(points), lower=True)
    return RenewalTable(ends[1:], np.cumsum(mass), RenewalMethod.RENEWAL_EQUATION)


def laplace_stieltjes(table: RenewalTable, lam: float, tail=None) -> float:
    """``int e^{-lam x} U*(dx)`` from a table, by parts:
    ``lam int_0^inf e^{-lam x} U*(x) dx`` with the trapezoid rule on the grid.

    Below the first grid point ``U*`` is interpolated as a power law through
    the first two points; ``tail`` optionally extends the table beyond its end.
    """
    g, v = table.grid, table.values
    expo = math.log(v[1] / v[0]) / math.log(g[1] / g[0])
    # int_0^{g0} lam e^{-lam x} v0 (x/g0)^expo dx
    head = v[0] * g[0] ** -expo * lam ** -expo * special.gammainc(expo + 1, lam * g[0]) * math.gamma(expo + 1)
    body = integrate.trapezoid(lam * np.exp(-lam * g) * v, g)
    rest = tail(lam, g[-1]) if tail is not None else 0.0
    return float(head + body + rest)


# ----------------------------------------------------------------------------
# H-inf criterion and overshoot


def hinf_product(model: LevyModel, y):
    """``U*(y) * tail_neg(y)``."""
    sub = _subordinator(model)
    return renewal_value(sub, y) * tail_neg(sub, y)


def _hinf_limits(sub: LevyModel) -> tuple[float, float]:
    if sub.family is Family.STABLE_SUBORDINATOR_NEG:
        alpha = sub.params["alpha"]
        value = math.sin(math.pi * alpha) / (math.pi * alpha)
        return value, value
    # Gamma: U*(y) ~ 1/(a log(1/y)) and tail ~ a log(1/y) at 0; the tail decays
    # exponentially while U* grows linearly at infinity
    return 1.0, 0.0


@dataclass(frozen=True)
class HinfResult:
    """Supremum of ``U*(y) tail_neg(y)`` over ``y > 0``.

    ``grid_sup`` and ``grid_argmax`` come from the log grid; ``limit_zero`` and
    ``limit_inf`` are the analytic endpoint limits.  ``sup_value`` is the
    largest of the three and ``approached`` says where: ``"interior"``,
    ``"y->0+"``, ``"y->inf"`` or ``"constant"``.
    """

    sup_value: float
    approached: str
    grid_sup: float
    grid_argmax: float
    limit_zero: float
    limit_inf: float
    grid: np.ndarray
    product: np.ndarray

    def sup_above(self, y_min: float) -> float:
        return float(self.product[self.grid >= y_min].max())

    def as_dict(self) -> dict:
        return {
            "sup_value": self.sup_value,
            "approached": self.approached,
            "grid_sup": self.grid_sup,
            "grid_argmax": self.grid_argmax,
            "limit_zero": self.limit_zero,
            "limit_inf": self.limit_inf,
        }


def hinf_supremum(model: LevyModel, lo: float = 1e-6, hi: float = 1e6, per_decade: int = 200) -> HinfResult:
    """Evaluate the H-inf product on a log grid plus its analytic limits."""
    sub = _subordinator(model)
    decades = math.log10(hi / lo)
    grid = np.logspace(math.log10(lo), math.log10(hi), int(round(decades * per_decade)) + 1)
    table = renewal_function(sub, grid)
    product = table.values * tail_neg(sub, grid)
    k = int(np.argmax(product))
    grid_sup = float(product[k])
    lim0, lim_inf = _hinf_limits(sub)
    sup_value = max(grid_sup, lim0, lim_inf)
    spread = float(product.max() - product.min())
    if spread <= 1e-9 * grid_sup and abs(lim0 - grid_sup) <= 1e-9 * grid_sup and abs(lim_inf - grid_sup) <= 1e-9 * grid_sup:
        where = "constant"
    elif lim0 >= grid_sup and lim0 >= lim_inf:
        where = "y->0+"
    elif lim_inf >= grid_sup:
        where = "y->inf"
    else:
        where = "interior"
    return HinfResult(sup_value, where, grid_sup, float(grid[k]), lim0, lim_inf, grid, product)


def overshoot_probability(model: LevyModel, x: float) -> float:
    """``P(overshoot of level -x exceeds x) = U*(x) tail_neg(x)``.

    Raises
    ------
    NumericalMethodError
        If the product exceeds ``1 + 1e-9``.
    """
    value = float(hinf_product(model, float(x)))
    if not 0 <= value <= 1 + 1e-9:
        raise NumericalMethodError("overshoot probability outside [0, 1]", {"x": x, "value": value})
    return min(value, 1.0)


# ----------------------------------------------------------------------------
# resurrection kernel of a subordinator


def kernel_density(model: LevyModel, x: float, y):
    """Density of the resurrection position ``y`` from ``x``: ``u*(x - y) tail_neg(y)``."""
    sub = _subordinator(model)
    y = np.asarray(y, dtype=float)
    if not x > 0 or np.any((y <= 0) | (y >= x)):
        raise DomainError("kernel density needs 0 < y < x")
    return renewal_density(sub, x - y) * tail_neg(sub, y)


def _gamma_kernel_cdf(sub: LevyModel, x: float, y: float) -> float:
    # P(next <= y) = int_{x-y}^{x} tail(x - z) U*(dz).  Near z = 0 the renewal
    # density is too singular for quadrature, so that part is integrated by
    # parts against the Lévy density nu(w) = a e^{-bw}/w.
    a, b = sub.params["a"], sub.params["b"]
    lo, mid = x - y, 0.5 * x

    def U(z):
        return float(renewal_value(sub, z)) if z > 0 else 0.0

    def nu(w):
        return a * math.exp(-b * w) / w

    total = 0.0
    if lo < mid:
        body = integrate.quad(lambda z: U(z) * nu(x - z), lo, mid, limit=200, epsabs=1e-13, epsrel=1e-11)[0]
        boundary = float(tail_neg(sub, mid)) * U(mid) - (float(tail_neg(sub, x - lo)) * U(lo) if lo > 0 else 0.0)
        total += boundary - body
    start = max(lo, mid)
    total += integrate.quad(
        lambda z: float(tail_neg(sub, x - z)) * float(renewal_density(sub, z)),
        start,
        x,
        limit=200,
        epsabs=1e-13,
        epsrel=1e-11,
    )[0]
    return total


def kernel_cdf(model: LevyModel, x: float, y):
    """``P(next <= y)`` for the resurrection kernel started at ``x``.

    The stable family has the regularised incomplete Beta function as closed
    form; the Gamma family is integrated numerically.
    """
    sub = _subordinator(model)
    if not x > 0:
        raise DomainError("kernel_cdf needs x > 0")
    y_arr = np.clip(np.asarray(y, dtype=float), 0.0, x)
    if sub.family is Family.STABLE_SUBORDINATOR_NEG:
        alpha = sub.params["alpha"]
        return special.betainc(1 - alpha, alpha, y_arr / x)
    out = np.vectorize(lambda v: 0.0 if v <= 0 else _gamma_kernel_cdf(sub, x, float(v)))(y_arr)
    return out if np.ndim(y) else float(out)


def kernel_inverse_cdf_sampler(model: LevyModel, x: float, points: int = 2001):
    """Return ``sample(n, rng)`` drawing kernel positions by inverting a tabulated CDF.

    The table uses points clustered at both ends of ``(0, x)`` where the
    density is singular; inversion interpolates linearly between them.
    """
    u = 0.5 * (1.0 - np.cos(np.pi * np.linspace(0.0, 1.0, points))) ** 3
    u = np.unique(np.concatenate([u, 1.0 - u]))
    grid = x * u
    cdf = np.asarray(kernel_cdf(model, x, grid), dtype=float)
    cdf = np.maximum.accumulate(cdf) / cdf[-1]

    def sample(n: int, rng: np.random.Generator) -> np.ndarray:
        return np.interp(rng.random(n), cdf, grid)

    return sample
