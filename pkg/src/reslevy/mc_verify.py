"""Monte Carlo checks of distributional identities for resurrected processes.

Every check draws from substreams of one master seed (see :mod:`reslevy.rng`),
so results are reproducible bit for bit and do not depend on the number of
worker processes.  Each report converts to a JSON-ready block with the keys
``check, model, params, n, seed, result, pass``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np
from scipy import integrate, stats

from .analytics import Verdict, classify
from .errors import DomainError, PreconditionError
from .levy_models import Family, LevyModel, LongRun, as_stable_subordinator
from .path_engine import SimParams, auto_relative_cutoff, killed_batch
from .renewal import hinf_supremum, kernel_density, kernel_inverse_cdf_sampler, overshoot_probability, renewal_value
from .resurrection import (
    AbsorptionPolicy,
    Status,
    kernel_steps_pathwise,
    resurrect_batch,
    sample_stable_kernel,
    simulate_lifetimes,
)
from .rng import DEFAULT_CHUNK, map_chunks, substream

__all__ = [
    "EstimateWithCI",
    "KSReport",
    "CheckReport",
    "TEST_FUNCTIONS",
    "test_function",
    "ks_threshold",
    "ks_one_sample",
    "ks_two_sample",
    "check_feynman_kac",
    "check_exponential_law",
    "check_stochastic_domination",
    "check_kernel_law",
    "check_kernel_invariance",
    "check_lifetime_bound",
    "check_overshoot",
    "probe_zero_one_conjecture",
    "check_scaling_stable",
    "check_preconditions",
]

Z95 = 1.959963984540054
EXP_LAW_BUDGET = 1e6


# ----------------------------------------------------------------------------
# statistics


@dataclass(frozen=True)
class EstimateWithCI:
    mean: float
    half_width_95: float
    n: int
    censored_fraction: float = 0.0

    @classmethod
    def from_samples(cls, values, censored=None) -> "EstimateWithCI":
        values = np.asarray(values, dtype=float)
        n = values.size
        sd = float(values.std(ddof=1)) if n > 1 else 0.0
        frac = float(np.mean(censored)) if censored is not None and n else 0.0
        return cls(float(values.mean()), Z95 * sd / math.sqrt(n), n, frac)

    @classmethod
    def exact(cls, value: float, n: int = 0) -> "EstimateWithCI":
        return cls(float(value), 0.0, n, 0.0)

    @property
    def low(self) -> float:
        return self.mean - self.half_width_95

    @property
    def high(self) -> float:
        return self.mean + self.half_width_95

    def overlaps(self, other: "EstimateWithCI") -> bool:
        return self.low <= other.high and other.low <= self.high

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "half_width_95": self.half_width_95,
            "n": self.n,
            "censored_fraction": self.censored_fraction,
        }


def ks_threshold(level: float, n: int, m: int | None = None) -> float:
    """Asymptotic Kolmogorov-Smirnov critical value ``sqrt(-ln(level/2)/2)``
    scaled by ``1/sqrt(n)`` (one sample) or ``sqrt((n+m)/(n m))`` (two samples)."""
    c = math.sqrt(-math.log(level / 2.0) / 2.0)
    if m is None:
        return c / math.sqrt(n)
    return c * math.sqrt((n + m) / (n * m))


@dataclass(frozen=True)
class KSReport:
    """Kolmogorov-Smirnov outcome; ``rejected`` refers to the 5% level."""

    statistic: float
    n: int
    threshold_5pct: float
    rejected: bool
    m: int | None = None

    def threshold(self, level: float) -> float:
        return ks_threshold(level, self.n, self.m)

    def rejected_at(self, level: float) -> bool:
        return self.statistic > self.threshold(level)

    def to_dict(self) -> dict:
        out = {
            "statistic": self.statistic,
            "n": self.n,
            "threshold_5pct": self.threshold_5pct,
            "rejected": self.rejected,
        }
        if self.m is not None:
            out["m"] = self.m
        return out


def ks_one_sample(samples, cdf: Callable) -> KSReport:
    samples = np.asarray(samples, dtype=float)
    stat = float(stats.ks_1samp(samples, cdf).statistic)
    thr = ks_threshold(0.05, samples.size)
    return KSReport(stat, samples.size, thr, stat > thr)


def ks_two_sample(a, b) -> KSReport:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    stat = float(stats.ks_2samp(a, b).statistic)
    thr = ks_threshold(0.05, a.size, b.size)
    return KSReport(stat, a.size, thr, stat > thr, m=b.size)


@dataclass
class CheckReport:
    """Outcome of one check; ``result`` holds check-specific numbers."""

    check: str
    model: LevyModel
    n: int
    seed: int
    result: dict
    passed: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "model": self.model.family.value,
            "params": dict(self.model.params),
            "n": self.n,
            "seed": self.seed,
            "result": self.result,
            "pass": bool(self.passed),
            "notes": list(self.notes),
        }


# ----------------------------------------------------------------------------
# test functions with f(0) = 0


def _f_min1(y):
    return np.minimum(y, 1.0)


def _f_exp(y):
    return -np.expm1(-y)


def _f_zero(y):
    return np.zeros_like(np.asarray(y, dtype=float))


TEST_FUNCTIONS = {
    "min1": _f_min1,
    "one_minus_exp": _f_exp,
    "y_trunc": None,
    "zero": _f_zero,
}


def _f_trunc(y, cap):
    y = np.asarray(y, dtype=float)
    return np.where(y <= cap, y, 0.0)


def test_function(name: str, cap: float = 2.0) -> Callable:
    """Look up a registered test function: ``min1`` is ``min(y, 1)``,
    ``one_minus_exp`` is ``1 - e^{-y}``, ``y_trunc`` is ``y 1{y <= cap}``
    and ``zero`` is identically 0."""
    if name not in TEST_FUNCTIONS:
        raise DomainError(f"unknown test function {name!r}; choose from {sorted(TEST_FUNCTIONS)}")
    if name == "y_trunc":
        return partial(_f_trunc, cap=cap)
    return TEST_FUNCTIONS[name]


# ----------------------------------------------------------------------------
# chunk workers (module level so that process pools can pickle them)


def _fk_lhs_chunk(size, rng, model, x, t, sim, policy):
    b = resurrect_batch(model, np.full(size, x), rng, horizon=t, sim=sim, policy=policy)
    alive = b.status == list(Status).index(Status.SURVIVED)
    budget = b.status == list(Status).index(Status.BUDGET)
    return {"z": np.where(alive | budget, b.z_end, 0.0), "censored": budget}


def _fk_rhs_chunk(size, rng, model, x, t, sim):
    pb = killed_batch(model, np.full(size, x), t, sim, rng, integrate=True)
    return {"x": pb.x_end, "alive": ~pb.hit, "integral": pb.integral}


def _passage_chunk(size, rng, model, x, sim, integrate):
    pb = killed_batch(model, np.full(size, x), sim.time_budget, sim, rng, integrate=integrate)
    return {"tau": pb.tau, "pre": pb.pre, "post": pb.post, "integral": pb.integral, "crept": pb.crept}


def _domination_chunk(size, rng, model, x, horizon, n_res, sim, policy):
    b = resurrect_batch(model, np.full(size, x), rng, horizon=horizon, sim=sim, policy=policy, record_taus=n_res, stop_after=n_res)
    return {"tau_n": b.tau_n[:, n_res - 1], "status": b.status}


def _lifetime_chunk(size, rng, model, x, policy, sim, method):
    lb = simulate_lifetimes(model, x, size, rng, policy=policy, sim=sim, method=method)
    return {"zeta": lb.zeta, "censored": lb.censored, "status": lb.status, "n_res": lb.n_resurrections}


def _kernel_chunk(size, rng, model, x, sim):
    out = kernel_steps_pathwise(model, x, size, rng, sim)
    return {"next": out["next"], "tau": out["tau_inc"], "censored": out["censored"]}


def _absorption_chunk(size, rng, model, x, horizon, sim, policy):
    b = resurrect_batch(model, np.full(size, x), rng, horizon=horizon, sim=sim, policy=policy)
    return {"status": b.status}


def _run(fn, n, seed, tag, chunk_size, workers, **kwargs) -> dict:
    return map_chunks(partial(fn, **kwargs), n, seed, tag, chunk_size=chunk_size, workers=workers)


def _sim_for(model: LevyModel, sim: SimParams | None) -> SimParams:
    return sim if sim is not None else SimParams(relative_truncation=auto_relative_cutoff(model))


# ----------------------------------------------------------------------------
# checks


def check_feynman_kac(
    model: LevyModel,
    x: float,
    t: float,
    f: str = "min1",
    n: int = 100_000,
    seed: int = 0,
    sim: SimParams | None = None,
    policy: AbsorptionPolicy | None = None,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
    cap: float = 2.0,
) -> CheckReport:
    """Two-sided check of ``E_x[f(Z_t); t < zeta] = E_x[f(X_t) exp(int_0^t tail(X_s) ds); t < tau]``.

    The left side averages ``f`` over resurrected paths; the right side
    averages killed paths reweighted by the exponential of the integrated tail
    rate.  The sides are compatible when their 95% intervals overlap.  Weights
    above ``1e12`` make the right side unstable and it is not reported.
    """
    fn = test_function(f, cap)
    if float(fn(np.array([0.0]))[0]) != 0.0:
        raise PreconditionError("f", "test function must vanish at 0")
    sim = _sim_for(model, sim)
    notes = []
    if not model.is_finite_activity:
        notes.append("infinite activity: both sides use the truncated path approximation")
    if t == 0:
        value = float(fn(np.array([x]))[0])
        lhs = rhs = EstimateWithCI.exact(value, n)
        result = {"lhs": lhs.to_dict(), "rhs": rhs.to_dict(), "compatible": True, "unstable": False, "max_weight": 1.0}
        return CheckReport("feynman_kac", model, n, seed, result, True, notes)
    left = _run(_fk_lhs_chunk, n, seed, "fk-lhs", chunk_size, workers, model=model, x=x, t=t, sim=sim, policy=policy)
    right = _run(_fk_rhs_chunk, n, seed, "fk-rhs", chunk_size, workers, model=model, x=x, t=t, sim=sim)
    lhs = EstimateWithCI.from_samples(fn(left["z"]), left["censored"])
    if np.any(right["integral"] < -1e-12):
        raise AssertionError("negative exponent in the Feynman-Kac weight")
    weight = np.exp(np.minimum(right["integral"], 700.0))
    max_weight = float(weight.max(initial=1.0))
    unstable = bool(np.any(right["integral"] > math.log(1e12)))
    result = {"lhs": lhs.to_dict(), "max_weight": max_weight, "unstable": unstable}
    if unstable:
        result.update({"rhs": None, "compatible": False})
        notes.append("right-hand weight exceeded 1e12")
        return CheckReport("feynman_kac", model, n, seed, result, False, notes)
    rhs = EstimateWithCI.from_samples(np.where(right["alive"], fn(right["x"]) * weight, 0.0))
    compatible = lhs.overlaps(rhs)
    result.update({"rhs": rhs.to_dict(), "compatible": compatible})
    return CheckReport("feynman_kac", model, n, seed, result, compatible, notes)


def _require_domination(model: LevyModel) -> None:
    f = model.flags
    if not (f.has_neg_jumps and f.finite_neg_activity):
        raise PreconditionError("finite_neg_activity", "domination needs 0 < nu(-inf, 0) < inf")
    if f.creeps_down:
        raise PreconditionError("creeps_down", "domination needs a model that does not creep downward")


def _require_subordinator(model: LevyModel) -> None:
    if not model.flags.is_neg_subordinator:
        raise PreconditionError("is_neg_subordinator", "needs a negative subordinator")


def _require_not_drifting_up(model: LevyModel) -> None:
    if model.flags.long_run is LongRun.DRIFTS_PLUS:
        raise PreconditionError("long_run", "needs a model not drifting to +infinity")


def _require_exp_law(model: LevyModel) -> None:
    if model.flags.creeps_down:
        raise PreconditionError("creeps_down", "the exponential law needs a model that does not creep downward")
    if model.flags.long_run is LongRun.DRIFTS_PLUS:
        raise PreconditionError("long_run", "the exponential law needs a model not drifting to +infinity")


def check_exponential_law(
    model: LevyModel,
    x: float,
    n: int = 10_000,
    seed: int = 0,
    sim: SimParams | None = None,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> CheckReport:
    """KS test of ``int_0^tau tail(X_t) dt`` against Exp(1).

    Paths still above 0 at the end of the passage budget enter with the
    integral accumulated so far, a lower bound of their value.  Without
    ``sim`` the passage budget is ``1e6`` time units, since oscillating models
    have heavy-tailed passage times.
    """
    _require_exp_law(model)
    if sim is None:
        sim = SimParams(relative_truncation=auto_relative_cutoff(model), budget=EXP_LAW_BUDGET)
    out = _run(_passage_chunk, n, seed, "exp-law", chunk_size, workers, model=model, x=x, sim=sim, integrate=True)
    integral = out["integral"]
    censored = ~np.isfinite(out["tau"])
    ks = ks_one_sample(integral, stats.expon.cdf)
    mean = EstimateWithCI.from_samples(integral, censored)
    result = {"ks": ks.to_dict(), "mean": mean.to_dict(), "censored_fraction": float(censored.mean())}
    return CheckReport("exponential_law", model, n, seed, result, not ks.rejected)


def check_stochastic_domination(
    model: LevyModel,
    x: float,
    n_res: int = 20,
    n_paths: int = 10_000,
    seed: int = 0,
    horizon: float | None = None,
    sim: SimParams | None = None,
    policy: AbsorptionPolicy | None = None,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> CheckReport:
    """Compare the law of ``tau_{n_res}`` with Gamma(n_res, rate = tail(0+)).

    The domination ``tau_n >=_st Gamma`` means the empirical CDF stays below
    the Gamma CDF; the largest excess is compared with the band
    ``2 / sqrt(n_paths)``.  Traces still short of ``n_res`` resurrections at
    the horizon (default ``1000 n_res / tail(0+)``) count as ``tau_n > horizon``.
    """
    _require_domination(model)
    rate = model.neg_activity
    horizon = horizon if horizon is not None else 1000.0 * n_res / rate
    sim = _sim_for(model, sim)
    out = _run(
        _domination_chunk, n_paths, seed, "domination", chunk_size, workers,
        model=model, x=x, horizon=horizon, n_res=n_res, sim=sim, policy=policy,
    )
    tau = out["tau_n"]
    done = np.sort(tau[np.isfinite(tau)])
    ecdf = np.arange(1, done.size + 1) / n_paths
    gamma_cdf = stats.gamma.cdf(done, n_res, scale=1.0 / rate)
    violation = float(np.max(ecdf - gamma_cdf, initial=0.0))
    band = 2.0 / math.sqrt(n_paths)
    absorbed = int(np.sum(out["status"] == list(Status).index(Status.ABSORBED)))
    censored = 1.0 - done.size / n_paths
    mean = EstimateWithCI.from_samples(np.where(np.isfinite(tau), tau, horizon), ~np.isfinite(tau))
    result = {
        "violation": violation,
        "band": band,
        "rate": rate,
        "horizon": horizon,
        "absorbed": absorbed,
        "censored_fraction": censored,
        "mean_tau_n": mean.to_dict(),
        "gamma_mean": n_res / rate,
    }
    return CheckReport("stochastic_domination", model, n_paths, seed, result, violation <= band and absorbed == 0)


def check_kernel_law(
    model: LevyModel,
    x: float = 1.0,
    n: int = 10_000,
    seed: int = 0,
    sim: SimParams | None = None,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> CheckReport:
    """Pathwise kernel steps against the closed-form kernel of a subordinator.

    Two two-sample KS tests at the 1% level: simulated positions against
    inverse-CDF draws from the tabulated kernel, and (stable family) against
    an exact Beta(1-alpha, alpha) sampler.  Also integrates the density.
    """
    _require_subordinator(model)
    sim = _sim_for(model, sim)
    out = _run(_kernel_chunk, n, seed, "kernel-path", chunk_size, workers, model=model, x=x, sim=sim)
    rng = substream(seed, "kernel-ref")
    reference = kernel_inverse_cdf_sampler(model, x)(n, rng)
    vs_cdf = ks_two_sample(out["next"], reference)
    result = {"vs_inverse_cdf": vs_cdf.to_dict(), "vs_inverse_cdf_rejected_1pct": vs_cdf.rejected_at(0.01)}
    passed = not vs_cdf.rejected_at(0.01)
    stable = as_stable_subordinator(model)
    if stable is not None:
        alpha = stable.params["alpha"]
        beta = x * rng.beta(1 - alpha, alpha, n)
        vs_beta = ks_two_sample(out["next"], beta)
        result.update({"vs_beta": vs_beta.to_dict(), "vs_beta_rejected_1pct": vs_beta.rejected_at(0.01)})
        passed &= not vs_beta.rejected_at(0.01)
        # both endpoint singularities are algebraic: let QAWS weight them
        mass = integrate.quad(
            lambda y: _smooth_stable_kernel(model, x, y, alpha),
            0.0,
            x,
            weight="alg",
            wvar=(-alpha, alpha - 1),
        )[0]
    else:
        from .renewal import kernel_cdf

        mass = float(kernel_cdf(model, x, x))
    result["density_mass"] = mass
    passed &= abs(mass - 1.0) <= 1e-4
    return CheckReport("kernel_law", model, n, seed, result, bool(passed))


def _smooth_stable_kernel(model, x, y, alpha):
    # QAWS may sample the endpoints themselves
    y = min(max(y, x * 1e-15), x * (1 - 1e-15))
    return kernel_density(model, x, y) * y**alpha * (x - y) ** (1 - alpha)


def check_lifetime_bound(
    model: LevyModel,
    x: float = 1.0,
    n: int = 10_000,
    seed: int = 0,
    policy: AbsorptionPolicy | None = None,
    sim: SimParams | None = None,
    slack: float = 0.10,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> CheckReport:
    """Mean lifetime against the bound ``U*(x) / (1 - c)`` with
    ``c = sup_y U*(y) tail(y)``, plus ``E_x tau`` against ``U*(x)``.

    Passes when the uncensored mean lifetime is below ``(1 + slack)`` times
    the bound, fewer than 1% of runs are censored and the simulated mean
    first-passage time is within 5% of ``U*(x)``.
    """
    _require_subordinator(model)
    hinf = hinf_supremum(model)
    if not hinf.sup_value < 1:
        raise PreconditionError("hinf", "the lifetime bound needs sup U* tail < 1")
    u_x = float(renewal_value(model, x))
    bound = u_x / (1.0 - hinf.sup_value)
    life = _run(_lifetime_chunk, n, seed, "lifetime", chunk_size, workers, model=model, x=x, policy=policy, sim=None, method="auto")
    cens = life["censored"]
    zeta = EstimateWithCI.from_samples(life["zeta"][~cens], cens) if np.any(~cens) else EstimateWithCI(math.nan, math.nan, 0, 1.0)
    psim = _sim_for(model, sim)
    fp = _run(_passage_chunk, n, seed, "lifetime-tau", chunk_size, workers, model=model, x=x, sim=psim, integrate=False)
    tau = fp["tau"]
    e_tau = EstimateWithCI.from_samples(np.where(np.isfinite(tau), tau, psim.time_budget), ~np.isfinite(tau))
    censored_fraction = float(cens.mean())
    passed = (
        zeta.mean <= bound * (1 + slack)
        and censored_fraction < 0.01
        and abs(e_tau.mean / u_x - 1.0) <= 0.05
    )
    result = {
        "bound": bound,
        "hinf_sup": hinf.sup_value,
        "U_star_x": u_x,
        "zeta": zeta.to_dict(),
        "censored_fraction": censored_fraction,
        "mean_resurrections": float(np.mean(life["n_res"])),
        "e_tau": e_tau.to_dict(),
        "e_tau_rel_error": e_tau.mean / u_x - 1.0,
    }
    return CheckReport("lifetime_bound", model, n, seed, result, bool(passed))


def check_overshoot(
    model: LevyModel,
    x: float,
    n: int = 100_000,
    seed: int = 0,
    sim: SimParams | None = None,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> CheckReport:
    """MC frequency of a passage jump larger than ``x`` from level ``x``
    against ``U*(x) tail(x)``; passes within 3 standard errors."""
    _require_subordinator(model)
    value = overshoot_probability(model, x)
    sim = _sim_for(model, sim)
    out = _run(_passage_chunk, n, seed, "overshoot", chunk_size, workers, model=model, x=x, sim=sim, integrate=False)
    hit = np.isfinite(out["tau"])
    big = hit & (out["pre"] - out["post"] > x)
    est = EstimateWithCI.from_samples(big.astype(float), ~hit)
    se = math.sqrt(max(value * (1 - value), 1e-300) / n)
    passed = abs(est.mean - value) <= 3 * se
    result = {"analytic": value, "mc": est.to_dict(), "z_score": (est.mean - value) / se if se > 0 else 0.0}
    return CheckReport("overshoot", model, n, seed, result, bool(passed))


def _require_absorbed(model: LevyModel) -> None:
    v = classify(model)
    if v.verdict is not Verdict.ABSORBED:
        raise PreconditionError("verdict", f"needs an AbsorbedAS model, classifier says {v.verdict.value}")


def _lifetimes(model, x, n, seed, tag, policy, chunk_size, workers) -> dict:
    return _run(_lifetime_chunk, n, seed, tag, chunk_size, workers, model=model, x=x, policy=policy, sim=None, method="auto")


def check_kernel_invariance(
    model: LevyModel,
    xs=(0.5, 1.0, 2.0),
    n: int = 10_000,
    seed: int = 0,
    lam: float = 1.0,
    grid_points: int = 32,
    policy: AbsorptionPolicy | None = None,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> CheckReport:
    """Invariance of ``f(x) = E_x e^{-lam zeta}`` under the kernel.

    Compares ``f(x)`` estimated directly with the nested estimate
    ``E_x[e^{-lam tau_1} f(Z_{tau_1})]``, where ``f`` is tabulated on a log
    grid of ``grid_points`` levels from ``sqrt(n)`` inner lifetimes each and
    interpolated in ``log z`` (with ``f(0+) = 1`` below the grid).  The
    nested interval includes the inner-sample variance.
    """
    _require_absorbed_subordinator(model)
    xs = [float(v) for v in xs]
    n_inner = max(2, int(round(math.sqrt(n))))
    z_grid = np.logspace(math.log10(min(xs)) - 6, math.log10(max(xs)), grid_points)
    f_tab = np.empty(grid_points)
    s2_tab = np.empty(grid_points)
    inner_censored = 0.0
    for j, z in enumerate(z_grid):
        life = _lifetimes(model, float(z), n_inner, seed, f"invariance-inner-{j}", policy, chunk_size, workers)
        vals = np.exp(-lam * life["zeta"])
        f_tab[j], s2_tab[j] = vals.mean(), vals.var(ddof=1)
        inner_censored = max(inner_censored, float(life["censored"].mean()))
    log_grid = np.log(z_grid)
    rows = []
    passed = True
    inconclusive = inner_censored > 0.05
    for i, x in enumerate(xs):
        direct = _lifetimes(model, x, n, seed, f"invariance-direct-{i}", policy, chunk_size, workers)
        d_est = EstimateWithCI.from_samples(np.exp(-lam * direct["zeta"]), direct["censored"])
        if as_stable_subordinator(model) is not None:
            nxt, tau1 = sample_stable_kernel(model, np.full(n, x), substream(seed, f"invariance-kernel-{i}"))
        else:
            k = kernel_steps_pathwise(model, x, n, substream(seed, f"invariance-kernel-{i}"))
            nxt, tau1 = k["next"], k["tau_inc"]
        # interpolation weights of every outer sample on the grid
        pos = np.interp(np.log(np.maximum(nxt, 1e-300)), log_grid, np.arange(grid_points))
        lo = np.floor(pos).astype(int)
        hi = np.minimum(lo + 1, grid_points - 1)
        frac = pos - lo
        below = nxt < z_grid[0]
        w_lo = np.where(below, 0.0, 1.0 - frac)
        w_hi = np.where(below, 0.0, frac)
        # below the grid, interpolate linearly in z between f(0+) = 1 and the first node
        t_below = np.where(below, nxt / z_grid[0], 0.0)
        f_vals = w_lo * f_tab[lo] + w_hi * f_tab[hi] + np.where(below, (1 - t_below) + t_below * f_tab[0], 0.0)
        disc = np.exp(-lam * tau1)
        nested_vals = disc * f_vals
        c = np.zeros(grid_points)
        np.add.at(c, lo, disc * (w_lo + np.where(below, t_below, 0.0)) / n)
        np.add.at(c, hi, disc * w_hi / n)
        var = nested_vals.var(ddof=1) / n + float(np.sum(c**2 * s2_tab)) / n_inner
        nested = EstimateWithCI(float(nested_vals.mean()), Z95 * math.sqrt(var), n, 0.0)
        ok = d_est.overlaps(nested)
        passed &= ok
        inconclusive |= d_est.censored_fraction > 0.05
        rows.append({"x": x, "direct": d_est.to_dict(), "nested": nested.to_dict(), "compatible": ok})
    monotone = all(rows[i]["direct"]["mean"] >= rows[i + 1]["direct"]["mean"] for i in range(len(rows) - 1)) if xs == sorted(xs) else None
    result = {"lam": lam, "n_inner": n_inner, "rows": rows, "inconclusive": inconclusive, "decreasing_in_x": monotone}
    return CheckReport("kernel_invariance", model, n, seed, result, bool(passed and not inconclusive))


def probe_zero_one_conjecture(
    model: LevyModel,
    xs=(0.5, 1.0, 2.0),
    n: int = 1_000,
    seed: int = 0,
    horizon: float | None = None,
    sim: SimParams | None = None,
    policy: AbsorptionPolicy | None = None,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> CheckReport:
    """Empirical absorption frequency per start; evidence only, no verdict.

    A trace counts as absorbed when the policy fires or the path creeps to 0.
    ``consistent`` reports whether the spread of frequencies across starts
    fits within the two widest 95% intervals.
    """
    _require_not_drifting_up(model)
    sim = _sim_for(model, sim)
    codes = list(Status)
    rows = []
    for i, x in enumerate(xs):
        out = _run(_absorption_chunk, n, seed, f"zero-one-{i}", chunk_size, workers,
                   model=model, x=float(x), horizon=horizon, sim=sim, policy=policy)
        st = out["status"]
        absorbed = (st == codes.index(Status.ABSORBED)) | (st == codes.index(Status.CREPT))
        est = EstimateWithCI.from_samples(absorbed.astype(float), st == codes.index(Status.BUDGET))
        rows.append({"x": float(x), "frequency": est.to_dict()})
    freqs = [r["frequency"]["mean"] for r in rows]
    widths = sorted((r["frequency"]["half_width_95"] for r in rows), reverse=True)
    consistent = max(freqs) - min(freqs) <= sum(widths[:2]) + 1e-15
    result = {"rows": rows, "consistent": consistent, "horizon": horizon}
    return CheckReport("zero_one_probe", model, n, seed, result, True)


def check_scaling_stable(
    model: LevyModel,
    xs=(0.5, 1.0, 2.0),
    n: int = 10_000,
    seed: int = 0,
    exponent: float | None = None,
    policy: AbsorptionPolicy | None = None,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> CheckReport:
    """Pairwise two-sample KS on ``zeta / x^exponent`` across starts.

    ``exponent`` defaults to ``alpha``.  Tests run at the Bonferroni-adjusted
    1% level; the check passes when no pair is rejected.
    """
    _require_absorbed_stable(model)
    alpha = model.params["alpha"]
    exponent = alpha if exponent is None else exponent
    xs = [float(v) for v in xs]
    samples = []
    censored = 0.0
    for i, x in enumerate(xs):
        life = _lifetimes(model, x, n, seed, f"scaling-{i}", policy, chunk_size, workers)
        censored = max(censored, float(life["censored"].mean()))
        samples.append(life["zeta"] / x**exponent)
    pairs = [(i, j) for i in range(len(xs)) for j in range(i + 1, len(xs))]
    level = 0.01 / max(len(pairs), 1)
    matrix = []
    rejected_any = False
    for i, j in pairs:
        ks = ks_two_sample(samples[i], samples[j])
        rej = ks.rejected_at(level)
        rejected_any |= rej
        matrix.append({"i": xs[i], "j": xs[j], "statistic": ks.statistic, "threshold": ks.threshold(level), "rejected": rej})
    inconclusive = censored > 0.05
    result = {"exponent": exponent, "level": level, "pairs": matrix, "rejected_any": rejected_any, "inconclusive": inconclusive}
    return CheckReport("scaling_stable", model, n, seed, result, not rejected_any and not inconclusive)


def _require_nothing(model: LevyModel) -> None:
    return None


def _require_absorbed_subordinator(model: LevyModel) -> None:
    _require_subordinator(model)
    _require_absorbed(model)


def _require_absorbed_stable(model: LevyModel) -> None:
    if as_stable_subordinator(model) is None and model.family is not Family.STABLE:
        raise PreconditionError("family", "the scaling check needs a stable family")
    _require_absorbed(model)


_PRECONDITIONS = {
    "feynman_kac": _require_nothing,
    "exponential_law": _require_exp_law,
    "stochastic_domination": _require_domination,
    "kernel_law": _require_subordinator,
    "kernel_invariance": _require_absorbed_subordinator,
    "lifetime_bound": _require_subordinator,
    "overshoot": _require_subordinator,
    "scaling_stable": _require_absorbed_stable,
    "zero_one_probe": _require_not_drifting_up,
}


def check_preconditions(check: str, model: LevyModel) -> None:
    """Raise :class:`PreconditionError` if ``model`` cannot run ``check``.

    Cheap flag and classifier tests only, so callers can validate a whole run
    before any sampling starts.
    """
    if check not in _PRECONDITIONS:
        raise DomainError(f"unknown check {check!r}")
    _PRECONDITIONS[check](model)
