"""Jump-resolved simulation of Lévy paths and first passage below a level.

Two vectorised engines run batches of independent paths.

* The event engine handles models without a Gaussian part.  Between jumps the
  path is linear (drift, or the compensating drift of truncated small jumps),
  so creeping through 0, time-outs and jump crossings are located exactly and
  the tail rate is integrated in closed form along every segment.
* The grid engine handles models with a Gaussian part.  Paths advance on a
  grid of step ``grid_dt`` with big jumps inserted at their exact times; a
  Brownian-bridge test catches diffusive crossings between nodes.

With ``relative_truncation = eta`` the event engine sets the cutoff to
``eta`` times an anchor level, re-anchoring whenever the path falls below half
the anchor.  The cutoff then stays within a factor two of ``eta * level``,
which keeps the undershoot law of subordinators free of a fixed-cutoff
artefact at small levels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .levy_models import (
    Family,
    LevyModel,
    sample_jump_neg,
    sample_jump_up,
    tail_neg,
    tail_neg_integral,
    truncation,
)

__all__ = [
    "SimParams",
    "JumpRecord",
    "SimPath",
    "FirstPassage",
    "PassageBatch",
    "Node",
    "killed_batch",
    "first_passage_batch",
    "first_passage_below",
    "sample_path",
    "sample_grid",
    "auto_relative_cutoff",
]


@dataclass(frozen=True)
class SimParams:
    """Discretisation settings shared by all path-level routines.

    Parameters
    ----------
    grid_dt : float
        Grid step of the Gaussian engine and of :func:`sample_path`.
    truncation_delta : float
        Small-jump cutoff.  Ignored by compound Poisson families.
    relative_truncation : float, optional
        If set, the event engine uses the level-proportional cutoff
        ``relative_truncation * level`` instead of ``truncation_delta``.
    budget : float, optional
        Time budget of a single passage; defaults to ``1e6 * grid_dt``.
    """

    grid_dt: float = 1e-3
    truncation_delta: float = 1e-4
    relative_truncation: float | None = None
    budget: float | None = None

    def __post_init__(self) -> None:
        if not self.grid_dt > 0:
            raise ConfigurationError("grid_dt must be > 0")
        if not self.truncation_delta >= 0:
            raise ConfigurationError("truncation_delta must be >= 0")
        if self.relative_truncation is not None and not 0 < self.relative_truncation < 1:
            raise ConfigurationError("relative_truncation must lie in (0, 1)")
        if self.budget is not None and not self.budget > 0:
            raise ConfigurationError("budget must be > 0")

    @property
    def time_budget(self) -> float:
        return self.budget if self.budget is not None else 1e6 * self.grid_dt

    @property
    def creep_tol(self) -> float:
        return 10.0 * self.truncation_delta


@dataclass(frozen=True)
class JumpRecord:
    t: float
    size: float


@dataclass
class SimPath:
    """Skeleton of a path: ``values`` are right limits, ``left_values`` left limits."""

    times: np.ndarray
    values: np.ndarray
    left_values: np.ndarray
    jumps: list[JumpRecord]
    horizon: float
    truncation_delta: float
    grid_dt: float

    @property
    def jump_indices(self) -> np.ndarray:
        return np.flatnonzero(self.values != self.left_values)


@dataclass(frozen=True)
class FirstPassage:
    """``(tau, X_{tau-}, X_tau)`` of one path; ``tau = inf`` means not hit.

    When the level is not reached within the budget, ``pre`` and ``post`` both
    hold the final state of the path.
    """

    tau: float
    pre: float
    post: float
    crept: bool

    @property
    def hit(self) -> bool:
        return math.isfinite(self.tau)


@dataclass
class PassageBatch:
    """Array form of :class:`FirstPassage` plus the integrated tail rate.

    ``integral`` holds ``int_0^{min(tau, t_max)} tail_neg(X_s) ds`` when it
    was requested, zeros otherwise.  ``x_end`` is the state at the end of the
    simulated interval (``post`` for hits).
    """

    tau: np.ndarray
    pre: np.ndarray
    post: np.ndarray
    crept: np.ndarray
    x_end: np.ndarray
    integral: np.ndarray

    @property
    def hit(self) -> np.ndarray:
        return np.isfinite(self.tau)

    def __len__(self) -> int:
        return self.tau.size

    def item(self, i: int = 0) -> FirstPassage:
        return FirstPassage(float(self.tau[i]), float(self.pre[i]), float(self.post[i]), bool(self.crept[i]))


@dataclass(frozen=True)
class Node:
    """A skeleton node recorded by the engines for single-path traces.

    ``cont`` is the continuous increment since the previous node and ``jump``
    the jump at ``t`` (0 for grid and terminal nodes).
    """

    t: float
    left: float
    right: float
    cont: float
    jump: float


# ----------------------------------------------------------------------------
# event engine


def _block_size(active: int) -> int:
    return int(np.clip(2**16 // max(active, 1), 4, 1024))


def _event_engine(model, y0, t_max, sim, rng, integrate, record):
    n = y0.size
    tau = np.full(n, np.inf)
    pre = np.zeros(n)
    post = np.zeros(n)
    crept = np.zeros(n, dtype=bool)
    x_end = y0.copy()
    integ = np.zeros(n)
    y = y0.copy()
    t = np.zeros(n)
    active = np.arange(n)
    eta = sim.relative_truncation
    fixed = None
    if eta is None:
        fixed = truncation(model, 0.0 if model.is_finite_activity else sim.truncation_delta)
    while active.size:
        A = active.size
        ya, ta, tm = y[active], t[active], t_max[active]
        K = _block_size(A)
        if eta is None:
            tr, cut = fixed, fixed.delta
        else:
            cut_a = eta * ya
            tr, cut = truncation(model, cut_a), cut_a[:, None]
        rate_up = np.broadcast_to(np.asarray(tr.rate_up, dtype=float), (A,))
        rate_dn = np.broadcast_to(np.asarray(tr.rate_down, dtype=float), (A,))
        drift = np.broadcast_to(np.asarray(tr.drift, dtype=float), (A,))
        lam = rate_up + rate_dn
        with np.errstate(divide="ignore"):
            H = rng.exponential(1.0, (A, K)) / lam[:, None]
        J = -sample_jump_neg(model, rng, (A, K), cut)
        if np.any(rate_up > 0):
            up = sample_jump_up(model, rng, (A, K), cut)
            is_down = rng.random((A, K)) * lam[:, None] < rate_dn[:, None]
            J = np.where(is_down, J, up)
        with np.errstate(invalid="ignore", over="ignore"):
            cont = drift[:, None] * H
            post_k = ya[:, None] + np.cumsum(cont + J, axis=1)
            start_k = np.concatenate([ya[:, None], post_k[:, :-1]], axis=1)
            pre_k = start_k + cont
            Tend = ta[:, None] + np.cumsum(H, axis=1)
            Tstart = np.concatenate([ta[:, None], Tend[:, :-1]], axis=1)
            seg_len = np.minimum(Tend, tm[:, None]) - Tstart
            creep_k = (drift < 0)[:, None] & (start_k + drift[:, None] * seg_len <= 0)
            timeout_k = Tend > tm[:, None]
            cross_k = post_k <= 0
        term = creep_k | timeout_k | cross_k
        if eta is not None:
            term = term | (post_k < 0.5 * ya[:, None])
        any_t = term.any(axis=1)
        first = np.where(any_t, np.argmax(term, axis=1), K)

        if integrate:
            full = np.arange(K)[None, :] < first[:, None]
            seg = tail_neg_integral(model, np.where(full, start_k, 1.0), drift[:, None], np.where(full, H, 0.0))
            integ[active] += np.where(full, seg, 0.0).sum(axis=1)

        rows = np.flatnonzero(any_t)
        f = first[rows]
        s0, T0, d = start_k[rows, f], Tstart[rows, f], drift[rows]
        is_creep = creep_k[rows, f]
        is_to = timeout_k[rows, f] & ~is_creep
        is_cross = ~is_creep & ~is_to & cross_k[rows, f]
        is_rebase = ~is_creep & ~is_to & ~is_cross
        with np.errstate(divide="ignore", invalid="ignore"):
            creep_dur = s0 / -d
        dur = np.where(is_creep, creep_dur, np.where(is_to, tm[rows] - T0, H[rows, f]))
        end_state = np.where(is_creep, 0.0, np.where(is_to, s0 + d * np.where(is_to, dur, 0.0), post_k[rows, f]))
        if integrate and rows.size:
            integ[active[rows]] += tail_neg_integral(model, s0, d, dur)

        if record is not None:
            last = first[0] if any_t[0] else K
            for k in range(last):
                record.append(Node(Tend[0, k], pre_k[0, k], post_k[0, k], cont[0, k], J[0, k]))
            if any_t[0]:
                if is_creep[0] or is_to[0]:
                    t_stop = T0[0] + dur[0]
                    record.append(Node(t_stop, end_state[0], end_state[0], end_state[0] - s0[0], 0.0))
                else:
                    record.append(Node(Tend[0, f[0]], pre_k[0, f[0]], post_k[0, f[0]], cont[0, f[0]], J[0, f[0]]))

        # re-anchored rows continue after the event that triggered the rebase
        rb = rows[is_rebase]
        y[active[rb]] = post_k[rb, first[rb]]
        t[active[rb]] = Tend[rb, first[rb]]
        rows, f = rows[~is_rebase], f[~is_rebase]
        is_creep, is_to, is_cross = is_creep[~is_rebase], is_to[~is_rebase], is_cross[~is_rebase]
        T0, dur, end_state = T0[~is_rebase], dur[~is_rebase], end_state[~is_rebase]
        creep_dur = creep_dur[~is_rebase]
        g = active[rows]
        tau[g] = np.where(is_creep, T0 + creep_dur, np.where(is_to, np.inf, Tend[rows, f]))
        pre[g] = np.where(is_cross, pre_k[rows, f], end_state)
        post[g] = end_state
        crept[g] = is_creep
        x_end[g] = end_state

        keep = ~any_t
        ka = active[keep]
        y[ka] = post_k[keep, -1]
        t[ka] = Tend[keep, -1]
        finished = np.zeros(A, dtype=bool)
        finished[rows] = True
        active = active[~finished]
    return PassageBatch(tau, pre, post, crept, x_end, integ)


# ----------------------------------------------------------------------------
# grid engine with Brownian-bridge crossing correction


def _grid_engine(model, y0, t_max, sim, rng, integrate, record):
    if sim.relative_truncation is not None and not model.is_finite_activity:
        raise ConfigurationError("relative truncation needs a pure-jump model")
    tr = truncation(model, 0.0 if model.is_finite_activity else sim.truncation_delta)
    var = float(tr.gauss_var)
    drift = float(tr.drift)
    r_up, r_dn = float(tr.rate_up), float(tr.rate_down)
    lam = r_up + r_dn
    delta = float(tr.delta)
    dt = sim.grid_dt
    n = y0.size
    tau = np.full(n, np.inf)
    pre = np.zeros(n)
    post = np.zeros(n)
    crept = np.zeros(n, dtype=bool)
    x_end = y0.copy()
    integ = np.zeros(n)
    y = y0.copy()
    t = np.zeros(n)
    step_end = np.zeros(n)
    active = np.arange(n)

    def rate_at(x):
        return tail_neg(model, np.maximum(x, 1e-300)) if integrate else 0.0

    while active.size:
        A = active.size
        ya, ta, tm = y[active], t[active], t_max[active]
        se = step_end[active]
        new = se <= ta
        se = np.where(new, np.where(tm - ta <= dt, tm, ta + dt), se)
        step_end[active] = se
        rem = se - ta
        e = rng.exponential(1.0 / lam, A) if lam > 0 else np.full(A, np.inf)
        jump_here = e < rem
        s = np.where(jump_here, e, rem)
        z = ya + drift * s + np.sqrt(var * s) * rng.standard_normal(A)
        diffusive = z <= 0
        if var > 0:
            with np.errstate(divide="ignore", over="ignore"):
                p_bridge = np.exp(-2.0 * ya * np.maximum(z, 0.0) / (var * s))
            diffusive |= rng.random(A) < p_bridge
        if integrate:
            integ[active] += 0.5 * (rate_at(ya) + rate_at(np.where(diffusive, 0.0, z))) * s
        t_new = np.where(jump_here, ta + e, se)

        size = np.zeros(A)
        if lam > 0 and np.any(jump_here):
            k = int(jump_here.sum())
            down = rng.random(k) * lam < r_dn
            mags = np.where(down, -sample_jump_neg(model, rng, k, delta), sample_jump_up(model, rng, k, delta))
            size[jump_here] = mags
        z_post = z + size
        cross = ~diffusive & jump_here & (z_post <= 0)
        timeout = ~diffusive & ~jump_here & (se >= tm)

        if record is not None:
            if diffusive[0]:
                record.append(Node(t_new[0], 0.0, 0.0, -ya[0], 0.0))
            else:
                record.append(Node(t_new[0], z[0], z_post[0], z[0] - ya[0], size[0]))

        g = active[diffusive]
        tau[g] = t_new[diffusive]
        crept[g] = True
        pre[g] = post[g] = x_end[g] = 0.0
        g = active[cross]
        tau[g] = t_new[cross]
        pre[g] = z[cross]
        post[g] = x_end[g] = z_post[cross]
        g = active[timeout]
        pre[g] = post[g] = x_end[g] = z[timeout]

        done = diffusive | cross | timeout
        keep = ~done
        y[active[keep]] = z_post[keep]
        t[active[keep]] = t_new[keep]
        active = active[keep]
    return PassageBatch(tau, pre, post, crept, x_end, integ)


# ----------------------------------------------------------------------------
# public entry points


def auto_relative_cutoff(model: LevyModel, accuracy: float = 1e-3) -> float | None:
    """Relative cutoff giving pre-passage positions accurate to about ``accuracy``.

    The compensating drift shifts ``X_{tau-}`` by ``O(eta * level)``; near the
    starting level the kernel has a singularity of index ``alpha``, so the
    distributional error scales like ``eta^alpha``.  Returns
    ``accuracy^(1/alpha)`` for power-law families (about ``1/accuracy`` events
    per passage), a fixed ``1e-12`` for the Gamma family (its event count only
    grows like ``log(1/eta)``) and ``None`` for finite-activity models.
    """
    if model.is_finite_activity or model.has_gaussian:
        return None
    if model.family is Family.GAMMA_SUBORDINATOR_NEG:
        return 1e-12
    return max(accuracy ** (1.0 / model.params["alpha"]), 1e-14)


def killed_batch(
    model: LevyModel,
    starts,
    t_max,
    sim: SimParams,
    rng: np.random.Generator,
    *,
    integrate: bool = False,
    record: list | None = None,
) -> PassageBatch:
    """Run independent paths from ``starts`` until they pass below 0 or reach ``t_max``.

    Parameters
    ----------
    starts : array_like
        Positive starting levels.
    t_max : float or array_like
        Per-path time limit, finite.
    integrate : bool
        Accumulate ``int tail_neg(X_s) ds`` up to ``min(tau, t_max)``.
    record : list, optional
        For a single path, receives the skeleton as :class:`Node` objects.
    """
    y0 = np.atleast_1d(np.asarray(starts, dtype=float)).copy()
    if np.any(~(y0 > 0)):
        raise DomainError("starting levels must be > 0")
    tm = np.broadcast_to(np.asarray(t_max, dtype=float), y0.shape).copy()
    if np.any(~np.isfinite(tm)) or np.any(tm < 0):
        raise ConfigurationError("t_max must be finite and >= 0")
    if record is not None and y0.size != 1:
        raise ConfigurationError("recording needs a single path")
    engine = _grid_engine if model.has_gaussian else _event_engine
    return engine(model, y0, tm, sim, rng, integrate, record)


def first_passage_batch(
    model: LevyModel,
    starts,
    sim: SimParams,
    rng: np.random.Generator,
    *,
    t_max=None,
    integrate: bool = False,
) -> PassageBatch:
    """First passage below 0 for many paths, each with the time budget of ``sim``."""
    return killed_batch(model, starts, sim.time_budget if t_max is None else t_max, sim, rng, integrate=integrate)


def first_passage_below(
    model: LevyModel,
    start: float,
    rng: np.random.Generator,
    level: float = 0.0,
    sim: SimParams | None = None,
) -> FirstPassage:
    """First passage of a single path started at ``start`` below ``level``.

    Positions in the result are relative to the original axis.
    """
    sim = sim or SimParams()
    if not start > level:
        raise DomainError("start must lie above the level")
    out = killed_batch(model, [start - level], sim.time_budget, sim, rng).item()
    return FirstPassage(out.tau, out.pre + level, out.post + level, out.crept)


def sample_path(
    model: LevyModel,
    start: float,
    horizon: float,
    rng: np.random.Generator,
    grid_dt: float = 1e-3,
    truncation_delta: float = 1e-4,
) -> SimPath:
    """Path of ``X`` on ``[0, horizon]`` with jumps at their exact times.

    Jumps of size at least ``truncation_delta`` form a marked Poisson process;
    small jumps are compensated as in :func:`reslevy.levy_models.truncation`.
    Gaussian and drift parts are exact at the skeleton nodes.
    """
    if not horizon > 0:
        raise DomainError("horizon must be > 0")
    if not grid_dt > 0:
        raise ConfigurationError("grid_dt must be > 0")
    tr = truncation(model, 0.0 if model.is_finite_activity else truncation_delta)
    n_up = rng.poisson(float(tr.rate_up) * horizon)
    n_dn = rng.poisson(float(tr.rate_down) * horizon)
    jt = rng.uniform(0.0, horizon, n_up + n_dn)
    sizes = np.concatenate(
        [
            sample_jump_up(model, rng, n_up, truncation_delta),
            -sample_jump_neg(model, rng, n_dn, truncation_delta),
        ]
    )
    order = np.argsort(jt)
    jt, sizes = jt[order], sizes[order]
    grid = np.append(np.arange(0.0, horizon, grid_dt), horizon)
    times = np.union1d(grid, jt)
    jump = np.zeros(times.size)
    jump[np.searchsorted(times, jt)] = sizes
    dts = np.diff(times)
    cont = float(tr.drift) * dts + np.sqrt(float(tr.gauss_var) * dts) * rng.standard_normal(dts.size)
    values = np.empty(times.size)
    values[0] = start
    values[1:] = start + np.cumsum(cont + jump[1:])
    left = values - jump
    records = [JumpRecord(float(a), float(b)) for a, b in zip(jt, sizes)]
    return SimPath(times, values, left, records, float(horizon), float(truncation_delta), float(grid_dt))


def sample_grid(
    model: LevyModel,
    start: float,
    horizon: float,
    n: int,
    rng: np.random.Generator,
    grid_dt: float = 1e-3,
    truncation_delta: float = 1e-4,
) -> np.ndarray:
    """Values of ``n`` truncated paths on the grid ``0, grid_dt, ..., horizon``.

    Returns an array of shape ``(n, steps + 1)``.
    """
    steps = max(1, int(round(horizon / grid_dt)))
    h = horizon / steps
    tr = truncation(model, 0.0 if model.is_finite_activity else truncation_delta)
    inc = float(tr.drift) * h + math.sqrt(float(tr.gauss_var) * h) * rng.standard_normal((n, steps))
    flat = inc.ravel()
    for rate, sampler, sign in ((tr.rate_up, sample_jump_up, 1.0), (tr.rate_down, sample_jump_neg, -1.0)):
        if float(rate) > 0:
            counts = rng.poisson(float(rate) * h, flat.size)
            sizes = sampler(model, rng, int(counts.sum()), truncation_delta)
            flat += sign * np.bincount(np.repeat(np.arange(flat.size), counts), weights=sizes, minlength=flat.size)
    out = np.empty((n, steps + 1))
    out[:, 0] = start
    out[:, 1:] = start + np.cumsum(flat.reshape(n, steps), axis=1)
    return out
