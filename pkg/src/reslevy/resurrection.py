"""Resurrected Lévy processes on the positive half-line.

``Z`` follows ``X`` until ``X`` jumps through 0; the crossing jump is removed
and ``Z`` restarts from the pre-jump position.  By the strong Markov property
each restart is a fresh killed passage from ``X_{tau-}``, so traces are built
by chaining :func:`reslevy.path_engine.killed_batch` calls.  A passage that
creeps to 0 ends the trace: ``Z`` is absorbed continuously.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, UnsupportedOperationError
from .levy_models import LevyModel, as_stable_subordinator
from .path_engine import JumpRecord, Node, SimParams, SimPath, auto_relative_cutoff, killed_batch

__all__ = [
    "Status",
    "AbsorptionPolicy",
    "ResurrectionTrace",
    "ResurrectionBatch",
    "KernelStep",
    "CensoredStep",
    "LifetimeBatch",
    "resurrect_path",
    "resurrect_batch",
    "kernel_step_pathwise",
    "kernel_steps_pathwise",
    "sample_stable_kernel",
    "simulate_lifetimes",
    "default_sim_params",
]


class Status(str, Enum):
    ABSORBED = "AbsorbedNumerically"
    SURVIVED = "SurvivedHorizon"
    BUDGET = "BudgetExhausted"
    CREPT = "CreptToZero"


_CODES = list(Status)


@dataclass(frozen=True)
class AbsorptionPolicy:
    """When to stop a resurrection cascade.

    A trace is declared absorbed once ``Z(tau_n) < eps_abs * start`` and the
    last ``window`` resurrection gaps add up to less than
    ``eps_time * elapsed``.  More than ``n_max`` resurrections, ``wall_time``
    seconds of computation, ``max_time`` units of model time, or a position
    below ``floor`` (where doubles stop resolving the cascade) end it as
    ``BudgetExhausted``.
    """

    eps_abs: float = 1e-6
    eps_time: float = 1e-8
    window: int = 10
    n_max: int = 100_000
    wall_time: float = 600.0
    max_time: float | None = None
    floor: float = 1e-280


@dataclass
class ResurrectionTrace:
    """One resurrected trajectory.

    ``path`` is ``Z`` on the skeleton of the driving path.  The driving path
    itself has continuous increments ``driving_cont`` and jumps
    ``driving_jump`` at the skeleton nodes; ``removed`` lists the crossing
    jumps that ``Z`` does not make.
    """

    path: SimPath
    tau_seq: np.ndarray
    pos_seq: np.ndarray
    removed: list[JumpRecord]
    status: Status
    zeta: float | None
    elapsed: float
    driving_cont: np.ndarray
    driving_jump: np.ndarray
    removed_mask: np.ndarray = field(repr=False)

    def driving_values(self) -> tuple[np.ndarray, np.ndarray]:
        """Left and right values of the driving path: ``Z`` plus the removed jumps."""
        shift = np.cumsum(np.where(self.removed_mask, self.driving_jump, 0.0))
        right = self.path.values + shift
        left = self.path.left_values + shift - np.where(self.removed_mask, self.driving_jump, 0.0)
        return left, right

    def rows(self) -> list[tuple[int, float, float]]:
        return [(i + 1, float(t), float(z)) for i, (t, z) in enumerate(zip(self.tau_seq, self.pos_seq))]


@dataclass
class ResurrectionBatch:
    """Outcome of many independent traces.

    ``zeta`` is the lifetime for absorbed or crept traces and the elapsed
    time (a lower bound) otherwise; ``z_end`` is ``Z`` when the trace stopped
    (0 once absorbed).  ``tau_n[:, k]`` holds the time of resurrection
    ``k + 1`` or ``nan``.
    """

    status: np.ndarray
    zeta: np.ndarray
    n_resurrections: np.ndarray
    z_end: np.ndarray
    tau_n: np.ndarray

    @property
    def censored(self) -> np.ndarray:
        return (self.status != _CODES.index(Status.ABSORBED)) & (self.status != _CODES.index(Status.CREPT))

    def count(self, status: Status) -> int:
        return int(np.sum(self.status == _CODES.index(status)))

    def status_names(self) -> list[str]:
        return [_CODES[c].value for c in self.status]

    def as_arrays(self) -> dict:
        return {
            "status": self.status,
            "zeta": self.zeta,
            "n_resurrections": self.n_resurrections,
            "z_end": self.z_end,
            "tau_n": self.tau_n,
        }


def default_sim_params(model: LevyModel, sim: SimParams | None = None) -> SimParams:
    """Fill in a level-relative cutoff for infinite-activity pure-jump models."""
    if sim is not None:
        return sim
    return SimParams(relative_truncation=auto_relative_cutoff(model))


class _PolicyState:
    """Vectorised bookkeeping of the absorption policy for a batch."""

    def __init__(self, starts: np.ndarray, policy: AbsorptionPolicy):
        self.policy = policy
        self.starts = starts
        self.gaps = np.zeros((starts.size, policy.window))

    def update(self, idx, gaps, n_res, positions, elapsed) -> tuple[np.ndarray, np.ndarray]:
        """Record gaps; return (absorbed, exhausted) masks for ``idx``."""
        p = self.policy
        self.gaps[idx, (n_res - 1) % p.window] = gaps
        recent = self.gaps[idx].sum(axis=1)
        absorbed = (n_res >= p.window) & (positions < p.eps_abs * self.starts[idx]) & (recent < p.eps_time * elapsed)
        exhausted = ~absorbed & ((n_res >= p.n_max) | (positions < p.floor))
        return absorbed, exhausted


def resurrect_batch(
    model: LevyModel,
    starts,
    rng: np.random.Generator,
    horizon: float | None = None,
    sim: SimParams | None = None,
    policy: AbsorptionPolicy | None = None,
    record_taus: int = 0,
    stop_after: int | None = None,
) -> ResurrectionBatch:
    """Run independent resurrection traces from ``starts``.

    Parameters
    ----------
    horizon : float, optional
        Model time at which surviving traces stop with ``SurvivedHorizon``.
        Without a horizon the traces run until absorption or a budget ends
        them (``policy.max_time`` or the passage budget of ``sim``).
    record_taus : int
        Number of leading resurrection times to keep per trace.
    stop_after : int, optional
        Stop a trace alive (``SurvivedHorizon``) after this many resurrections.
    """
    sim = default_sim_params(model, sim)
    policy = policy or AbsorptionPolicy()
    starts = np.atleast_1d(np.asarray(starts, dtype=float)).copy()
    if np.any(~(starts > 0)):
        raise DomainError("starting levels must be > 0")
    n = starts.size
    cap = horizon if horizon is not None else (policy.max_time or sim.time_budget)
    z = starts.copy()
    elapsed = np.zeros(n)
    n_res = np.zeros(n, dtype=np.int64)
    status = np.full(n, -1, dtype=np.int64)
    zeta = np.zeros(n)
    z_end = np.zeros(n)
    tau_n = np.full((n, record_taus), np.nan)
    state = _PolicyState(starts, policy)
    active = np.arange(n)
    code = {s: _CODES.index(s) for s in Status}
    clock = time.perf_counter()
    while active.size:
        if time.perf_counter() - clock > policy.wall_time:
            status[active] = code[Status.BUDGET]
            zeta[active] = elapsed[active]
            z_end[active] = z[active]
            break
        pb = killed_batch(model, z[active], np.maximum(cap - elapsed[active], 0.0), sim, rng)
        hit, crept = pb.hit, pb.crept

        idx = active[crept]
        status[idx] = code[Status.CREPT]
        zeta[idx] = elapsed[idx] + pb.tau[crept]

        miss = ~hit
        idx = active[miss]
        status[idx] = code[Status.SURVIVED] if horizon is not None else code[Status.BUDGET]
        zeta[idx] = cap
        z_end[idx] = pb.x_end[miss]

        jump = hit & ~crept
        idx = active[jump]
        elapsed[idx] += pb.tau[jump]
        z[idx] = pb.pre[jump]
        n_res[idx] += 1
        if record_taus:
            k = n_res[idx] - 1
            ok = k < record_taus
            tau_n[idx[ok], k[ok]] = elapsed[idx[ok]]
        absorbed, exhausted = state.update(idx, pb.tau[jump], n_res[idx], z[idx], elapsed[idx])
        stopped = ~absorbed & ~exhausted & (n_res[idx] >= stop_after) if stop_after else np.zeros(idx.size, bool)
        status[idx[absorbed]] = code[Status.ABSORBED]
        status[idx[exhausted]] = code[Status.BUDGET]
        status[idx[stopped]] = code[Status.SURVIVED]
        ended = idx[absorbed | exhausted | stopped]
        zeta[ended] = elapsed[ended]
        z_end[idx[exhausted | stopped]] = z[idx[exhausted | stopped]]
        active = active[status[active] < 0]
    return ResurrectionBatch(status, zeta, n_res, z_end, tau_n)


def resurrect_path(
    model: LevyModel,
    start: float,
    rng: np.random.Generator,
    horizon: float | None = None,
    sim: SimParams | None = None,
    policy: AbsorptionPolicy | None = None,
) -> ResurrectionTrace:
    """Build one resurrected trajectory with its full skeleton."""
    sim = default_sim_params(model, sim)
    policy = policy or AbsorptionPolicy()
    if not start > 0:
        raise DomainError("start must be > 0")
    cap = horizon if horizon is not None else (policy.max_time or sim.time_budget)
    nodes: list[Node] = [Node(0.0, start, start, 0.0, 0.0)]
    removed_mask = [False]
    removed: list[JumpRecord] = []
    taus: list[float] = []
    positions: list[float] = []
    gaps: list[float] = []
    z, elapsed = float(start), 0.0
    zeta = None
    clock = time.perf_counter()
    while True:
        if time.perf_counter() - clock > policy.wall_time:
            status = Status.BUDGET
            break
        rec: list[Node] = []
        pb = killed_batch(model, [z], max(cap - elapsed, 0.0), sim, rng, record=rec)
        out = pb.item()
        for node in rec:
            nodes.append(Node(node.t + elapsed, node.left, node.right, node.cont, node.jump))
            removed_mask.append(False)
        if not out.hit:
            elapsed = cap
            status = Status.SURVIVED if horizon is not None else Status.BUDGET
            break
        if out.crept:
            zeta = elapsed + out.tau
            elapsed = zeta
            status = Status.CREPT
            break
        # remove the crossing jump: Z stays at the pre-jump value
        last = nodes[-1]
        nodes[-1] = Node(last.t, last.left, last.left, last.cont, last.jump)
        removed_mask[-1] = True
        removed.append(JumpRecord(last.t, last.jump))
        elapsed += out.tau
        gaps.append(out.tau)
        z = out.pre
        taus.append(elapsed)
        positions.append(z)
        n_res = len(taus)
        recent = sum(gaps[-policy.window :])
        if n_res >= policy.window and z < policy.eps_abs * start and recent < policy.eps_time * elapsed:
            status, zeta = Status.ABSORBED, elapsed
            break
        if n_res >= policy.n_max or z < policy.floor:
            status = Status.BUDGET
            break
    times = np.array([nd.t for nd in nodes])
    left = np.array([nd.left for nd in nodes])
    right = np.array([nd.right for nd in nodes])
    cont = np.array([nd.cont for nd in nodes])
    jumps = np.array([nd.jump for nd in nodes])
    mask = np.array(removed_mask)
    kept = [JumpRecord(float(t), float(j)) for t, j, m in zip(times, jumps, mask) if j != 0 and not m]
    path = SimPath(times, right, left, kept, float(elapsed), float(sim.truncation_delta), float(sim.grid_dt))
    return ResurrectionTrace(
        path,
        np.array(taus),
        np.array(positions),
        removed,
        status,
        zeta,
        float(elapsed),
        cont,
        jumps,
        mask,
    )


# ----------------------------------------------------------------------------
# kernel steps


@dataclass(frozen=True)
class KernelStep:
    next: float
    tau_inc: float


@dataclass(frozen=True)
class CensoredStep:
    """The passage did not end within the budget ``elapsed``."""

    elapsed: float


def kernel_steps_pathwise(
    model: LevyModel, x: float, n: int, rng: np.random.Generator, sim: SimParams | None = None
) -> dict:
    """``n`` independent draws of ``(X_{tau-}, tau)`` from ``x`` by path simulation.

    Returns arrays ``next`` (0 when the path crept), ``tau_inc`` (the budget
    for censored steps) and ``censored``.
    """
    sim = default_sim_params(model, sim)
    pb = killed_batch(model, np.full(n, float(x)), sim.time_budget, sim, rng)
    nxt = np.where(pb.crept, 0.0, pb.pre)
    tau = np.where(pb.hit, pb.tau, sim.time_budget)
    return {"next": nxt, "tau_inc": tau, "censored": ~pb.hit}


def kernel_step_pathwise(
    model: LevyModel, x: float, rng: np.random.Generator, sim: SimParams | None = None
) -> KernelStep | CensoredStep:
    out = kernel_steps_pathwise(model, x, 1, rng, sim)
    if out["censored"][0]:
        return CensoredStep(float(out["tau_inc"][0]))
    return KernelStep(float(out["next"][0]), float(out["tau_inc"][0]))


def _stable_u_sampler(alpha: float):
    # density on (0, pi) proportional to sin u / (sin(au)^a sin((1-a)u)^(1-a))
    def g(u):
        return np.sin(u) / (np.sin(alpha * u) ** alpha * np.sin((1 - alpha) * u) ** (1 - alpha))

    grid = np.linspace(1e-6, math.pi - 1e-6, 2001)
    bound = 1.001 * max(float(g(grid).max()), 1.0 / (alpha**alpha * (1 - alpha) ** (1 - alpha)))

    def sample(rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
        out = np.empty(size)
        gv = np.empty(size)
        pending = np.arange(size)
        while pending.size:
            u = rng.uniform(0.0, math.pi, pending.size)
            val = g(u)
            ok = rng.random(pending.size) * bound < val
            out[pending[ok]] = u[ok]
            gv[pending[ok]] = val[ok]
            pending = pending[~ok]
        return out, gv

    return sample


def sample_stable_kernel(model: LevyModel, x, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Exact joint draw of ``(X_{tau-}, tau)`` for a negative stable subordinator.

    The undershoot ratio ``X_{tau-}/x`` is Beta(1-alpha, alpha).  Given the
    subordinator's pre-passage level ``z = x - X_{tau-}``, the passage time has
    density proportional to ``p_t(z)`` in ``t``; with Kanter's representation
    of the stable density this gives
    ``tau = z^alpha W^(1-alpha) g(U) / scale`` with ``W ~ Gamma(2 - alpha)``
    and ``U`` drawn from the density proportional to ``g`` on ``(0, pi)``.
    """
    sub = as_stable_subordinator(model)
    if sub is None:
        raise UnsupportedOperationError(f"exact kernel sampling needs a stable subordinator, not {model!r}")
    alpha, scale = sub.params["alpha"], sub.params["scale"]
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ratio = rng.beta(1 - alpha, alpha, x.size)
    nxt = x * ratio
    z = x * (1.0 - ratio)
    w = rng.gamma(2 - alpha, 1.0, x.size)
    _, gv = _stable_u_sampler(alpha)(rng, x.size)
    tau = z**alpha * w ** (1 - alpha) * gv / scale
    return nxt, tau


# ----------------------------------------------------------------------------
# lifetimes


@dataclass
class LifetimeBatch:
    """Lifetime samples; censored entries hold a lower bound for ``zeta``."""

    zeta: np.ndarray
    censored: np.ndarray
    n_resurrections: np.ndarray
    status: np.ndarray

    def as_arrays(self) -> dict:
        return {
            "zeta": self.zeta,
            "censored": self.censored,
            "n_resurrections": self.n_resurrections,
            "status": self.status,
        }


def _kernel_lifetimes(model, start, n, rng, policy) -> LifetimeBatch:
    cap = policy.max_time or math.inf
    starts = np.full(n, float(start))
    z = starts.copy()
    elapsed = np.zeros(n)
    n_res = np.zeros(n, dtype=np.int64)
    status = np.full(n, -1, dtype=np.int64)
    state = _PolicyState(starts, policy)
    active = np.arange(n)
    code = {s: _CODES.index(s) for s in Status}
    clock = time.perf_counter()
    while active.size:
        if time.perf_counter() - clock > policy.wall_time:
            status[active] = code[Status.BUDGET]
            break
        nxt, dt = sample_stable_kernel(model, z[active], rng)
        elapsed[active] += dt
        z[active] = nxt
        n_res[active] += 1
        absorbed, exhausted = state.update(active, dt, n_res[active], nxt, elapsed[active])
        exhausted |= ~absorbed & (elapsed[active] > cap)
        status[active[absorbed]] = code[Status.ABSORBED]
        status[active[exhausted]] = code[Status.BUDGET]
        active = active[status[active] < 0]
    zeta = np.minimum(elapsed, cap)
    censored = status != code[Status.ABSORBED]
    return LifetimeBatch(zeta, censored, n_res, status)


def simulate_lifetimes(
    model: LevyModel,
    start: float,
    n: int,
    rng: np.random.Generator,
    policy: AbsorptionPolicy | None = None,
    sim: SimParams | None = None,
    method: str = "auto",
) -> LifetimeBatch:
    """Sample ``n`` lifetimes of ``Z`` started at ``start``.

    ``method="kernel"`` chains exact joint kernel draws and is available for
    stable subordinators (``"auto"`` picks it there); ``"pathwise"`` chains
    simulated killed passages.
    """
    policy = policy or AbsorptionPolicy()
    if not start > 0:
        raise DomainError("start must be > 0")
    exact = as_stable_subordinator(model) is not None
    if method == "kernel" or (method == "auto" and exact):
        if not exact:
            raise UnsupportedOperationError("exact kernel lifetimes need a stable subordinator")
        return _kernel_lifetimes(model, start, n, rng, policy)
    if method not in ("auto", "pathwise"):
        raise ValueError(f"unknown lifetime method {method!r}")
    batch = resurrect_batch(model, np.full(n, float(start)), rng, None, sim, policy)
    return LifetimeBatch(batch.zeta, batch.censored, batch.n_resurrections, batch.status)
