"""Absorption criteria: the stable digamma criterion and the rule-based classifier."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, ParameterError
from .levy_models import Family, LevyModel, LongRun, make_model
from .renewal import hinf_supremum
from .special import digamma

__all__ = [
    "Verdict",
    "ClassificationVerdict",
    "stable_mean_xi",
    "classify",
    "criteria_map",
    "BOUNDARY_TOL",
]

BOUNDARY_TOL = 1e-12


class Verdict(str, Enum):
    ABSORBED = "AbsorbedAS"
    CONSERVATIVE = "Conservative"
    NOT_ABSORBED_WP1 = "NotAbsorbedWProb1"
    UNKNOWN = "Unknown"
    # reserved: boundary points of the stable criterion are reported as
    # Conservative with ``evidence["boundary"] = True``
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class ClassificationVerdict:
    verdict: Verdict
    rule: str
    evidence: dict = field(default_factory=dict)
    family: str = ""
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "params": dict(self.params),
            "verdict": self.verdict.value,
            "rule": self.rule,
            "evidence": dict(self.evidence),
        }


def stable_mean_xi(alpha: float, rhobar: float) -> float:
    """Sign-carrying bracket of the mean of the Lamperti exponent of ``Z``.

    ``B = (psi(1 - a r) - psi(1)) - (psi(a r) - psi(alpha))`` with
    ``a r = alpha * rhobar``.  By the reflection formula this equals
    ``pi cot(pi a r) - (psi(1) - psi(alpha))``; ``Z`` is absorbed iff ``B < 0``.

    Raises
    ------
    DomainError
        If ``alpha * rhobar`` is 0 or 1.  These degenerate cases (no negative
        jumps, or a negative subordinator) are settled by other rules.
    """
    ar = alpha * rhobar
    if not 0 < alpha <= 2:
        raise ParameterError("alpha", "stable index must lie in (0, 2]")
    if not 0 < ar < 1:
        raise DomainError(
            f"alpha*rhobar = {ar:g} is degenerate: use the no-negative-jumps or subordinator rules"
        )
    return (digamma(1 - ar) - digamma(1.0)) - (digamma(ar) - digamma(alpha))


def _stable_criterion(model: LevyModel) -> ClassificationVerdict | None:
    alpha, rhobar = model.params["alpha"], model.params["rhobar"]
    ar = alpha * rhobar
    if not 0 < ar < 1:
        return None
    b = stable_mean_xi(alpha, rhobar)
    evidence = {
        "B": b,
        "pi_cot": math.pi / math.tan(math.pi * ar),
        "psi1_minus_psialpha": digamma(1.0) - digamma(alpha),
        "boundary": abs(b) <= BOUNDARY_TOL,
    }
    if b < -BOUNDARY_TOL:
        return ClassificationVerdict(Verdict.ABSORBED, "stable-criterion", evidence)
    return ClassificationVerdict(Verdict.CONSERVATIVE, "stable-criterion", evidence)


def classify(model: LevyModel) -> ClassificationVerdict:
    """Classify the lifetime of the resurrected process.

    Rules are tried in a fixed order and the first that applies decides:

    1. ``drifts-to-plus-infinity``: ``X`` drifts to ``+inf``, so ``Z`` avoids 0
       with positive probability.
    2. ``prop-infinite-a``: finite, nonzero negative activity and no downward
       creeping give an infinite lifetime.
    3. ``prop-infinite-b``: 0 irregular for the negative half-line gives an
       infinite lifetime.
    4. ``no-negative-jumps``: ``Z = X`` hits 0 continuously.
    5. ``thm-creeping``: downward creeping together with a negative
       subordinator or a finite-mean downward ladder height process.
    6. ``thm-hinf``: regular, drifting to ``-inf`` negative subordinators with
       ``sup_y U*(y) tail(y) < 1``.
    7. ``stable-criterion``: the sign of :func:`stable_mean_xi`; the boundary
       ``B = 0`` counts as conservative.

    Otherwise the verdict is ``Unknown``.
    """
    f = model.flags
    base = {"family": model.family.value, "params": dict(model.params)}
    evidence: dict = {"flags": f.as_dict()}

    def verdict(v: Verdict, rule: str, extra: dict | None = None) -> ClassificationVerdict:
        ev = dict(evidence)
        ev.update(extra or {})
        return ClassificationVerdict(v, rule, ev, **base)

    if f.long_run is LongRun.DRIFTS_PLUS:
        return verdict(Verdict.NOT_ABSORBED_WP1, "drifts-to-plus-infinity")
    if not f.creeps_down and f.has_neg_jumps and f.finite_neg_activity:
        return verdict(Verdict.CONSERVATIVE, "prop-infinite-a", {"neg_activity": model.neg_activity})
    if not f.zero_regular_down:
        return verdict(Verdict.CONSERVATIVE, "prop-infinite-b")
    if not f.has_neg_jumps:
        return verdict(Verdict.ABSORBED, "no-negative-jumps")
    if f.creeps_down and (f.is_neg_subordinator or f.ladder_down_finite_mean):
        return verdict(Verdict.ABSORBED, "thm-creeping")
    if f.is_neg_subordinator and f.long_run is LongRun.DRIFTS_MINUS:
        hinf = hinf_supremum(model)
        evidence["hinf"] = hinf.as_dict()
        if hinf.sup_value < 1.0:
            return verdict(Verdict.ABSORBED, "thm-hinf")
    if model.family is Family.STABLE:
        stable = _stable_criterion(model)
        if stable is not None:
            return verdict(stable.verdict, stable.rule, stable.evidence)
    return verdict(Verdict.UNKNOWN, "none")


def criteria_map(alphas, rhobars, c: float = 1.0) -> list[dict]:
    """Classify every admissible ``(alpha, rhobar)`` pair of a stable grid.

    Inadmissible pairs are skipped.  Each row carries ``alpha``, ``rhobar``,
    ``B`` (``nan`` when the stable criterion did not fire), ``verdict`` and
    ``rule``.
    """
    rows = []
    for alpha in np.asarray(alphas, dtype=float):
        for rhobar in np.asarray(rhobars, dtype=float):
            a, r = round(float(alpha), 12), round(float(rhobar), 12)
            try:
                model = make_model(Family.STABLE, alpha=a, rhobar=r, c=c)
            except ParameterError:
                continue
            v = classify(model)
            rows.append(
                {
                    "alpha": a,
                    "rhobar": r,
                    "B": v.evidence.get("B", float("nan")),
                    "verdict": v.verdict.value,
                    "rule": v.rule,
                }
            )
    return rows
