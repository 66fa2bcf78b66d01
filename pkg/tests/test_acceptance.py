"""Acceptance suite: one test per criterion, fixed seed, spec-scale sample sizes.

Each test records a one-line verdict that the terminal summary prints.
"""
import json
import math
import time

import numpy as np
import pytest
from scipy import integrate
from scipy.special import digamma as sp_digamma

from conftest import ACCEPTANCE_SEED as SEED
from conftest import record_criterion
from reslevy import cli
from reslevy import mc_verify as mv
from reslevy.analytics import criteria_map
from reslevy.levy_models import make_model
from reslevy.renewal import hinf_supremum, renewal_function, renewal_value
from reslevy.reporting import read_body
from reslevy.special import digamma, talbot_inverse


def cp_model():
    return make_model("compound-poisson-drift", b=0.0, lam_up=1.0, mu_up=1.0, lam_down=1.0, mu_down=1.0)


def stable_sub(alpha=0.5):
    return make_model("stable-subordinator-neg", alpha=alpha)


def test_criterion_01_stable_region_map():
    start = time.perf_counter()
    alphas = np.round(0.1 * np.arange(1, 21), 12)
    rhos = np.round(0.05 * np.arange(1, 20), 12)
    rows = criteria_map(alphas, rhos)
    elapsed = time.perf_counter() - start
    mismatches = 0
    checked = 0
    for r in rows:
        a, ar = r["alpha"], r["alpha"] * r["rhobar"]
        if a < 1 and ar > 0.5:
            checked += 1
            mismatches += r["verdict"] != "AbsorbedAS"
        elif a >= 1 and ar <= 0.5:
            checked += 1
            mismatches += r["verdict"] != "Conservative"
    ok = mismatches == 0 and elapsed < 1.0 and checked > 0
    record_criterion(1, "stable region map", ok, f"{len(rows)} admissible points, {checked} in proven regions, {mismatches} mismatches, {elapsed:.3f}s")
    assert ok


def test_criterion_02_stable_subordinator_hinf():
    start = time.perf_counter()
    details = []
    ok = True
    for alpha in (0.3, 0.5, 0.7):
        model = stable_sub(alpha)
        res = hinf_supremum(model)
        target = math.sin(math.pi * alpha) / (math.pi * alpha)
        # renewal-table cross-check: closed form against numerical inversion
        grid = np.logspace(-6, 6, 61)
        inverted = talbot_inverse(lambda s: 1.0 / (s * s**alpha), grid)
        cross = float(np.max(np.abs(inverted / renewal_function(model, grid).values - 1)))
        ok &= abs(res.sup_value - target) < 1e-3 and cross < 1e-8
        details.append(f"a={alpha}: {res.sup_value:.6f} vs {target:.6f}")
    ok &= abs(hinf_supremum(stable_sub(0.5)).sup_value - 0.63662) < 1e-5
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10.0
    record_criterion(2, "stable subordinator H-inf", ok, "; ".join(details) + f", {elapsed:.2f}s")
    assert ok


def test_criterion_03_gamma_boundary():
    start = time.perf_counter()
    res = hinf_supremum(make_model("gamma-subordinator-neg", a=1.0, b=1.0), per_decade=200)
    elapsed = time.perf_counter() - start
    above = res.sup_above(0.5)
    ok = 0.99 <= res.grid_sup <= 1.0 and res.approached == "y->0+" and above < 0.95 and elapsed < 60.0
    record_criterion(
        3, "Gamma subordinator boundary", ok,
        f"grid sup {res.grid_sup:.5f} at y={res.grid_argmax:.1e}, approached {res.approached}, sup(y>=0.5) {above:.4f}, {elapsed:.2f}s",
    )
    assert ok


def test_criterion_04_exponential_law():
    start = time.perf_counter()
    rep = mv.check_exponential_law(cp_model(), 1.0, n=10_000, seed=SEED)
    elapsed = time.perf_counter() - start
    ks = rep.result["ks"]
    mean = rep.result["mean"]["mean"]
    ok = ks["statistic"] < 1.358 / math.sqrt(10_000) and abs(mean - 1.0) <= 0.03 and elapsed < 60.0
    record_criterion(4, "Exp(1) law", ok, f"KS {ks['statistic']:.5f} < {1.358 / 100:.5f}, mean {mean:.4f}, censored {rep.result['censored_fraction']:.4f}, {elapsed:.1f}s")
    assert ok


def test_criterion_05_feynman_kac():
    start = time.perf_counter()
    model = cp_model()
    rep = mv.check_feynman_kac(model, 1.0, 1.0, f="min1", n=100_000, seed=SEED)
    zero = mv.check_feynman_kac(model, 1.0, 1.0, f="zero", n=1_000, seed=SEED)
    t0 = mv.check_feynman_kac(model, 1.0, 0.0, f="min1", n=1_000, seed=SEED)
    elapsed = time.perf_counter() - start
    lhs, rhs = rep.result["lhs"], rep.result["rhs"]
    trivial = (
        zero.result["lhs"]["mean"] == 0.0 == zero.result["rhs"]["mean"]
        and t0.result["lhs"]["mean"] == 1.0 == t0.result["rhs"]["mean"]
    )
    ok = rep.result["compatible"] and trivial and elapsed < 300.0
    record_criterion(
        5, "Feynman-Kac identity", ok,
        f"lhs {lhs['mean']:.4f}+-{lhs['half_width_95']:.4f}, rhs {rhs['mean']:.4f}+-{rhs['half_width_95']:.4f}, trivial cases exact {trivial}, {elapsed:.1f}s",
    )
    assert ok


def test_criterion_06_domination():
    start = time.perf_counter()
    rep = mv.check_stochastic_domination(cp_model(), 1.0, n_res=20, n_paths=10_000, seed=SEED)
    elapsed = time.perf_counter() - start
    r = rep.result
    ok = r["violation"] <= 2 / math.sqrt(10_000) and r["absorbed"] == 0 and elapsed < 300.0
    record_criterion(
        6, "non-absorption with domination", ok,
        f"max violation {r['violation']:.4f} <= {r['band']:.3f}, absorbed {r['absorbed']}, censored at horizon {r['censored_fraction']:.3f}, {elapsed:.1f}s",
    )
    assert ok


def test_criterion_07_lifetime_bound():
    start = time.perf_counter()
    rep = mv.check_lifetime_bound(stable_sub(0.5), 1.0, n=10_000, seed=SEED)
    elapsed = time.perf_counter() - start
    r = rep.result
    bound = (1 / (1 - 2 / math.pi)) * (2 / math.sqrt(math.pi))
    e_tau = r["e_tau"]["mean"]
    ok = (
        r["zeta"]["mean"] <= 3.105 * 1.10
        and abs(r["bound"] - bound) < 1e-9
        and r["censored_fraction"] < 0.01
        and abs(e_tau / 1.1284 - 1) <= 0.05
        and elapsed < 300.0
    )
    record_criterion(
        7, "lifetime bound", ok,
        f"mean zeta {r['zeta']['mean']:.4f} <= {3.105 * 1.1:.4f}, censored {r['censored_fraction']:.4f}, E tau {e_tau:.4f} vs 1.1284, {elapsed:.1f}s",
    )
    assert ok


def test_criterion_08_kernel_closed_form():
    start = time.perf_counter()
    details = []
    ok = True
    for alpha in (0.3, 0.5, 0.7):
        rep = mv.check_kernel_law(stable_sub(alpha), 1.0, n=10_000, seed=SEED)
        r = rep.result
        ok &= not r["vs_beta_rejected_1pct"] and abs(r["density_mass"] - 1) <= 1e-4 and rep.passed
        details.append(f"a={alpha}: KS {r['vs_beta']['statistic']:.4f} (1% thr {mv.ks_threshold(0.01, 10_000, 10_000):.4f}), mass-1 {r['density_mass'] - 1:.1e}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120.0
    record_criterion(8, "kernel closed form", ok, "; ".join(details) + f", {elapsed:.1f}s")
    assert ok


def test_criterion_09_scaling():
    start = time.perf_counter()
    model = stable_sub(0.5)
    rep = mv.check_scaling_stable(model, xs=(0.5, 1.0, 2.0), n=10_000, seed=SEED)
    control = mv.check_scaling_stable(model, xs=(0.5, 1.0, 2.0), n=10_000, seed=SEED, exponent=0.25)
    elapsed = time.perf_counter() - start
    ok = rep.passed and control.result["rejected_any"] and elapsed < 300.0
    worst = max(p["statistic"] / p["threshold"] for p in rep.result["pairs"])
    record_criterion(
        9, "scaling of zeta", ok,
        f"max KS/threshold {worst:.3f} (none rejected {rep.passed}), negative control rejected {control.result['rejected_any']}, {elapsed:.1f}s",
    )
    assert ok


def test_criterion_10_special_functions():
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    zs = rng.uniform(0.01, 0.99, 100)
    refl = max(abs(digamma(1 - z) - digamma(z) - math.pi / math.tan(math.pi * z)) for z in zs)
    ws = rng.uniform(0.01, 20.0, 100)
    rec = max(abs(digamma(w + 1) - digamma(w) - 1 / w) for w in ws)
    target = 2 * math.log(2)
    direct = digamma(1.0) - digamma(0.5)
    # psi(delta) - psi(gamma) = int_0^inf (e^{-gamma t} - e^{-delta t}) / (1 - e^{-t}) dt
    quad = integrate.quad(lambda t: (math.exp(-0.5 * t) - math.exp(-t)) / -math.expm1(-t), 0, np.inf, epsabs=1e-13, epsrel=1e-13)[0]
    scipy_ref = float(sp_digamma(1.0) - sp_digamma(0.5))
    elapsed = time.perf_counter() - start
    ok = refl < 1e-9 and rec < 1e-9 and abs(direct - target) < 1e-9 and abs(quad - target) < 1e-9 and abs(scipy_ref - target) < 1e-9 and elapsed < 1.0
    record_criterion(
        10, "special functions", ok,
        f"reflection err {refl:.1e}, recurrence err {rec:.1e}, psi(1)-psi(1/2) err {abs(direct - target):.1e}, quadrature err {abs(quad - target):.1e}, {elapsed:.3f}s",
    )
    assert ok


def test_criterion_11_determinism(tmp_path):
    runs = {
        "classify": ["classify", "--family", "stable", "--alpha", "1.5", "--rhobar", "0.5"],
        "criteria-map": ["criteria-map", "--family", "stable", "--alpha-grid", "0.1:2.0:0.1", "--rho-grid", "0.05:0.95:0.05"],
        "lifetime": ["lifetime", "--family", "stable-subordinator", "--alpha", "0.5", "--starts", "0.5,1,2", "--n-paths", "2000"],
        "verify": ["verify", "--family", "cp", "--lam-up", "1", "--lam-down", "1", "--checks", "exponential_law,feynman_kac", "--n-paths", "5000"],
    }
    identical, compared = True, 0
    for name, args in runs.items():
        dirs = []
        for rep, workers in enumerate(("1", "1", "2")):
            out = tmp_path / f"{name}-{rep}"
            code = cli.main(args + ["--seed", str(SEED), "--workers", workers, "--plots", "false", "--output-dir", str(out)])
            assert code == 0
            dirs.append(out)
        for f in sorted(p.name for p in dirs[0].iterdir()):
            bodies = {read_body(str(d / f)) for d in dirs}
            compared += 1
            identical &= len(bodies) == 1
    verify_doc = json.loads((tmp_path / "verify-0" / "verify.json").read_text())
    record_criterion(11, "determinism", identical, f"{compared} report files byte-identical across 3 runs (workers 1, 1, 2); verify pass={verify_doc['results']['pass']}")
    assert identical
