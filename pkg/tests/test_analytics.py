import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.special import digamma as sp_digamma

from reslevy.analytics import Verdict, classify, criteria_map, stable_mean_xi
from reslevy.errors import DomainError, ParameterError
from reslevy.levy_models import make_model


class TestStableMeanXi:
    @given(st.floats(0.05, 2.0), st.floats(0.01, 0.99))
    @settings(max_examples=300, deadline=None)
    def test_matches_scipy_digamma(self, alpha, rhobar):
        ar = alpha * rhobar
        assume(0.01 < ar < 0.99)
        ref = (sp_digamma(1 - ar) - sp_digamma(1)) - (sp_digamma(ar) - sp_digamma(alpha))
        assert stable_mean_xi(alpha, rhobar) == pytest.approx(ref, rel=1e-9, abs=1e-9)

    @given(st.floats(0.05, 2.0), st.floats(0.01, 0.99))
    @settings(max_examples=300, deadline=None)
    def test_cotangent_form(self, alpha, rhobar):
        ar = alpha * rhobar
        assume(0.01 < ar < 0.99)
        cot_form = math.pi / math.tan(math.pi * ar) - (sp_digamma(1) - sp_digamma(alpha))
        assert stable_mean_xi(alpha, rhobar) == pytest.approx(cot_form, rel=1e-9, abs=1e-9)

    @given(st.floats(0.05, 0.99), st.floats(0.0, 1.0))
    @settings(max_examples=200, deadline=None)
    def test_proven_absorbed_region(self, alpha, u):
        ar = 0.5 + 1e-6 + u * (alpha - 0.5 - 2e-6)
        assume(0.5 < ar < alpha and ar < 0.999)
        assert stable_mean_xi(alpha, ar / alpha) < 0

    @given(st.floats(1.0, 2.0), st.floats(0.01, 0.5))
    @settings(max_examples=200, deadline=None)
    def test_proven_conservative_region(self, alpha, ar):
        assert stable_mean_xi(alpha, ar / alpha) >= -1e-12

    @pytest.mark.parametrize("alpha, rhobar", [(0.5, 0.0), (1.5, 1 / 1.5)])
    def test_degenerate(self, alpha, rhobar):
        with pytest.raises(DomainError):
            stable_mean_xi(alpha, rhobar)

    def test_inadmissible_pair_still_has_a_sign(self):
        # Stable(1.9, 0.2) cannot be constructed but the bracket is defined
        assert stable_mean_xi(1.9, 0.2) > 0
        with pytest.raises(ParameterError):
            make_model("stable", alpha=1.9, rhobar=0.2)


class TestClassify:
    def test_stable_example(self):
        v = classify(make_model("stable", alpha=1.5, rhobar=0.5))
        assert v.verdict is Verdict.ABSORBED and v.rule == "stable-criterion"
        assert v.evidence["B"] == pytest.approx(math.pi / math.tan(math.pi * 0.75) - (sp_digamma(1) - sp_digamma(1.5)))

    def test_cauchy_boundary(self):
        v = classify(make_model("stable", alpha=1.0, rhobar=0.5))
        assert v.verdict is Verdict.CONSERVATIVE and v.evidence["boundary"]
        assert abs(v.evidence["B"]) <= 1e-12

    def test_cp_symmetric(self, cp_symmetric):
        v = classify(cp_symmetric)
        assert v.verdict is Verdict.CONSERVATIVE and v.rule == "prop-infinite-a"

    def test_drifting_up(self):
        v = classify(make_model("cp", b=1.0, lam_down=0.5))
        assert v.verdict is Verdict.NOT_ABSORBED_WP1

    def test_irregular(self):
        v = classify(make_model("stable", alpha=0.5, rhobar=0.0))
        assert v.rule == "drifts-to-plus-infinity"

    def test_no_negative_jumps(self):
        v = classify(make_model("bcp", sigma=1.0, b=-1.0, lam_up=1.0))
        assert v.verdict is Verdict.ABSORBED and v.rule == "no-negative-jumps"

    def test_creeping(self):
        v = classify(make_model("bcp", sigma=1.0, lam_down=1.0))
        assert v.verdict is Verdict.ABSORBED and v.rule == "thm-creeping"

    def test_stable_subordinator(self, stable_sub):
        v = classify(stable_sub)
        assert v.verdict is Verdict.ABSORBED and v.rule == "thm-hinf"
        assert v.evidence["hinf"]["sup_value"] == pytest.approx(2 / math.pi)

    def test_gamma_is_unknown(self, gamma_sub):
        v = classify(gamma_sub)
        assert v.verdict is Verdict.UNKNOWN and v.rule == "none"
        assert v.evidence["hinf"]["sup_value"] == 1.0

    def test_json_shape(self, stable_sub):
        d = classify(stable_sub).to_dict()
        assert set(d) == {"family", "params", "verdict", "rule", "evidence"}
        assert d["verdict"] == "AbsorbedAS" and "flags" in d["evidence"]


class TestCriteriaMap:
    def test_admissible_grid_and_proven_regions(self):
        alphas = np.round(np.arange(1, 21) * 0.1, 12)
        rhos = np.round(np.arange(1, 20) * 0.05, 12)
        rows = criteria_map(alphas, rhos)
        for r in rows:
            a, rb = r["alpha"], r["rhobar"]
            assert a * rb <= 1 + 1e-12 and a * (1 - rb) <= 1 + 1e-12
            if a < 1 and a * rb > 0.5:
                assert r["verdict"] == "AbsorbedAS"
            if a >= 1 and a * rb <= 0.5:
                assert r["verdict"] == "Conservative"
        assert len(rows) == 242
