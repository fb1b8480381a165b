import math

import numpy as np
import pytest

from timelot.core import Domain, degenerate, half_half
from timelot.errors import NoSolution, NonMonotoneEvaluation, NotATimeLottery, SolverError, Unbracketed
from timelot.models import catalog_models, edu
from timelot.solvers import (
    SolveSettings,
    bisect_increasing,
    find_indifferent_prize,
    local_radius,
    risk_attitude_instance,
    settings_for,
    time_certainty_equivalent,
)


class TestBisect:
    def test_root(self):
        s = SolveSettings(1e-12, 1e-12)
        assert bisect_increasing(lambda z: z * z - 2, 0, 2, s) == pytest.approx(math.sqrt(2), abs=1e-11)

    def test_unbracketed(self):
        with pytest.raises(NonMonotoneEvaluation):
            bisect_increasing(lambda z: z + 5, 0, 1, SolveSettings(1e-9, 1e-9))

    def test_settings_guard(self):
        with pytest.raises(SolverError):
            SolveSettings(1e-9, 1e-9, max_iter=10)


class TestIndifferentPrize:
    def test_edu_closed_form(self, edu_model):
        y = find_indifferent_prize(edu_model, 100, 6, 2)
        assert abs(y - 81.0) <= 1e-8

    def test_tiny_delay(self, edu_model):
        s = settings_for(edu_model)
        y = find_indifferent_prize(edu_model, 100, 6, 1e-9, s)
        assert abs(y - 100) <= max(s.bisect_tol, 1e-6)

    def test_near_radius(self, edu_model):
        y = find_indifferent_prize(edu_model, 100, 5, 4.999)
        assert y == pytest.approx(100 * 0.9**4.999, abs=1e-8)
        assert y == pytest.approx(59.06, abs=0.01)

    def test_no_solution(self):
        m = edu(0.9, Domain(70, 100, 0, 10))
        with pytest.raises(NoSolution):
            find_indifferent_prize(m, 100, 5, 4.5)

    def test_before_domain(self, edu_model):
        with pytest.raises(SolverError):
            find_indifferent_prize(edu_model, 100, 1, 2)

    def test_decreasing_in_delay(self):
        for m in catalog_models(Domain(0.1, 10, 0, 5)):
            s = local_radius(m, 8.0, 4.0)
            ys = [find_indifferent_prize(m, 8.0, 4.0, f * s) for f in (0.2, 0.5, 0.9)]
            if not (ys[0] > ys[1] > ys[2]):
                pytest.fail(f"{m.identifier}: {ys}")


class TestLocalRadius:
    def test_case_two(self, edu_model):
        assert local_radius(edu_model, 100, 5) == 5

    def test_case_one(self):
        # 70 * 0.9**d = 100 * 0.9**5
        m = edu(0.9, Domain(70, 100, 0, 10))
        d = math.log(0.9**5 * 100 / 70) / math.log(0.9)
        assert local_radius(m, 100, 5) == pytest.approx(5 - d, abs=1e-8)
        assert 5 - d == pytest.approx(3.38528, abs=1e-5)

    def test_mixed_bound_is_case_two(self):
        # with x_lo = 50 the worst prize at t = 0 is still worth less than (100, 5)
        assert local_radius(edu(0.9, Domain(50, 100, 0, 10)), 100, 5) == 5

    def test_boundary(self, edu_model):
        assert local_radius(edu_model, 50, 1e-6) == pytest.approx(1e-6)

    def test_every_tau_solvable(self):
        for m in catalog_models(Domain(0.1, 10, 0, 5)):
            s = local_radius(m, 6.0, 3.0)
            for k in range(1, 21):
                tau = s * k / 21
                assert find_indifferent_prize(m, 6.0, 3.0, tau) < 6.0


class TestCertaintyEquivalent:
    def test_edu(self):
        m = edu(0.9, Domain(1, 100, 0, 12))
        t = time_certainty_equivalent(m, half_half((100, 1), (100, 11)))
        oracle = math.log(0.5 * (0.9 + 0.9**11)) / math.log(0.9)
        assert t == pytest.approx(oracle, abs=1e-8)
        assert t == pytest.approx(4.740, abs=1e-3)
        assert risk_attitude_instance(m, half_half((100, 1), (100, 11)))[2] == "risk_seeking"

    def test_degenerate(self, edu_model):
        assert time_certainty_equivalent(edu_model, degenerate(50, 3)) == 3

    def test_example_risk_averse(self, example1):
        t_star, t_bar, label = risk_attitude_instance(example1, half_half((1, 1), (1, 3)))
        assert t_bar == 2 and t_star > 2 and label == "risk_averse"

    def test_not_time_lottery(self, edu_model):
        with pytest.raises(NotATimeLottery):
            time_certainty_equivalent(edu_model, half_half((100, 1), (50, 2)))

    def test_unbracketed(self, disappointment_model):
        # the convex gain lifts the spread lottery above the value of the earliest date
        p = half_half((100, 0), (100, 10))
        assert disappointment_model.eval_lottery(p) > disappointment_model.eval_outcome((100, 0))
        with pytest.raises(Unbracketed):
            time_certainty_equivalent(disappointment_model, p)


def test_certificates_across_catalog():
    rng = np.random.default_rng(8)
    for m in catalog_models(Domain(0.1, 10, 0, 5)):
        s = settings_for(m)
        for _ in range(5):
            x, t = rng.uniform(1, 10), rng.uniform(1, 5)
            tau = rng.uniform(0.01, 0.9) * local_radius(m, x, t)
            y = find_indifferent_prize(m, x, t, tau, s)
            assert y < x
            assert abs(m.eval_outcome((y, t - tau)) - m.eval_outcome((x, t))) <= s.eq_tol
