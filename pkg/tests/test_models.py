import json
import math

import numpy as np
import pytest

from timelot.core import Domain, half_half, make_lottery, mix
from timelot.errors import (
    CurvatureDomainError,
    UnsupportedLotteryShape,
    ValidationError,
)
from timelot.models import (
    GLBU,
    BoundedRatio,
    ConstantReference,
    Disappointment,
    ExpCubic,
    ExpGain,
    Exponential,
    GeneralizedQuasiHyperbolic,
    Hyperbolic,
    IdentityCurvature,
    IdentityValue,
    MultiplicativeEU,
    NegNegLogPow,
    PowerCurvature,
    PowerExponent,
    PowerValue,
    apply_representation_transform,
    catalog_components,
    catalog_models,
    check_representation_conditions,
    convert_representation,
    edu,
    example_model,
    model_from_dict,
)

from .conftest import EDU_DOMAIN, WIDE_DOMAIN


def random_lotteries(domain, n, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        k = int(rng.integers(1, 6))
        w = rng.dirichlet(np.ones(k))
        w[-1] = 1.0 - math.fsum(w[:-1])
        xs = rng.uniform(domain.x_lo, domain.x_hi, k)
        ts = rng.uniform(domain.t_lo, domain.t_hi, k)
        out.append(make_lottery([(float(a), float(b), float(c)) for a, b, c in zip(xs, ts, w)], domain))
    return out


class TestComponents:
    def test_parameter_guards(self):
        with pytest.raises(ValidationError, match="β must lie in"):
            Exponential(1.2)
        with pytest.raises(ValidationError):
            Hyperbolic(0.0)
        with pytest.raises(ValidationError):
            PowerExponent(0.9, 1.0)
        with pytest.raises(ValidationError):
            NegNegLogPow(1.0)
        with pytest.raises(ValidationError):
            BoundedRatio(1.5)
        with pytest.raises(ValidationError):
            PowerCurvature(0.0)

    @pytest.mark.parametrize("disc", catalog_components()[1], ids=lambda d: d.kind)
    def test_discounts_decreasing_from_one(self, disc):
        ts = np.linspace(0, 10, 101)
        D = disc(ts)
        assert D[0] == pytest.approx(1.0)
        assert np.all(np.diff(D) < 0)
        assert np.all(D > 0)

    @pytest.mark.parametrize("disc", catalog_components()[1], ids=lambda d: d.kind)
    def test_discount_derivatives(self, disc):
        ts = np.linspace(0.2, 2.8, 14)
        h = 1e-5
        np.testing.assert_allclose(disc.d1(ts), (disc(ts + h) - disc(ts - h)) / (2 * h), rtol=1e-6, atol=1e-12)
        np.testing.assert_allclose(disc.d2(ts), (disc(ts + h) - 2 * disc(ts) + disc(ts - h)) / h**2,
                                   rtol=1e-3, atol=1e-7)

    def test_gqh_closed_form(self):
        g = GeneralizedQuasiHyperbolic(2.0, 1.0)
        assert g(3.0) == pytest.approx(7.0 ** -0.5)

    @pytest.mark.parametrize("val", catalog_components()[2], ids=lambda v: v.kind)
    def test_values_increasing(self, val):
        xs = np.linspace(0.1, 100, 200)
        assert np.all(np.diff(val(xs)) > 0)
        assert np.all(val(xs) > 0)

    def test_bounded_ratio_range(self):
        v = BoundedRatio(1.0)
        assert v(1.0) == 0.5
        assert float(v(1e9)) < 1.0

    @pytest.mark.parametrize("phi", catalog_components()[0], ids=lambda p: p.kind)
    def test_curvature_derivatives(self, phi):
        ys = np.linspace(0.05, 0.9, 12)
        h = 1e-6
        np.testing.assert_allclose(phi.d1(ys), (phi(ys + h) - phi(ys - h)) / (2 * h), rtol=1e-6)

    def test_neg_neglog_pow_domain(self):
        with pytest.raises(CurvatureDomainError):
            MultiplicativeEU(NegNegLogPow(0.6), Exponential(0.9), IdentityValue(), EDU_DOMAIN)


class TestEvaluation:
    def test_edu_outcome(self, edu_model):
        assert edu_model.eval_outcome((100, 6)) == pytest.approx(53.1441, abs=1e-10)

    def test_no_discount_at_zero(self):
        for disc in catalog_components()[1]:
            m = MultiplicativeEU(IdentityCurvature(), disc, IdentityValue(), EDU_DOMAIN)
            assert m.eval_outcome((37.5, 0.0)) == pytest.approx(37.5, rel=1e-15)

    def test_example_outcome(self, example1):
        want = -((-math.log(0.9) - math.log(0.5)) ** 0.6)
        assert example1.eval_outcome((1, 1)) == pytest.approx(want, rel=1e-14)
        assert want == pytest.approx(-0.8737, abs=1e-4)

    def test_edu_time_lottery(self, edu_wide):
        p = half_half((100, 1), (100, 11))
        assert edu_wide.eval_lottery(p) == pytest.approx(0.5 * (90 + 100 * 0.9**11), rel=1e-14)
        assert edu_wide.eval_lottery(p) == pytest.approx(60.6905, abs=1e-4)

    def test_glbu_time_lottery(self):
        m = GLBU(0.4, Exponential(0.9), IdentityValue(), WIDE_DOMAIN)
        p = half_half((100, 1), (100, 11))
        assert m.eval_lottery(p) == pytest.approx(0.4 * 90 + 0.6 * 100 * 0.9**11, rel=1e-14)
        assert m.eval_lottery(p) == pytest.approx(54.8286, abs=1e-4)

    def test_glbu_swap_symmetry(self, glbu03):
        rng = np.random.default_rng(1)
        for x1, t1, x2, t2 in zip(rng.uniform(1, 100, 50), rng.uniform(0, 12, 50),
                                  rng.uniform(1, 100, 50), rng.uniform(0, 12, 50)):
            u1, u2 = glbu03.utility(x1, t1), glbu03.utility(x2, t2)
            assert glbu03.half_half_value(u1, u2) == glbu03.half_half_value(u2, u1)

    def test_glbu_rejects_other_shapes(self, glbu03):
        with pytest.raises(UnsupportedLotteryShape):
            glbu03.eval_lottery(make_lottery([(10, 1, 0.3), (20, 2, 0.7)]))

    def test_glbu_pi_range(self):
        with pytest.raises(ValidationError):
            GLBU(1.0, Exponential(0.9), IdentityValue(), WIDE_DOMAIN)

    def test_disappointment_degenerate_is_u(self, disappointment_model):
        m = disappointment_model
        assert m.eval_outcome((40, 3)) == pytest.approx(40 * 0.9**3, rel=1e-15)

    def test_disappointment_constant_reference(self):
        m = Disappointment(Exponential(0.9), IdentityValue(), ExpGain(0.5, 1.0), EDU_DOMAIN, ConstantReference(10.0))
        u = 40 * 0.9**3
        assert m.eval_outcome((40, 3)) == pytest.approx(u + 0.5 * math.expm1(u - 10.0), rel=1e-14)

    def test_disappointment_differs_from_eu(self, disappointment_model, edu_model):
        found = False
        for p in random_lotteries(EDU_DOMAIN, 50, 4):
            if len(p) == 2 and abs(disappointment_model.eval_lottery(p) - edu_model.eval_lottery(p)) > 1e-6:
                found = True
                break
        assert found

    def test_eu_linear_in_mixture(self):
        for m in catalog_models(Domain(1.0, 10.0, 0.0, 5.0)):
            ps = random_lotteries(m.domain, 20, 11)
            for p, q in zip(ps[::2], ps[1::2]):
                lam = 0.3
                lhs = m.eval_lottery(mix(p, q, lam))
                rhs = lam * m.eval_lottery(p) + (1 - lam) * m.eval_lottery(q)
                assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-14)


class TestExampleConstraints:
    def test_b_below_inverse_a(self):
        with pytest.raises(ValidationError, match=r"b must lie in \(1/a,1\)"):
            example_model(a=2, b=0.4)

    def test_requires_bounded_value(self):
        with pytest.raises(ValidationError):
            example_model(value=PowerValue(0.5))

    def test_constructor_itself_accepts_outside_cells(self):
        m = MultiplicativeEU(NegNegLogPow(0.4), PowerExponent(0.9, 2.0), BoundedRatio(1.0), Domain(0.1, 10, 0.1, 5))
        assert math.isfinite(m.eval_outcome((1, 1)))


class TestRepresentation:
    def test_additive_roundtrip(self):
        for m in catalog_models(Domain(0.1, 10.0, 0.0, 3.0)):
            a = convert_representation(m, "to_additive")
            back = convert_representation(a, "to_multiplicative")
            rng = np.random.default_rng(5)
            xs, ts = rng.uniform(0.1, 10, 100), rng.uniform(0, 3, 100)
            np.testing.assert_allclose(a.utility(xs, ts), m.utility(xs, ts), rtol=1e-12)
            np.testing.assert_allclose(back.utility(xs, ts), m.utility(xs, ts), rtol=0)

    def test_additive_logs(self, example1):
        a = convert_representation(edu(0.9), "to_additive")
        np.testing.assert_allclose(a.d_star(np.array([0.0, 2.0, 5.0])), np.array([0.0, 2.0, 5.0]) * math.log(0.9))
        b = convert_representation(example1, "to_additive")
        np.testing.assert_allclose(b.d_star(np.array([1.0, 3.0])), np.array([1.0, 9.0]) * math.log(0.9))

    def test_identity_transform(self, edu_model):
        assert apply_representation_transform(edu_model, 1, 0, 0) is edu_model

    def test_edu_square_transform(self, edu_wide):
        m2 = apply_representation_transform(edu_wide, 2, 0, 0)
        np.testing.assert_allclose(m2.discount(np.array([1.0, 3.0])), 0.81 ** np.array([1.0, 3.0]), rtol=1e-14)
        np.testing.assert_allclose(m2.value(np.array([3.0, 7.0])), np.array([9.0, 49.0]), rtol=1e-14)
        assert m2.phi(49.0) == pytest.approx(7.0, rel=1e-14)
        for p in random_lotteries(edu_wide.domain, 100, 6):
            assert m2.eval_lottery(p) == pytest.approx(edu_wide.eval_lottery(p), rel=1e-12)

    def test_shifted_transform_values_equal(self, example1):
        m2 = apply_representation_transform(example1, 2.0, 0.1, -0.3)
        for p in random_lotteries(example1.domain, 100, 7):
            assert m2.eval_lottery(p) == pytest.approx(example1.eval_lottery(p), rel=1e-12)

    def test_conditions_example1(self, example1):
        r = check_representation_conditions(example1)
        assert all(v.holds for v in r.values())

    def test_conditions_edu(self, edu_model):
        r = check_representation_conditions(edu_model)
        assert r["convexity"].holds and r["discount_decreasing"].holds and r["value_increasing"].holds
        assert r["time_concavity"].violated

    def test_conditions_hyperbolic(self, hyperbolic_model):
        r = check_representation_conditions(hyperbolic_model)
        assert r["convexity"].holds
        assert r["time_concavity"].violated


class TestModelFiles:
    def test_roundtrip(self, example1, glbu03, disappointment_model):
        for m in (example1, glbu03, disappointment_model):
            assert model_from_dict(json.loads(json.dumps(m.to_dict()))) == m

    def test_unknown_key(self, edu_model):
        d = edu_model.to_dict()
        d["extra"] = 1
        with pytest.raises(ValidationError, match="unknown"):
            model_from_dict(d)

    def test_unknown_kind(self, edu_model):
        d = edu_model.to_dict()
        d["discount"] = {"kind": "quadratic"}
        with pytest.raises(ValidationError):
            model_from_dict(d)

    def test_beta_out_of_range(self, edu_model):
        d = edu_model.to_dict()
        d["discount"]["beta"] = 1.2
        with pytest.raises(ValidationError, match="β must lie in"):
            model_from_dict(d)


def test_catalog_size():
    assert len(catalog_models(Domain(0.1, 10.0, 0.0, 5.0))) == 35


def test_expcubic_is_catalog_member():
    assert any(isinstance(d, ExpCubic) for d in catalog_components()[1])
