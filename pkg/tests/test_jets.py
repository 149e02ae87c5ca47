import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcgeo import dsl, jets

from conftest import central_first, central_second, evaluable_ast


def var(i, value, nvars=1, order=3):
    return jets.variable(i, value, nvars, order)


class TestBasics:
    def test_variable_square(self):
        x = var(0, 2.0, 1, 2)
        y = x * x
        assert jets.value_of(y) == pytest.approx(4.0)
        assert jets.extract_partial(y, [1]) == pytest.approx(4.0)
        assert jets.extract_partial(y, [2]) == pytest.approx(2.0)

    def test_sin_series_at_zero(self):
        x = var(0, 0.0, 1, 3)
        s = jets.sin(x)
        assert np.allclose(np.asarray(s.coeffs, dtype=float), [0.0, 1.0, 0.0, -1.0 / 6.0])

    def test_cos_series_at_zero(self):
        x = var(0, 0.0, 1, 2)
        c = jets.cos(x)
        assert np.allclose(np.asarray(c.coeffs, dtype=float), [1.0, 0.0, -0.5])

    def test_sqrt_of_constant(self):
        four = jets.constant(4.0, 1, 3)
        two = jets.sqrt(four)
        coeffs = np.asarray(two.coeffs, dtype=float)
        assert coeffs[0] == pytest.approx(2.0)
        assert np.allclose(coeffs[1:], 0.0)

    def test_x_over_x(self):
        x = var(0, 2.0, 1, 3)
        one = x / x
        coeffs = np.asarray(one.coeffs, dtype=float)
        assert coeffs[0] == pytest.approx(1.0)
        assert np.allclose(coeffs[1:], 0.0, atol=1e-15)

    def test_sum_squared_two_vars(self):
        x = var(0, 1.0, 2, 2)
        y = var(1, 2.0, 2, 2)
        f = (x + y) * (x + y)
        assert jets.value_of(f) == pytest.approx(9.0)
        assert jets.extract_partial(f, [1, 0]) == pytest.approx(6.0)
        assert jets.extract_partial(f, [1, 1]) == pytest.approx(2.0)

    def test_exp_xy_mixed_partial(self):
        x = var(0, 1.0, 2, 2)
        y = var(1, 1.0, 2, 2)
        f = jets.exp(x * y)
        assert jets.extract_partial(f, [1, 1]) == pytest.approx(2.0 * math.e, rel=1e-12)

        def g(p):
            return math.exp(p[0] * p[1])

        fd = central_second(g, [1.0, 1.0], 0, 1)
        assert jets.extract_partial(f, [1, 1]) == pytest.approx(fd, rel=1e-5)

    def test_fractional_power(self):
        x = var(0, 3.0, 1, 2)
        f = x ** 2.5

        def g(p):
            return p[0] ** 2.5

        assert jets.value_of(f) == pytest.approx(3.0 ** 2.5)
        assert jets.extract_partial(f, [1]) == pytest.approx(
            central_first(g, [3.0], 0), rel=1e-5
        )
        assert jets.extract_partial(f, [2]) == pytest.approx(
            central_second(g, [3.0], 0, 0), rel=1e-5
        )

    def test_log_composition(self):
        x = var(0, 1.0, 1, 3)
        f = jets.log(1.0 + x * x)

        def g(p):
            return math.log(1.0 + p[0] * p[0])

        for k in (1, 2):
            fd = central_first(g, [1.0], 0) if k == 1 else central_second(g, [1.0], 0, 0)
            assert jets.extract_partial(f, [k]) == pytest.approx(fd, rel=1e-5)

    def test_gradient_matches_extract(self):
        x = var(0, 0.4, 2, 3)
        y = var(1, 0.7, 2, 3)
        f = jets.sin(x) * jets.cosh(y) + x * y
        g = jets.gradient(f)
        assert g[0] == pytest.approx(jets.extract_partial(f, [1, 0]))
        assert g[1] == pytest.approx(jets.extract_partial(f, [0, 1]))

    def test_partial_drops_order(self):
        x = var(0, 0.5, 1, 3)
        d = jets.partial(jets.sin(x), 0)
        assert d.order == 2
        assert jets.value_of(d) == pytest.approx(math.cos(0.5))

    def test_order_of(self):
        x = var(0, 0.5, 1, 3)
        assert jets.order_of(x) == 3
        assert jets.order_of(2.5) == math.inf


class TestErrors:
    def test_variable_index_out_of_range(self):
        with pytest.raises(jets.JetShapeError):
            jets.variable(3, 1.0, 2, 2)

    def test_log_domain(self):
        with pytest.raises(jets.JetDomainError):
            jets.log(jets.constant(-1.0, 1, 2))

    def test_sqrt_domain(self):
        with pytest.raises(jets.JetDomainError):
            jets.sqrt(var(0, -2.0, 1, 2))

    def test_division_by_zero_value(self):
        x = var(0, 0.0, 1, 2)
        with pytest.raises(jets.JetDomainError):
            _ = 1.0 / x

    def test_shape_mismatch(self):
        a = var(0, 1.0, 1, 2)
        b = var(0, 1.0, 2, 2)
        with pytest.raises(jets.JetShapeError):
            _ = a + b

    def test_order_limit(self):
        with pytest.raises(jets.JetShapeError):
            jets.variable(0, 1.0, 1, jets.MAX_ORDER + 1)


class TestRingLaws:
    small = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)

    @given(small, small, small)
    @settings(max_examples=60, deadline=None)
    def test_distributive(self, a, b, c):
        x = var(0, a, 2, 3)
        y = var(1, b, 2, 3)
        p = jets.constant(c, 2, 3)
        lhs = (x + y) * p
        rhs = x * p + y * p
        assert np.allclose(
            np.asarray(lhs.coeffs, dtype=float),
            np.asarray(rhs.coeffs, dtype=float),
            atol=1e-12,
        )

    @given(small)
    @settings(max_examples=40, deadline=None)
    def test_pythagorean_identity(self, a):
        x = var(0, a, 1, 4)
        one = jets.sin(x) * jets.sin(x) + jets.cos(x) * jets.cos(x)
        coeffs = np.asarray(one.coeffs, dtype=float)
        assert coeffs[0] == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(coeffs[1:], 0.0, atol=1e-10)

    @given(st.floats(min_value=0.2, max_value=3.0))
    @settings(max_examples=40, deadline=None)
    def test_exp_log_roundtrip(self, a):
        x = var(0, a, 1, 3)
        y = jets.exp(jets.log(x))
        assert np.allclose(
            np.asarray(y.coeffs, dtype=float),
            np.asarray(x.coeffs, dtype=float),
            atol=1e-10,
        )

    @given(small, small)
    @settings(max_examples=40, deadline=None)
    def test_atan2_gradient(self, a, b):
        # keep away from the branch cut on the negative x axis
        x = var(0, a + 4.0, 2, 2)
        y = var(1, b, 2, 2)
        f = jets.atan2(y, x)

        def g(p):
            return math.atan2(p[1], p[0])

        assert jets.extract_partial(f, [1, 0]) == pytest.approx(
            central_first(g, [a + 4.0, b], 0), abs=1e-6
        )
        assert jets.extract_partial(f, [0, 1]) == pytest.approx(
            central_first(g, [a + 4.0, b], 1), abs=1e-6
        )


class TestRandomExpressionOracle:
    def test_fifty_random_expressions_match_finite_differences(self):
        rng = random.Random(20240817)
        names = ("x", "y")
        checked = 0
        while checked < 50:
            point = [rng.uniform(0.3, 0.9), rng.uniform(0.3, 0.9)]
            expr = evaluable_ast(rng, names, point, order=2, depth=3)

            def f(p):
                bindings = {
                    "x": jets.constant(float(p[0]), 2, 0),
                    "y": jets.constant(float(p[1]), 2, 0),
                }
                return jets.value_of(dsl.eval_expr(expr, bindings))

            bindings = {
                "x": jets.variable(0, point[0], 2, 2),
                "y": jets.variable(1, point[1], 2, 2),
            }
            j = dsl.eval_expr(expr, bindings)
            for alpha in ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2)):
                got = jets.extract_partial(j, alpha)
                if sum(alpha) == 1:
                    i = alpha.index(1)
                    want = central_first(f, point, i)
                else:
                    if alpha == (1, 1):
                        want = central_second(f, point, 0, 1)
                    else:
                        i = 0 if alpha[0] == 2 else 1
                        want = central_second(f, point, i, i)
                scale = max(1.0, abs(want))
                assert abs(got - want) <= 1e-5 * scale, (
                    f"expr {dsl.to_text(expr)} partial {alpha}: jet {got} vs fd {want}"
                )
            checked += 1
