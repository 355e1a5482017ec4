import numpy as np
import pytest
from hypothesis import given, strategies as st

from alphacs.model import Alphabet, gen_gaussian_matrix, gen_signal, make_problem
from alphacs.penalty import (
    ObjectiveParams,
    beta_weight,
    beta_weights,
    concave_G,
    mcp_g,
    objective_F,
    objective_H,
)


class TestMcpG:
    def test_reference_values(self):
        assert mcp_g(0.0, 1.0) == 0.0
        assert mcp_g(1.0, 1.0) == 0.5
        assert mcp_g(0.5, 1.0) == pytest.approx(0.375, abs=0)
        assert mcp_g(-3.0, 2.0) == 2.0

    def test_branches_agree_at_boundary(self):
        for d in (0.5, 1.0, 2.5):
            inner = d * d - 0.5 * d * d
            assert mcp_g(d, d) == pytest.approx(inner, abs=1e-15)
            assert mcp_g(d, d) == pytest.approx(0.5 * d * d, abs=1e-15)

    @given(st.floats(-100, 100), st.floats(0.01, 10))
    def test_even_and_bounded(self, z, d):
        assert mcp_g(z, d) == mcp_g(-z, d)
        assert 0.0 <= mcp_g(z, d) <= 0.5 * d * d + 1e-12

    @given(st.floats(0, 50), st.floats(0, 50), st.floats(0.01, 10))
    def test_nondecreasing_in_magnitude(self, a, b, d):
        lo, hi = sorted((a, b))
        assert mcp_g(lo, d) <= mcp_g(hi, d) + 1e-12

    def test_rejects_nonpositive_d(self):
        with pytest.raises(ValueError):
            mcp_g(1.0, 0.0)


class TestConcaveG:
    def test_zero(self):
        assert concave_G(np.zeros(5), 1.0) == 0.0

    def test_lattice_value_k_half_d_squared(self):
        for d, k in [(1.0, 3), (0.5, 4), (2.0, 1)]:
            x = np.zeros(10)
            x[:k] = d * np.array([1, -1, 1, -1][:k])
            assert concave_G(x, d) == pytest.approx(0.5 * k * d * d, rel=1e-15)

    def test_equals_componentwise_sum(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            d = 1.3
            x = rng.uniform(-d, d, size=6)
            total = sum(mcp_g(v, d) for v in x)
            assert concave_G(x, d) == pytest.approx(total, abs=1e-14)

    def test_dominates_half_square_norm(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            d = 0.8
            x = rng.uniform(-d, d, size=12)
            assert concave_G(x, d) >= 0.5 * float(x @ x) - 1e-12

    def test_box_violation_rejected_but_slack_clamped(self):
        with pytest.raises(ValueError):
            concave_G(np.array([1.5]), 1.0)
        # marginal overshoot from floating-point projection is clamped
        assert concave_G(np.array([1.0 + 5e-13]), 1.0) == pytest.approx(0.5, abs=1e-12)


class TestBetaWeights:
    def test_reference_values(self):
        al = Alphabet(d=1.0, q=5)
        assert beta_weight(0.0, al) == 0.0
        assert beta_weight(0.3, al) == 1.0
        assert beta_weight(1.0, al) == 1.0
        assert beta_weight(1.2, al) == 2.0

    def test_inclusive_at_symbols_with_rounding_noise(self):
        al = Alphabet(d=0.1, q=5)
        # 3 * 0.1 rounds a few ulps above 0.3; the weight must stay at 0.3
        assert beta_weight(3 * 0.1, al) == pytest.approx(0.3, rel=1e-15)

    def test_domain_error_beyond_hull(self):
        al = Alphabet(d=1.0, q=2)
        with pytest.raises(ValueError):
            beta_weight(2.1, al)

    @given(st.floats(-5, 5))
    def test_smallest_symbol_at_least_magnitude(self, x):
        al = Alphabet(d=1.0, q=5)
        w = beta_weight(x, al)
        assert w >= abs(x) - 1e-12
        assert w in set(np.abs(al.symbols()))
        if w > 0:
            assert w - 1.0 < abs(x) + 1e-12  # minimality: one level down is too small

    def test_vectorized_matches_scalar(self):
        al = Alphabet(d=0.5, q=4)
        xs = np.array([0.0, 0.2, -0.5, 1.01, -1.99, 2.0])
        np.testing.assert_allclose(
            beta_weights(xs, al), [beta_weight(v, al) for v in xs]
        )


def _small_problem(seed=0, n=5, m=8, k=2, d=1.0, q=1):
    al = Alphabet(d=d, q=q)
    A = gen_gaussian_matrix(m, n, seed=seed)
    sig = gen_signal(n, k, al, seed=seed + 1)
    return make_problem(A, sig), sig, al


class TestObjectives:
    def test_F_at_truth_is_lambda_k_d2_over_2(self):
        al = Alphabet(d=1.0, q=1)
        A = gen_gaussian_matrix(20, 40, seed=8)
        sig = gen_signal(40, 3, al, seed=9)
        prob = make_problem(A, sig)
        params = ObjectiveParams(lam=0.01, alphabet=al)
        assert objective_F(sig.values, prob, params) == pytest.approx(0.015, abs=1e-12)

    def test_F_at_zero_is_half_y_norm(self):
        prob, _, al = _small_problem()
        params = ObjectiveParams(lam=0.2, alphabet=al)
        assert objective_F(np.zeros(prob.n), prob, params) == pytest.approx(
            0.5 * float(prob.y @ prob.y), rel=1e-15
        )

    def test_F_matches_termwise_oracle(self):
        prob, _, al = _small_problem(seed=3)
        params = ObjectiveParams(lam=0.07, alphabet=al)
        rng = np.random.default_rng(11)
        for _ in range(20):
            x = rng.uniform(-1, 1, size=prob.n)
            r = prob.y - prob.A @ x
            expected = 0.5 * sum(v * v for v in r)
            expected += params.lam * sum(abs(v) - 0.5 * v * v for v in x)
            assert objective_F(x, prob, params) == pytest.approx(expected, abs=1e-13)

    def test_F_requires_ternary(self):
        prob, _, _ = _small_problem()
        params = ObjectiveParams(lam=0.1, alphabet=Alphabet(d=1.0, q=2))
        with pytest.raises(ValueError):
            objective_F(np.zeros(prob.n), prob, params)

    def test_H_equals_F_for_ternary_on_random_box_points(self):
        prob, _, al = _small_problem(seed=5, n=8, m=6)
        params = ObjectiveParams(lam=0.01, alphabet=al)
        rng = np.random.default_rng(12)
        for _ in range(1000):
            x = rng.uniform(-1, 1, size=prob.n)
            assert objective_H(x, prob, params) == pytest.approx(
                objective_F(x, prob, params), abs=1e-13
            )

    def test_H_at_alphabet_truth(self):
        al = Alphabet(d=1.0, q=5)
        A = gen_gaussian_matrix(30, 50, seed=21)
        sig = gen_signal(50, 6, al, seed=22)
        prob = make_problem(A, sig)
        params = ObjectiveParams(lam=0.01, alphabet=al)
        expected = 0.5 * params.lam * float(sig.values @ sig.values)
        assert objective_H(sig.values, prob, params) == pytest.approx(expected, abs=1e-12)

    def test_H_at_zero(self):
        prob, _, _ = _small_problem(q=3)
        params = ObjectiveParams(lam=0.5, alphabet=Alphabet(d=1.0, q=3))
        assert objective_H(np.zeros(prob.n), prob, params) == pytest.approx(
            0.5 * float(prob.y @ prob.y), rel=1e-15
        )

    def test_H_penalty_nonnegative(self):
        al = Alphabet(d=1.0, q=4)
        prob, _, _ = _small_problem(seed=6, q=4)
        params = ObjectiveParams(lam=0.3, alphabet=al)
        rng = np.random.default_rng(13)
        for _ in range(200):
            x = rng.uniform(-al.hull_bound, al.hull_bound, size=prob.n)
            r = prob.y - prob.A @ x
            assert objective_H(x, prob, params) >= 0.5 * float(r @ r) - 1e-12

    def test_params_validation(self):
        with pytest.raises(ValueError):
            ObjectiveParams(lam=0.0, alphabet=Alphabet(d=1.0))
