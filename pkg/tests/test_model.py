import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sirg_ising import (
    BlockKernel,
    ConstantKernel,
    CustomKernel,
    KernelInvalid,
    ModelParams,
    NoRoot,
    ProductKernel,
    edge_probability,
    effective_kernel,
    energetic_preference_residual,
    parse_kernel,
    solve_field,
    solve_field_plus,
)
from sirg_ising.model import find_root, pair_probabilities

LN2 = math.log(2.0)
betas = st.floats(0.0, 5.0)
fields = st.floats(-3.0, 3.0)


def smooth_kernel():
    # symmetric, positive, with nontrivial beta dependence through the coordinates
    return CustomKernel(lambda x, y: 1.0 + math.exp(-(x * x + y * y)) + 0.5 * math.cos(x - y) ** 2, name="smooth")


class TestModelParams:
    def test_rejects_negative_beta(self):
        with pytest.raises(ValueError):
            ModelParams(-0.1)

    @pytest.mark.parametrize("bad", [math.inf, math.nan])
    def test_rejects_nonfinite(self, bad):
        with pytest.raises(ValueError):
            ModelParams(1.0, bad, 0.0)
        with pytest.raises(ValueError):
            ModelParams(bad)

    def test_coordinates(self):
        p = ModelParams(4.0, 0.5, 0.25)
        assert p.coordinate(1) == pytest.approx(1.0)
        assert p.coordinate(-1) == pytest.approx(-0.5)
        assert p.field(1) == 0.5 and p.field(-1) == 0.25

    def test_frozen(self):
        with pytest.raises(AttributeError):
            ModelParams(1.0).beta = 2.0


class TestEffectiveKernel:
    @given(betas, fields, fields)
    def test_constant_kernel(self, beta, bp, bm):
        e = effective_kernel(ConstantKernel(2.0), ModelParams(beta, bp, bm))
        assert (e.c_pp, e.c_pm, e.c_mm) == (2.0, 2.0, 2.0)
        assert (e.d_pp, e.d_pm, e.d_mm) == (0.0, 0.0, 0.0)

    @pytest.mark.parametrize("kernel", [smooth_kernel(), ProductKernel(2.0, g=math.exp), CustomKernel(lambda x, y: 3 + x * y)])
    def test_beta_zero_collapses_to_origin(self, kernel):
        e = effective_kernel(kernel, ModelParams(0.0, 1.0, 1.0))
        origin = kernel.eval(0.0, 0.0)
        assert e.c_pp == e.c_pm == e.c_mm == origin

    def test_block_kernel_ignores_beta_and_fields(self):
        e = effective_kernel(BlockKernel(1, 2, 3), ModelParams(0.0, 1.0, 1.0))
        assert (e.c_pp, e.c_pm, e.c_mm) == (1.0, 2.0, 3.0)

    def test_product_kernel_negative_entry(self):
        with pytest.raises(KernelInvalid):
            effective_kernel(ProductKernel(1.0), ModelParams(1.0, 2.0, 3.0))

    def test_product_kernel_values(self):
        # B(1) = 2, B(-1) = -3 makes both coordinates positive: s+ = 2, s- = 3
        e = effective_kernel(ProductKernel(1.0), ModelParams(1.0, 2.0, -3.0))
        assert (e.c_pp, e.c_pm, e.c_mm) == pytest.approx((4.0, 6.0, 9.0))

    def test_nonfinite_entry(self):
        with pytest.raises(KernelInvalid):
            effective_kernel(CustomKernel(lambda x, y: math.inf), ModelParams(1.0))

    def test_asymmetric_kernel(self):
        with pytest.raises(KernelInvalid):
            effective_kernel(CustomKernel(lambda x, y: 2 + x), ModelParams(1.0, 1.0, 1.0))

    @settings(max_examples=50)
    @given(st.floats(0.0, 3.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
    def test_label_swap_symmetry(self, beta, bp, bm):
        base = smooth_kernel()
        flipped = CustomKernel(lambda x, y: base.eval(-x, -y))
        e = effective_kernel(base, ModelParams(beta, bp, bm))
        s = effective_kernel(flipped, ModelParams(beta, bm, bp))
        assert s.c_pp == pytest.approx(e.c_mm, rel=1e-12)
        assert s.c_mm == pytest.approx(e.c_pp, rel=1e-12)
        assert s.c_pm == pytest.approx(e.c_pm, rel=1e-12)

    @pytest.mark.parametrize("beta", [0.0, 0.3, 1.0, 2.5])
    def test_fd_matches_analytic_product(self, beta):
        params = ModelParams(beta, 0.7, -1.3)
        k = ProductKernel(1.5)
        a = effective_kernel(k, params, derivatives="analytic")
        f = effective_kernel(k, params, derivatives="fd")
        for x, y in [(a.d_pp, f.d_pp), (a.d_pm, f.d_pm), (a.d_mm, f.d_mm)]:
            assert abs(x - y) <= 1e-6 * max(abs(x), 1.0)

    @pytest.mark.parametrize("beta", [0.0, 0.8])
    def test_fd_matches_analytic_custom(self, beta):
        # C(x, y) = exp(x + y): entries exp(2 s), derivatives via ds/dbeta = s / (2 beta)
        bp, bm = 0.4, 0.6

        def deriv(p):
            return math.exp(2 * math.sqrt(p.beta) * bp) * bp / math.sqrt(p.beta) if p.beta else math.nan

        k = CustomKernel(lambda x, y: math.exp(x + y))
        f = effective_kernel(k, ModelParams(beta, bp, bm), derivatives="fd")
        if beta > 0:
            assert f.d_pp == pytest.approx(deriv(ModelParams(beta)), rel=1e-6)
        else:
            assert math.isfinite(f.d_pp)

    def test_analytic_required(self):
        with pytest.raises(ValueError):
            effective_kernel(smooth_kernel(), ModelParams(1.0), derivatives="analytic")

    def test_matrix_layout(self):
        e = effective_kernel(BlockKernel(1, 2, 3), ModelParams(0.5))
        assert e.matrix().tolist() == [[3.0, 2.0], [2.0, 1.0]]
        assert e.entry(1, 1) == 1.0 and e.entry(-1, 1) == 2.0 and e.entry(-1, -1) == 3.0


class TestResidual:
    def test_constant_antisymmetric_field(self):
        assert energetic_preference_residual(ConstantKernel(2.0), ModelParams(1.0, 0.3, -0.3)) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("kernel", [ConstantKernel(3.0), BlockKernel(1, 2, 3), smooth_kernel()])
    def test_beta_zero(self, kernel):
        assert energetic_preference_residual(kernel, ModelParams(0.0, 0.5, 0.5)) == pytest.approx(-2.0)

    def test_block_example(self):
        assert energetic_preference_residual(BlockKernel(1, 2, 3), ModelParams(LN2, 0.5, 0.5)) == pytest.approx(0.0, abs=1e-15)

    @given(betas, fields, st.floats(0.0, 10.0))
    def test_identically_zero_for_constant(self, beta, b, lam):
        assert energetic_preference_residual(ConstantKernel(lam), ModelParams(beta, b, -b)) == 0.0


class TestSolveField:
    @pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
    def test_constant(self, lam):
        assert solve_field(ConstantKernel(lam), 1.0, 0.7, (-10, 10)) == pytest.approx(-0.7, abs=1e-12)

    @pytest.mark.parametrize("kernel", [ConstantKernel(1.0), BlockKernel(4, 1, 2), smooth_kernel()])
    def test_beta_zero(self, kernel):
        assert solve_field(kernel, 0.0, 0.35) == pytest.approx(-0.35, abs=1e-12)

    def test_block_example(self):
        assert solve_field(BlockKernel(1, 2, 3), LN2, 0.5, (-10, 10)) == pytest.approx(0.5, abs=1e-12)

    def test_reverse_direction(self):
        assert solve_field_plus(BlockKernel(1, 2, 3), LN2, 0.5, (-10, 10)) == pytest.approx(0.5, abs=1e-12)

    def test_solution_satisfies_constraint(self):
        k = smooth_kernel()
        bm = solve_field(k, 1.3, 0.2)
        assert abs(energetic_preference_residual(k, ModelParams(1.3, 0.2, bm))) <= 1e-9

    def test_no_sign_change(self):
        with pytest.raises(NoRoot):
            solve_field(ConstantKernel(1.0), 1.0, 0.7, (0.0, 1.0))

    def test_find_root_precision(self):
        root = find_root(lambda x: x * x - 2.0, 0.0, 2.0)
        assert root == pytest.approx(math.sqrt(2.0), abs=1e-12)


class TestEdgeProbability:
    def test_examples(self):
        assert edge_probability(ConstantKernel(2.0), 4, 0.0, 0.0) == 0.5
        assert edge_probability(ConstantKernel(10.0), 5, 0.0, 0.0) == 1.0
        p = edge_probability(ConstantKernel(3.0), 3000, 0.0, 0.0)
        assert p == pytest.approx(0.001) and 3000 * p == pytest.approx(3.0)

    @given(st.floats(0.0, 50.0), st.integers(1, 10**6), st.integers(1, 100))
    def test_range_and_monotone(self, lam, n, k):
        k1 = ConstantKernel(lam)
        p = edge_probability(k1, n, 0.0, 0.0)
        assert 0.0 <= p <= 1.0
        assert edge_probability(k1, n + k, 0.0, 0.0) <= p

    def test_negative_rejected(self):
        with pytest.raises(KernelInvalid):
            edge_probability(CustomKernel(lambda x, y: -1.0), 10, 0.0, 0.0)

    def test_pair_probabilities(self):
        e = effective_kernel(BlockKernel(1, 2, 3), ModelParams(0.5))
        assert pair_probabilities(e, 10).tolist() == [[0.3, 0.2], [0.2, 0.1]]


class TestParseKernel:
    def test_grammar(self):
        assert isinstance(parse_kernel("constant:1.5"), ConstantKernel)
        b = parse_kernel("block:1,2,3")
        assert (b.c11, b.c1m1, b.cm1m1) == (1.0, 2.0, 3.0)
        assert parse_kernel("product:2").c == 2.0

    @pytest.mark.parametrize("text", ["constant", "block:1,2", "gauss:1", "constant:x", "product:1,2"])
    def test_bad(self, text):
        with pytest.raises(ValueError):
            parse_kernel(text)
