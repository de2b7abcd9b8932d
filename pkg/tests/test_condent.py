import math

import numpy as np
import pytest

from qfdiv.channels import (
    build_classical_register_state,
    embed_ancilla,
    pure_bipartite_from_schmidt,
    random_density,
)
from qfdiv.condent import (
    BipartiteState,
    OptimizerOptions,
    alpha_log,
    chain_rule_rhs,
    classical_register_closed_form,
    conditional_entropy_optimize,
    conditional_entropy_tsallis_closed,
    conditional_entropy_vn_closed,
    pure_state_bounds_tsallis,
    thm2_bounds,
    tsallis_entropy,
)
from qfdiv.errors import DomainError, PreconditionError
from qfdiv.fdiv import DivergenceFunction, make_tsallis_f, quantum_f_divergence
from qfdiv.linalg import partial_trace, support_projector

from conftest import bell_matrix

LN2 = math.log(2.0)


def random_bipartite(dims, rank, seed):
    return BipartiteState(random_density(int(np.prod(dims)), rank, seed), dims)


class TestAlphaLog:
    @pytest.mark.parametrize("alpha", [0.3, 1.0, 1.7, 2.0])
    def test_vanishes_at_one(self, alpha):
        assert alpha_log(1.0, alpha) == pytest.approx(0.0)

    def test_quadratic_value(self):
        assert alpha_log(0.5, 2.0) == pytest.approx(-1.0)

    def test_limit_toward_one(self):
        assert alpha_log(math.e, 1.000001) == pytest.approx(1.0, abs=1e-5)

    def test_domain(self):
        with pytest.raises(DomainError):
            alpha_log(0.0, 2.0)
        with pytest.raises(DomainError):
            alpha_log(1.0, -1.0)


class TestTsallisEntropy:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_pure_state_vanishes(self, alpha):
        rho = random_density(3, 1, seed=1)
        assert tsallis_entropy(rho, alpha) == pytest.approx(0.0, abs=1e-12)

    def test_qubit_mixed_quadratic(self):
        assert tsallis_entropy(np.eye(2) / 2, 2.0) == pytest.approx(0.5)

    @pytest.mark.parametrize("d", [2, 3, 5])
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 2.0])
    def test_maximally_mixed_hits_alpha_log(self, d, alpha):
        got = tsallis_entropy(np.eye(d) / d, alpha)
        assert got == pytest.approx(alpha_log(float(d), alpha), abs=1e-12)

    def test_nonnegative(self):
        for t in range(30):
            rho = random_density(4, 1 + t % 4, seed=100 + t)
            assert tsallis_entropy(rho, 0.5 + 0.5 * (t % 4)) >= -1e-12


class TestBipartiteState:
    def test_dims_must_factor_dimension(self):
        with pytest.raises(DomainError, match="dimension mismatch"):
            BipartiteState(np.eye(4) / 4, (2, 3))

    def test_requires_normalization(self):
        with pytest.raises(DomainError, match="normalized"):
            BipartiteState(np.eye(4) / 8, (2, 2))

    def test_three_factors(self):
        state = random_bipartite((2, 2, 2), 3, seed=2)
        assert state.dims == (2, 2, 2)


class TestGoldenValues:
    def test_bell_closed_form(self, bell_state):
        value, sigma = conditional_entropy_tsallis_closed(bell_state, 2.0)
        assert value == pytest.approx(-1.0, abs=1e-9)
        np.testing.assert_allclose(sigma.entries, np.eye(2) / 2, atol=1e-9)

    def test_bell_optimizer(self, bell_state):
        report = conditional_entropy_optimize(bell_state, make_tsallis_f(2.0))
        assert report.converged
        assert report.value == pytest.approx(-1.0, abs=1e-9)

    def test_bell_log_family(self, bell_state):
        assert conditional_entropy_vn_closed(bell_state) == pytest.approx(-LN2, abs=1e-12)
        report = conditional_entropy_optimize(bell_state, make_tsallis_f(1.0))
        assert report.value == pytest.approx(-LN2, abs=1e-8)

    def test_product_state_quadratic(self):
        sigma_b = random_density(3, 3, seed=3)
        state = BipartiteState(np.kron(np.eye(2) / 2, sigma_b.entries), (2, 3))
        value, _ = conditional_entropy_tsallis_closed(state, 2.0)
        assert value == pytest.approx(0.5, abs=1e-8)

    @pytest.mark.parametrize("d_a,d_b", [(2, 2), (3, 2), (4, 3)])
    def test_maximally_mixed_quadratic(self, d_a, d_b):
        d = d_a * d_b
        state = BipartiteState(np.eye(d) / d, (d_a, d_b))
        value, _ = conditional_entropy_tsallis_closed(state, 2.0)
        assert value == pytest.approx(1.0 - 1.0 / d_a, abs=1e-10)

    def test_pure_state_is_minus_marginal_entropy(self):
        # |AB><AB| conditioned on B gives -H(rho_B)
        coeffs = np.sqrt([0.6, 0.3, 0.1])
        state = pure_bipartite_from_schmidt(coeffs, 3, 3, seed=4)
        rho_b = partial_trace(state, "B")
        assert conditional_entropy_vn_closed(state) == pytest.approx(
            -tsallis_entropy(rho_b, 1.0), abs=1e-10
        )


class TestProductIdentity:
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 1.5, 2.0])
    def test_product_reduces_to_first_factor(self, alpha):
        rho_a = random_density(3, 2, seed=5)
        rho_b = random_density(2, 2, seed=6)
        state = BipartiteState(np.kron(rho_a.entries, rho_b.entries), (3, 2))
        value, sigma = conditional_entropy_tsallis_closed(state, alpha)
        assert value == pytest.approx(tsallis_entropy(rho_a, alpha), abs=1e-10)
        if alpha != 1.0:
            # the optimizing state of a product is the conditioning marginal
            np.testing.assert_allclose(sigma.entries, rho_b.entries, atol=1e-8)


class TestOptimizer:
    def test_agrees_with_closed_form(self):
        for t, alpha in enumerate((0.3, 0.5, 1.5, 2.0)):
            state = random_bipartite((2, 3), 1 + t % 6, seed=700 + t)
            closed, _ = conditional_entropy_tsallis_closed(state, alpha)
            report = conditional_entropy_optimize(state, make_tsallis_f(alpha))
            assert report.converged
            assert report.value == pytest.approx(closed, abs=1e-6)

    def test_report_shape(self):
        state = random_bipartite((2, 2), 3, seed=8)
        opts = OptimizerOptions(starts=5, seed=99)
        report = conditional_entropy_optimize(state, make_tsallis_f(2.0), opts)
        assert report.starts == 5
        assert len(report.iterations_per_start) == 5
        assert 0 <= report.best_start_index < 5
        assert report.sigma_star.trace_value == pytest.approx(1.0, abs=1e-9)

    def test_sigma_star_supported_on_reduced_state(self):
        # padding makes the conditioning marginal rank deficient
        state = embed_ancilla(random_bipartite((2, 2), 2, seed=9), 2)
        report = conditional_entropy_optimize(state, make_tsallis_f(2.0))
        p = support_projector(partial_trace(state, "B")).entries
        sigma = report.sigma_star.entries
        assert np.abs(p @ sigma @ p - sigma).max() <= 1e-8

    def test_rank_one_marginal_skips_descent(self):
        state = pure_bipartite_from_schmidt([1.0], 2, 3, seed=10)
        report = conditional_entropy_optimize(state, make_tsallis_f(2.0))
        assert report.starts == 0
        assert report.converged
        assert report.value == pytest.approx(0.0, abs=1e-10)

    def test_generic_function_between_bounds(self):
        # a non-catalog operator-convex mix exercises the fully generic path
        f_half = make_tsallis_f(0.5)
        f_two = make_tsallis_f(2.0)
        mix = DivergenceFunction(
            name="mix",
            fn=lambda x: 0.5 * (f_half.fn(x) + f_two.fn(x)),
            f_at_zero=0.0,
            ell=math.inf,
            f_at_one=0.0,
            operator_convex=True,
        )
        state = random_bipartite((2, 2), 3, seed=11)
        report = conditional_entropy_optimize(state, mix)
        assert report.converged
        lower, upper = thm2_bounds(state, mix)
        assert lower - 1e-9 <= report.value <= upper + 1e-9
        half = conditional_entropy_optimize(state, f_half).value
        two = conditional_entropy_optimize(state, f_two).value
        assert report.value <= 0.5 * (half + two) + 1e-8

    def test_rejects_nonzero_at_origin(self):
        shifted = DivergenceFunction(
            name="shifted",
            fn=lambda x: (x - 1.0) ** 2,
            f_at_zero=1.0,
            ell=math.inf,
            f_at_one=0.0,
            operator_convex=True,
        )
        state = random_bipartite((2, 2), 2, seed=12)
        with pytest.raises(PreconditionError, match="f\\(0\\)"):
            conditional_entropy_optimize(state, shifted)

    def test_rejects_non_operator_convex(self):
        state = random_bipartite((2, 2), 2, seed=13)
        with pytest.raises(PreconditionError, match="operator convex"):
            conditional_entropy_optimize(state, make_tsallis_f(2.5))

    def test_rejects_zero_starts(self):
        state = random_bipartite((2, 2), 2, seed=14)
        with pytest.raises(DomainError):
            conditional_entropy_optimize(state, make_tsallis_f(2.0), OptimizerOptions(starts=0))

    def test_starved_iterations_raise_with_diagnostics(self):
        from qfdiv.errors import ConvergenceError

        state = random_bipartite((3, 3), 6, seed=303)
        opts = OptimizerOptions(max_iters=1, starts=2, seed=1)
        with pytest.raises(ConvergenceError, match="start 0"):
            conditional_entropy_optimize(state, make_tsallis_f(2.0), opts)

    @pytest.mark.parametrize("alpha", [0.5, 2.0])
    def test_monte_carlo_scan_cannot_beat_optimizer(self, alpha):
        # independent route: draw feasible sigmas directly and evaluate the
        # divergence with the general engine; none may do better, and the
        # best draw must land near the reported optimum
        state = random_bipartite((2, 2), 3, seed=23)
        f = make_tsallis_f(alpha)
        report = conditional_entropy_optimize(state, f)
        gen = np.random.Generator(np.random.Philox(key=2023))
        best = -math.inf
        for _ in range(2000):
            g = gen.standard_normal((2, 2)) + 1j * gen.standard_normal((2, 2))
            sigma = g @ g.conj().T
            sigma /= np.trace(sigma).real
            candidate = -quantum_f_divergence(state.entries, np.kron(np.eye(2), sigma), f)
            best = max(best, candidate)
        assert report.value >= best - 1e-9
        assert report.value <= best + 5e-2

    def test_log_family_optimizer_matches_entropy_difference(self):
        f1 = make_tsallis_f(1.0)
        for t in range(6):
            dims = (2, 2) if t % 2 else (2, 3)
            state = random_bipartite(dims, 1 + t % (dims[0] * dims[1]), seed=650 + t)
            direct = conditional_entropy_optimize(state, f1).value
            assert direct == pytest.approx(conditional_entropy_vn_closed(state), abs=1e-6)

    def test_scaled_optimum_is_monotone_in_mu(self):
        # the divergence against 1 (x) mu * sigma_star decreases toward mu = 1
        state = random_bipartite((2, 3), 4, seed=15)
        f = make_tsallis_f(1.5)
        report = conditional_entropy_optimize(state, f)
        values = [
            quantum_f_divergence(
                state.entries, np.kron(np.eye(2), mu * report.sigma_star.entries), f
            )
            for mu in (0.25, 0.5, 0.75, 1.0)
        ]
        assert all(a >= b - 1e-10 for a, b in zip(values, values[1:]))


class TestClosedForm:
    def test_rejects_alpha_outside_validity(self):
        state = random_bipartite((2, 2), 2, seed=16)
        for alpha in (0.0, -1.0, 2.2):
            with pytest.raises(PreconditionError):
                conditional_entropy_tsallis_closed(state, alpha)

    def test_alpha_one_matches_entropy_difference(self):
        state = random_bipartite((2, 3), 4, seed=17)
        value, sigma = conditional_entropy_tsallis_closed(state, 1.0)
        assert value == pytest.approx(conditional_entropy_vn_closed(state), abs=1e-12)
        np.testing.assert_allclose(sigma.entries, partial_trace(state, "B").entries, atol=1e-12)

    def test_extension_independence(self):
        state = random_bipartite((2, 2), 3, seed=18)
        for alpha in (0.5, 1.0, 2.0):
            base, _ = conditional_entropy_tsallis_closed(state, alpha)
            for k in (1, 2, 4):
                padded, _ = conditional_entropy_tsallis_closed(embed_ancilla(state, k), alpha)
                assert padded == pytest.approx(base, abs=1e-7)

    def test_alpha_continuity(self):
        for t in range(10):
            state = random_bipartite((2, 2), 1 + t % 4, seed=800 + t)
            h1 = conditional_entropy_vn_closed(state)
            for alpha in (1.0 - 1e-4, 1.0 + 1e-4):
                h, _ = conditional_entropy_tsallis_closed(state, alpha)
                assert abs(h - h1) <= 1e-3


class TestBounds:
    def test_bell_log_bounds_and_saturation(self, bell_state):
        lower, upper = thm2_bounds(bell_state, make_tsallis_f(1.0))
        assert lower == pytest.approx(-LN2, abs=1e-12)
        assert upper == pytest.approx(0.0, abs=1e-12)
        assert conditional_entropy_vn_closed(bell_state) == pytest.approx(lower, abs=1e-8)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_maximally_mixed_upper_bound(self, alpha):
        state = BipartiteState(np.eye(6) / 6, (2, 3))
        _, upper = thm2_bounds(state, make_tsallis_f(alpha))
        assert upper == pytest.approx(alpha_log(6.0, alpha), abs=1e-12)

    def test_bracket_holds_on_random_states(self):
        for t in range(40):
            state = random_bipartite((2, 2) if t % 2 else (2, 3), 1 + t % 4, seed=900 + t)
            alpha = (0.3, 0.5, 1.0, 1.5, 2.0)[t % 5]
            h, _ = conditional_entropy_tsallis_closed(state, alpha)
            lower, upper = thm2_bounds(state, make_tsallis_f(alpha))
            assert lower - 1e-7 <= h <= upper + 1e-7


class TestPureStateBounds:
    def test_product_coefficients(self):
        assert pure_state_bounds_tsallis([1.0, 0.0], 1.3) == pytest.approx((0.0, 0.0))

    def test_equal_coefficients_coincide(self):
        c = 1.0 / math.sqrt(2.0)
        lower, upper = pure_state_bounds_tsallis([c, c], 2.0)
        assert lower == pytest.approx(-1.0)
        assert upper == pytest.approx(-1.0)

    def test_skewed_upper_bound(self):
        lower, upper = pure_state_bounds_tsallis(np.sqrt([0.9, 0.1]), 2.0)
        assert upper == pytest.approx(alpha_log(0.9, 2.0), abs=1e-12)
        assert upper == pytest.approx(-1.0 / 9.0, abs=1e-12)
        assert lower <= upper
        assert upper < 0.0

    def test_entangled_states_strictly_negative(self):
        for t in range(20):
            k = 2 + t % 3
            u = np.linspace(1.0, 2.0, k)
            coeffs = np.sqrt(u / u.sum())
            _, upper = pure_state_bounds_tsallis(coeffs, 0.5 + 0.5 * (t % 4))
            assert upper < 0.0

    def test_bracket_contains_entropy(self):
        coeffs = np.sqrt([0.5, 0.3, 0.2])
        state = pure_bipartite_from_schmidt(coeffs, 3, 4, seed=19)
        for alpha in (0.5, 1.0, 2.0):
            h, _ = conditional_entropy_tsallis_closed(state, alpha)
            lower, upper = pure_state_bounds_tsallis(coeffs, alpha)
            assert lower - 1e-9 <= h <= upper + 1e-9

    def test_rejects_unnormalized(self):
        with pytest.raises(DomainError, match="unit square sum"):
            pure_state_bounds_tsallis([0.5, 0.5], 2.0)


class TestClassicalRegister:
    def test_single_block_collapses(self):
        for alpha in (0.5, 1.0, 2.0):
            assert classical_register_closed_form([-0.4], [1.0], alpha) == pytest.approx(-0.4)

    def test_equal_blocks_are_fixed_point(self):
        for alpha in (0.5, 1.0, 2.0):
            got = classical_register_closed_form([0.3, 0.3, 0.3], [0.2, 0.3, 0.5], alpha)
            assert got == pytest.approx(0.3, abs=1e-12)

    def test_two_block_value(self):
        # p = (1/2, 1/2), H = (0, -1), alpha = 2: -(((1 + sqrt 2)/2)^2 - 1)
        got = classical_register_closed_form([0.0, -1.0], [0.5, 0.5], 2.0)
        assert got == pytest.approx(1.0 - ((1.0 + math.sqrt(2.0)) / 2.0) ** 2, abs=1e-12)

    def test_alpha_one_is_the_mean(self):
        got = classical_register_closed_form([0.2, -0.6], [0.25, 0.75], 1.0)
        assert got == pytest.approx(0.25 * 0.2 + 0.75 * -0.6)

    def test_rejects_inconsistent_entropies(self):
        # alpha = 2 requires 1 - H >= 0, so an entropy above 1 is impossible
        with pytest.raises(DomainError, match="inconsistent"):
            classical_register_closed_form([3.0], [1.0], 2.0)

    def test_rejects_bad_distribution(self):
        with pytest.raises(DomainError, match="probability"):
            classical_register_closed_form([0.0, 0.0], [0.7, 0.7], 2.0)

    def test_matches_assembled_state(self, bell_state):
        pure = BipartiteState(np.diag([1.0, 0.0, 0.0, 0.0]), (2, 2))
        assembled = build_classical_register_state([pure, bell_state], [0.5, 0.5])
        for alpha in (0.5, 1.0, 1.3, 2.0):
            h_blocks = [
                conditional_entropy_tsallis_closed(b, alpha)[0] for b in (pure, bell_state)
            ]
            formula = classical_register_closed_form(h_blocks, [0.5, 0.5], alpha)
            direct, _ = conditional_entropy_tsallis_closed(assembled, alpha)
            assert formula == pytest.approx(direct, abs=1e-9)
            # the mixture average can only underestimate the register entropy
            assert np.dot([0.5, 0.5], h_blocks) <= formula + 1e-9


class TestChainRule:
    def test_trivial_dimension(self):
        assert chain_rule_rhs(-0.3, 1, 1.7) == pytest.approx(-0.3)

    def test_alpha_one_additive(self):
        assert chain_rule_rhs(0.4, 3, 1.0) == pytest.approx(0.4 + math.log(3.0))

    def test_quadratic_example(self):
        assert chain_rule_rhs(-1.0, 2, 2.0) == pytest.approx(0.0)

    def test_rejects_bad_dimension(self):
        with pytest.raises(DomainError):
            chain_rule_rhs(0.0, 0, 1.0)

    def test_holds_on_random_three_qubit_states(self):
        for t in range(15):
            state = random_bipartite((2, 2, 2), 1 + t % 8, seed=1000 + t)
            for alpha in (0.5, 1.0, 2.0):
                h_b = conditional_entropy_tsallis_closed(state, alpha, cond="B")[0]
                h_bc = conditional_entropy_tsallis_closed(state, alpha, cond="BC")[0]
                assert h_b <= chain_rule_rhs(h_bc, 2, alpha) + 1e-7

    def test_conditioning_labels_validated(self):
        state = random_bipartite((2, 2), 2, seed=20)
        with pytest.raises(DomainError):
            conditional_entropy_tsallis_closed(state, 2.0, cond="C")
        with pytest.raises(DomainError):
            conditional_entropy_tsallis_closed(state, 2.0, cond="AB")
