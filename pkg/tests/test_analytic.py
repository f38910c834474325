"""Unit tests for fixed points, thresholds and critical curves."""

import math

import numpy as np
import pytest

from arbor_rcm.errors import InvalidInputError
from arbor_rcm.models.law import OffspringLaw
from arbor_rcm.services import analytic, pgf


@pytest.fixture
def binary() -> OffspringLaw:
    return pgf.deterministic(2)


def binary_theta(p: float) -> float:
    """Closed form for G(x) = x^2: theta = (2p - 1) / p^2 above 1/2."""
    return max(0.0, (2 * p - 1) / p**2)


class TestSurvival:
    """Tests for theta and its relatives."""

    @pytest.mark.parametrize("p", [0.55, 0.6, 0.75, 0.9, 1.0])
    def test_binary_closed_form(self, binary: OffspringLaw, p: float):
        """theta of the binary tree matches (2p - 1) / p^2."""
        assert analytic.theta(binary, p) == pytest.approx(binary_theta(p), abs=1e-10)

    @pytest.mark.parametrize("p", [0.0, 0.3, 0.5])
    def test_subcritical_is_zero(self, binary: OffspringLaw, p: float):
        """No survival while p * mean <= 1."""
        assert analytic.theta(binary, p) == 0.0

    def test_result_record(self, binary: OffspringLaw):
        """The record carries a small residual and a bracket around the root."""
        result = analytic.survival_theta(binary, 0.75)
        assert result.residual < 1e-9
        assert result.bracket[0] <= result.value <= result.bracket[1]

    def test_extinction_eta(self, binary: OffspringLaw):
        assert analytic.extinction_eta(binary, 0.75) == pytest.approx(1 - binary_theta(0.75), abs=1e-10)

    def test_finite_depth_decreases_to_theta(self, binary: OffspringLaw):
        """theta_D decreases in D towards theta."""
        values = [analytic.finite_depth_theta(binary, 0.75, d) for d in range(0, 60)]
        assert values[0] == 1.0
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert values[-1] == pytest.approx(binary_theta(0.75), abs=1e-9)

    def test_non_strict_law_allowed(self):
        """Laws with deaths are accepted for theta."""
        law = pgf.table([0.25, 0.0, 0.75])
        # 1 - p theta = eta with eta = 1/3 at p = 1
        assert analytic.theta(law, 1.0) == pytest.approx(2.0 / 3.0, abs=1e-10)

    def test_rejects_p_outside(self, binary: OffspringLaw):
        with pytest.raises(InvalidInputError):
            analytic.theta(binary, 1.2)


class TestGamma:
    """Tests for the black-root probability."""

    @pytest.mark.parametrize("p", [0.55, 0.6, 0.65])
    def test_below_threshold(self, binary: OffspringLaw, p: float):
        """gamma < 1 below p_G."""
        assert analytic.black_gamma(binary, p).value < 1.0

    @pytest.mark.parametrize("p", [2.0 / 3.0, 0.7, 0.9])
    def test_at_or_above_threshold(self, binary: OffspringLaw, p: float):
        """gamma = 1 from p_G on."""
        assert analytic.black_gamma(binary, p).value == 1.0

    def test_quadratic_oracle(self, binary: OffspringLaw):
        """Binary tree at p = 0.6: gamma = 2/3."""
        assert analytic.black_gamma(binary, 0.6).value == pytest.approx(2.0 / 3.0, abs=1e-9)

    def test_fixed_point_equation(self, binary: OffspringLaw):
        """gamma solves alpha = f_p(alpha)."""
        gamma = analytic.black_gamma(binary, 0.58).value
        assert analytic.f_p(binary, 0.58, gamma) == pytest.approx(gamma, abs=1e-9)

    def test_one_is_always_a_root(self, binary: OffspringLaw):
        """f_p(1) = 1."""
        assert analytic.f_p(binary, 0.6, 1.0) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("p", [0.6, 0.8, 0.95])
    def test_f_p_stays_in_unit_interval(self, p: float):
        """No overshoot above 1, also for laws with deaths."""
        law = pgf.table([0.1, 0.0, 0.9])
        gamma = analytic.black_gamma(law, p).value
        assert analytic.f_p(law, p, 1.0) == pytest.approx(1.0, abs=1e-12)
        assert analytic.f_p(law, p, 1.0) <= 1.0
        assert analytic.f_p(law, p, gamma) <= 1.0

    @pytest.mark.parametrize("law", [pgf.deterministic(2), pgf.table([0.1, 0.3, 0.6])], ids=["binary", "table"])
    def test_monotone_in_p(self, law: OffspringLaw):
        """theta and gamma are non-decreasing in p, with gamma >= theta."""
        grid = [float(p) for p in np.linspace(0.01, 0.99, 50)]
        thetas = [analytic.theta(law, p) for p in grid]
        gammas = [analytic.black_gamma(law, p).value for p in grid]
        assert all(a <= b + 1e-9 for a, b in zip(thetas, thetas[1:]))
        assert all(a <= b + 1e-9 for a, b in zip(gammas, gammas[1:]))
        assert all(g >= t - 1e-12 for t, g in zip(thetas, gammas))

    def test_fp_roots(self, binary: OffspringLaw):
        """Two roots below the threshold, only 1 above it."""
        assert analytic.fp_roots(binary, 0.6) == pytest.approx([2.0 / 3.0, 1.0], abs=1e-9)
        assert analytic.fp_roots(binary, 0.7) == [1.0]

    def test_gamma_k_increases_to_gamma(self, binary: OffspringLaw):
        """Iterates of f_p started at theta increase to gamma."""
        values = [analytic.gamma_k(binary, 0.6, k) for k in range(0, 200, 20)]
        assert values[0] == pytest.approx(binary_theta(0.6), abs=1e-10)
        assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))
        assert analytic.gamma_k(binary, 0.6, 200) == pytest.approx(2.0 / 3.0, abs=1e-9)

    def test_beta(self, binary: OffspringLaw):
        assert analytic.beta(binary) == pytest.approx(0.5, abs=1e-10)


class TestThresholds:
    """Tests for p_b, p_G and the maximizer of (1 - p) theta."""

    def test_p_b_two(self):
        """p_b(2) = 2/3."""
        assert analytic.p_b(2) == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_p_b_three(self):
        assert analytic.p_b(3) == pytest.approx(0.52337, abs=1e-5)

    @pytest.mark.parametrize("m", range(2, 9))
    def test_p_G_matches_closed_form(self, m: int):
        """Agreement at the default tolerances."""
        assert analytic.p_G(pgf.deterministic(m)) == pytest.approx(analytic.p_b(m), abs=1e-9)

    def test_p_G_loose_tolerance_still_tight(self):
        """A loose critical tolerance does not coarsen p_G."""
        assert analytic.p_G(pgf.deterministic(3), tol=1e-4) == pytest.approx(analytic.p_b(3), abs=1e-9)

    def test_p_b_large_m_asymptotics(self):
        """p_b(m) behaves like log(m) / m."""
        m = 10_000
        assert 0.85 <= analytic.p_b(m) * m / math.log(m) <= 1.15

    def test_p_G_requires_strict_law(self):
        with pytest.raises(InvalidInputError):
            analytic.p_G(pgf.table([0.25, 0.0, 0.75]))

    def test_maximizer_of_one_minus_p_theta(self, binary: OffspringLaw):
        """(1 - p) theta is maximal at p_G."""
        assert analytic.maximize_one_minus_p_theta(binary) == pytest.approx(2.0 / 3.0, abs=1e-5)

    def test_gamma_one_exactly_at_p_G(self):
        """At p = p_b the root is black almost surely."""
        law = pgf.deterministic(3)
        assert analytic.black_gamma(law, analytic.p_b(3)).value == 1.0


class TestCriticalCurves:
    """Tests for pi, p_c0 and p_c1."""

    def test_pi(self):
        assert analytic.pi(0.5, 2.0) == pytest.approx(1.0 / 3.0)
        assert analytic.pi(0.3, 1.0) == pytest.approx(0.3)

    @pytest.mark.parametrize("q", [1.0, 1.5, 2.0, 2.5, 3.0, 5.0, 10.0])
    def test_p_c0_binary(self, q: float):
        """Free threshold of T_2' is q / (q + 1)."""
        assert analytic.p_c0(2, q) == pytest.approx(q / (q + 1.0), abs=1e-15)

    @pytest.mark.parametrize("q", [1.0, 1.5, 2.0, 2.5, 3.0, 5.0, 10.0])
    def test_p_c1_binary_closed_form(self, q: float):
        """Wired threshold of T_2' against its closed form on both sides of q = 2."""
        if q <= 2.0:
            expected = q / (q + 1.0)
        else:
            root = 2.0 * math.sqrt(q - 1.0)
            expected = root / (1.0 + root)
        assert analytic.p_c1(2, q) == pytest.approx(expected, abs=1e-8)

    def test_p_c1_at_five(self):
        """p_c1(2, 5) = 0.8."""
        assert analytic.p_c1(2, 5.0) == pytest.approx(0.8, abs=1e-8)

    def test_p_c1_below_p_c0_for_large_q(self):
        """The wired transition comes first for large q."""
        assert analytic.p_c1(3, 4.0) < analytic.p_c0(3, 4.0)

    def test_p_c1_rejects_small_q(self):
        with pytest.raises(InvalidInputError):
            analytic.p_c1(2, 0.5)

    def test_critical_curve_points(self):
        """One point per kind, with p_b and p_G agreeing."""
        points = analytic.critical_curve(2, [3.0])
        kinds = {pt.kind: pt.p for pt in points}
        assert set(kinds) == {"pc0", "pc1", "pb", "pG"}
        assert kinds["pc0"] == pytest.approx(0.75)
        assert kinds["pb"] == pytest.approx(kinds["pG"], abs=1e-8)


class TestAttachment:
    """Tests for the wired-subtree edge parameters."""

    def test_first_level(self):
        """One level of series and parallel replacements: 1 - (1 - p)^2."""
        result = analytic.effective_attachment(2, 0.6, 2.0, levels=1)
        assert result.sequence == pytest.approx([1 - 0.4**2])

    def test_sequence_decreases_to_limit(self):
        """r(n) decreases to its limit."""
        result = analytic.effective_attachment(2, 0.8, 2.0, levels=30)
        seq = result.sequence
        assert all(a >= b for a, b in zip(seq, seq[1:]))
        assert seq[-1] >= result.p_inf
        assert seq[-1] == pytest.approx(result.p_inf, abs=1e-6)

    def test_percolation_limit_is_survival(self):
        """At q = 1 the limit is theta of the m-ary tree."""
        p_inf = analytic.effective_attachment(2, 0.7, 1.0).p_inf
        assert p_inf == pytest.approx(analytic.theta(pgf.deterministic(2), 0.7), abs=1e-9)

    def test_attachment_parameter_zero_levels(self):
        assert analytic.attachment_parameter(2, 0.6, 2.0, 0) == 1.0

    def test_theta1_finite_percolation(self):
        """At q = 1 and n = 1 the root needs one of its three edges."""
        # q = 1, n = 1: root joined to depth 1 through any of its 3 edges
        assert analytic.theta1_finite(2, 0.6, 1.0, 1) == pytest.approx(1 - 0.4**3, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 5, 12])
    def test_theta1_finite_percolation_deeper(self, n: int):
        """At q = 1 the root reaches depth n through one of its m + 1 children."""
        below = analytic.finite_depth_theta(pgf.deterministic(2), 0.6, n - 1)
        assert analytic.theta1_finite(2, 0.6, 1.0, n) == pytest.approx(1 - (1 - 0.6 * below) ** 3, abs=1e-12)

    def test_theta1_finite_deep_box(self):
        """Negligible below the wired threshold, large well above it."""
        assert analytic.theta1_finite(2, 0.3, 2.0, 30) < 1e-3
        assert analytic.theta1_finite(2, 0.9, 2.0, 30) > 0.5

    def test_theta1_finite_converges_to_wired(self):
        """Deep boxes approach theta_wired."""
        assert analytic.theta1_finite(2, 0.8, 2.0, 400) == pytest.approx(analytic.theta_wired(2, 0.8, 2.0), abs=1e-9)

    def test_theta_wired_transition_continuous_q(self):
        """For q <= 2 theta_wired leaves 0 continuously."""
        assert analytic.theta_wired(2, 0.6, 2.0) < 1e-8
        assert analytic.theta_wired(2, 0.75, 2.0) > 0.1

    def test_theta_wired_jump_large_q(self):
        """For q = 5 theta_wired jumps at p_c1 = 0.8."""
        assert analytic.theta_wired(2, 0.79, 5.0) < 1e-8
        assert analytic.theta_wired(2, 0.81, 5.0) > 0.1

    def test_theta_free(self):
        """Root survival under the product measure of density pi."""
        assert analytic.theta_free(2, 0.6, 2.0) == 0.0
        # pi = 2/3, the binary survival there is 3/4
        assert analytic.theta_free(2, 0.8, 2.0) == pytest.approx(7.0 / 8.0, abs=1e-9)

    def test_attachment_rejects_small_q(self):
        with pytest.raises(InvalidInputError):
            analytic.effective_attachment(2, 0.6, 0.5)


class TestUniquenessRegime:
    def test_supercritical_pi(self):
        """pi above p_b: every open relation has one measure, the product measure is not it."""
        regime = analytic.uniqueness_regime(2, 0.85, 2.0)
        assert regime.pi == pytest.approx(0.85 / 1.15)
        assert regime.open_relations_unique
        assert not regime.product_measure_unique
        assert regime.theta_wired > 0.0

    def test_low_density(self):
        """pi below 1/m: only the product measure is certainly unique."""
        regime = analytic.uniqueness_regime(2, 0.5, 2.0)
        assert not regime.open_relations_unique
        assert regime.product_measure_unique
        assert regime.theta_wired < 1e-8
