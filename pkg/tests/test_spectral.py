"""Shell permutations, eigenphases, the damped phase series, dense checks."""

import math

import pytest

from intham.contours import enumerate_shell, next_site
from intham.errors import ShellNotClosed, ShellTooLarge
from intham.hamiltonians import IntegerFunction1D, SeparableHamiltonian1D
from intham.spectral import (
    BOUNDARY_PHASE,
    ShellPermutation,
    SpectrumEntry,
    TruncationConfig,
    cutoff_correction_check,
    damped_closed_form,
    eigenphases,
    hfract_operator_check,
    series_omega,
    spectrum_rows,
    total_spectrum,
)


def table(fn, lo=-6, hi=6):
    return IntegerFunction1D(lo, tuple(fn(x) for x in range(lo, hi + 1)))


diamond = SeparableHamiltonian1D(table(abs), table(abs))
pingpong = SeparableHamiltonian1D(table(lambda p: p * p), table(lambda q: 2 * q * q))


def permutation(ham, energy):
    shell = enumerate_shell(ham, energy)
    return ShellPermutation.from_step(lambda s: next_site(ham, *s), shell, energy)


four_cycle = permutation(diamond, 1)
two_cycle = permutation(pingpong, 1)
rest = permutation(diamond, 0)


class TestShellPermutation:
    def test_unit_diamond_is_one_four_cycle(self):
        assert four_cycle.cycles == ((0, 2, 3, 1),)

    def test_steep_well_is_a_transposition(self):
        assert two_cycle.cycles == ((0, 1),)

    def test_rest_site_is_a_fixed_point(self):
        assert rest.cycles == ((0,),)

    def test_partial_shell_is_rejected_with_the_escaping_state(self):
        shell = enumerate_shell(diamond, 1)
        with pytest.raises(ShellNotClosed) as err:
            ShellPermutation.from_step(lambda s: next_site(diamond, *s), shell[:3], 1)
        assert err.value.state == (0, 1)
        assert err.value.image == (1, 0)


class TestEigenphases:
    def test_four_cycle_phases_are_quarter_turns(self):
        entries = eigenphases(four_cycle)
        assert sorted(e.omega for e in entries) == [
            -math.pi / 2,
            0.0,
            math.pi / 2,
            math.pi,
        ]

    def test_half_turn_is_flagged_and_nudged_inside(self):
        entries = eigenphases(four_cycle)
        boundary = [e for e in entries if e.boundary]
        assert len(boundary) == 1
        assert boundary[0].omega == math.pi
        assert boundary[0].phase == BOUNDARY_PHASE
        assert BOUNDARY_PHASE < math.pi

    def test_interior_phases_pass_through_unchanged(self):
        for entry in eigenphases(four_cycle):
            if not entry.boundary:
                assert entry.phase == entry.omega

    def test_transposition_and_fixed_point(self):
        assert sorted(e.omega for e in eigenphases(two_cycle)) == [0.0, math.pi]
        assert [e.omega for e in eigenphases(rest)] == [0.0]


class TestPhaseSeries:
    def test_vanishes_at_zero(self):
        assert series_omega(0.0, 100) == 0.0

    def test_reconstructs_the_quarter_turn_slowly(self):
        err = abs(series_omega(math.pi / 2, 200001) - math.pi / 2)
        assert 0 < err < 1e-5

    def test_vanishes_identically_at_the_boundary(self):
        # every sin(n*pi) term is zero: the series cannot see a half turn
        assert abs(series_omega(math.pi, 500)) < 1e-12

    @pytest.mark.parametrize("omega", [0.5, 1.5, -3.0, math.pi - 0.1])
    @pytest.mark.parametrize("terms", [50, 100, 200, 400])
    def test_undamped_error_envelope(self, omega, terms):
        err = abs(series_omega(omega, terms) - omega)
        assert err <= 3 / (terms * abs(math.cos(omega / 2)))


class TestDampedClosedForm:
    def test_frozen_value(self):
        value = damped_closed_form(math.pi / 2, 10)
        assert value == pytest.approx(1.47096257800141, abs=1e-14)
        assert value == pytest.approx(2 * math.atan(math.exp(-0.1)), abs=1e-15)

    def test_damped_series_matches_the_closed_form(self):
        closed = damped_closed_form(math.pi / 2, 10)
        series = series_omega(math.pi / 2, 800, radius=10)
        assert abs(closed - series) < 1e-12

    def test_grid_agreement_with_the_damped_series(self):
        worst = 0.0
        for i in range(1, 40):
            omega = -math.pi + i * (2 * math.pi / 40)
            for radius in (5, 20, 100):
                series = series_omega(omega, 50 * radius, radius=radius)
                closed = damped_closed_form(omega, radius)
                worst = max(worst, abs(series - closed))
        assert worst < 1e-9

    def test_recovers_the_phase_as_damping_vanishes(self):
        for omega in (0.5, -2.0, 3.0):
            assert abs(damped_closed_form(omega, 1e9) - omega) < 1e-7

    def test_odd_in_omega(self):
        assert damped_closed_form(-1.2, 30) == -damped_closed_form(1.2, 30)


class TestOperatorCheck:
    def test_truncation_depth_scales_with_damping_radius(self):
        assert TruncationConfig.for_radius(20) == TruncationConfig(20.0, 829)

    def test_dense_operator_reproduces_the_closed_form(self):
        cfg = TruncationConfig.for_radius(20)
        for perm in (four_cycle, two_cycle, rest):
            result = hfract_operator_check(perm, cfg)
            assert result.max_residual < 1e-12

    def test_shell_size_cap(self):
        cfg = TruncationConfig.for_radius(20)
        with pytest.raises(ShellTooLarge) as err:
            hfract_operator_check(four_cycle, cfg, size_cap=2)
        assert err.value.size == 4
        assert err.value.limit == 2

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TruncationConfig(0, 10)
        with pytest.raises(ValueError):
            TruncationConfig(5, 0)


class TestTotals:
    def test_total_combines_energy_phase_and_half_turn(self):
        entry = SpectrumEntry(0, 1, 0, 0.0, 0.0, False, 3)
        assert entry.total == pytest.approx(7 * math.pi, abs=1e-12)

    def test_all_totals_are_nonnegative(self):
        for perm in (four_cycle, two_cycle, rest):
            assert all(t >= 0 for t in total_spectrum(eigenphases(perm)))

    def test_rows_are_csv_ready(self):
        rows = spectrum_rows(eigenphases(rest))
        assert len(rows) == 1
        assert rows[0][:3] == (0, 1, 0)


class TestCutoffCorrection:
    radii = [10**3, 10**4, 10**5, 10**6]

    def test_shift_tracks_the_inverse_radius_asymptote(self):
        rows = cutoff_correction_check(0.3, self.radii)
        assert [round(r.ratio, 9) for r in rows] == [
            0.992485022,
            0.992488689,
            0.992488725,
            0.992488726,
        ]

    def test_ratio_converges_to_the_fixed_angle_limit(self):
        rows = cutoff_correction_check(0.3, self.radii)
        limit = 0.3 / (2 * math.tan(0.15))
        gaps = [abs(r.ratio - limit) for r in rows]
        assert gaps == sorted(gaps, reverse=True)
        assert gaps[-1] < 1e-9

    def test_asymptote_is_two_over_radius_times_angle(self):
        (row,) = cutoff_correction_check(0.5, [2000])
        assert row.asymptote == pytest.approx(2 / (2000 * 0.5), abs=1e-18)
