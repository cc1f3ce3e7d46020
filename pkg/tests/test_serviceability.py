import inspect
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from servrisk.distributions import DistributionSpec, Family, cdf
from servrisk.serviceability import (
    AssessedLoan,
    Direction,
    GridCellError,
    RepaymentSnapshot,
    ServiceabilityCase,
    UnresolvableBaseError,
    default_probability,
    in_default,
    nsr,
    rcr,
    risk_weight,
    risk_weight_grid,
    standard_axes,
    threshold_risk_weight,
)

# Frozen from the mpmath oracle.
PD_F09_N2_S03 = 0.033376507584817244
ABOVE_RATIO = 0.31731050786291410


def case(f, n, s, base=1.0):
    return ServiceabilityCase(f, n, DistributionSpec.normal(s), base_nsr=base)


def absolute_risk_weight(f, n, s, income):
    """Risk weight computed from absolute incomes, for the scale-invariance check."""
    repayment_at = lambda ratio: f * income / ratio  # noqa: E731
    num = oracles.absolute_cdf(repayment_at(n), s * income, income)
    den = oracles.absolute_cdf(repayment_at(1.0), s * income, income)
    return num / den


class TestRatios:
    @pytest.mark.parametrize("income, expected", [(330, 1.1), (300, 1.0), (270, 0.9)])
    def test_nsr(self, income, expected):
        assert nsr(AssessedLoan(400, income, 300)) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("income, expected, default", [(100, 1.0, False), (99, 0.99, True), (150, 1.5, False)])
    def test_rcr(self, income, expected, default):
        snap = RepaymentSnapshot(income, 100)
        assert rcr(snap) == expected
        assert in_default(snap) is default

    def test_loan_invariants(self):
        with pytest.raises(ValueError):
            AssessedLoan(100, 110, 50)
        with pytest.raises(ValueError):
            AssessedLoan(100, 90, 0)
        assert AssessedLoan(100, 90, 50).stress_factor == pytest.approx(0.9)

    def test_snapshot_invariants(self):
        with pytest.raises(ValueError):
            RepaymentSnapshot(-1, 100)


class TestCase:
    @pytest.mark.parametrize("f", [0.0, 1.01, -0.5, math.nan])
    def test_bad_stress(self, f):
        with pytest.raises(ValueError):
            case(f, 1.0, 0.1)

    def test_bad_nsr(self):
        with pytest.raises(ValueError):
            case(0.9, 0.0, 0.1)
        with pytest.raises(ValueError):
            case(0.9, 1.0, 0.1, base=-1)

    def test_horizon_is_only_a_label(self):
        a = ServiceabilityCase(0.9, 1.1, DistributionSpec.normal(0.3), horizon="3 years")
        b = ServiceabilityCase(0.9, 1.1, DistributionSpec.normal(0.3))
        assert a == b
        assert risk_weight(a) == risk_weight(b)


class TestDefaultProbability:
    def test_threshold_at_mean(self):
        assert default_probability(case(0.9, 0.9, 0.10)) == 0.5

    def test_one_sd(self):
        assert default_probability(case(0.9, 1.0, 0.10)) == pytest.approx(0.158655, abs=1e-6)

    def test_wide(self):
        assert PD_F09_N2_S03 == pytest.approx(oracles.relative_cdf(0.45, 0.3), abs=1e-16)
        assert default_probability(case(0.9, 2.0, 0.30)) == pytest.approx(0.033377, abs=1e-5)
        assert default_probability(case(0.9, 2.0, 0.30)) == pytest.approx(PD_F09_N2_S03, abs=1e-13)

    def test_equals_cdf(self):
        c = case(0.85, 1.3, 0.22)
        assert default_probability(c) == cdf(c.distribution, 0.85 / 1.3)

    def test_vanishing_nsr(self):
        assert default_probability(case(0.9, 1e-320, 0.1)) == 1.0


class TestRiskWeight:
    @pytest.mark.parametrize("s", [0.05, 0.1, 0.3, 1.0])
    def test_base(self, s):
        assert risk_weight(case(0.9, 1.0, s)) == 1.0

    @pytest.mark.parametrize(
        "n, s, printed",
        [(1.1, 0.30, 0.74), (0.2, 0.10, 6.30), (1.5, 0.20, 0.07)],
    )
    def test_published_cells(self, n, s, printed):
        value = risk_weight(case(0.9, n, s))
        assert abs(value - printed) <= 0.005
        assert value == pytest.approx(oracles.risk_weight(0.9, n, s), rel=1e-12)

    def test_unresolvable_base(self):
        with pytest.raises(UnresolvableBaseError):
            risk_weight(case(0.5, 1.2, 0.05))

    def test_underflow_is_exact_zero(self):
        assert risk_weight(case(0.9, 5.0, 0.1)) == 0.0

    def test_plateau(self):
        plateau = 1 / cdf(DistributionSpec.normal(0.1), 0.9)
        for n in (1e-9, 0.05, 0.2, 0.3, 0.4):
            assert abs(risk_weight(case(0.9, n, 0.1)) - plateau) < 1e-9

    @given(st.floats(0.5, 1.0), st.floats(0.2, 3.0), st.floats(0.05, 0.6), st.floats(0.5, 1.5))
    def test_against_oracle(self, f, n, s, base):
        c = case(f, n, s, base)
        try:
            value = risk_weight(c)
        except UnresolvableBaseError:
            assert (f / base - 1) / s <= -8
            return
        expected = oracles.risk_weight(f, n, s, base)
        if (f / n - 1) / s <= -8:
            assert value == 0.0
        elif (f / n - 1) / s >= 8:
            assert value == pytest.approx(1 / oracles.relative_cdf(f / base, s), rel=1e-12)
        else:
            assert value == pytest.approx(expected, rel=1e-11)

    @given(st.floats(0.5, 1.0), st.floats(0.05, 0.6), st.floats(0.5, 1.5))
    def test_base_normalisation(self, f, s, base):
        try:
            assert risk_weight(case(f, base, s, base)) == 1.0
        except UnresolvableBaseError:
            pass

    @pytest.mark.parametrize("s", [0.1, 0.15, 0.2, 0.3, 0.4])
    def test_monotone_in_nsr(self, s):
        values = [risk_weight(case(0.9, n, s)) for n in np.arange(0.05, 4.0, 0.01)]
        assert all(b <= a for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("income", [1.0, 1000.0, 7.3e6])
    def test_scale_invariance(self, income):
        rng = np.random.default_rng(3)
        for f, n, s in zip(rng.uniform(0.6, 1, 50), rng.uniform(0.3, 2.5, 50), rng.uniform(0.05, 0.5, 50)):
            assert absolute_risk_weight(f, n, s, income) == pytest.approx(risk_weight(case(f, n, s)), abs=1e-12)

    def test_depends_only_on_distribution_and_ratios(self):
        fields = set(inspect.signature(ServiceabilityCase).parameters)
        assert fields == {"stress_factor", "nsr", "distribution", "base_nsr", "horizon"}

    def test_skew_shifts_weight(self):
        sym = risk_weight(ServiceabilityCase(0.9, 1.1, DistributionSpec.normal(0.2)))
        neg = risk_weight(ServiceabilityCase(0.9, 1.1, DistributionSpec.skew_normal(0.2, -4)))
        assert neg != pytest.approx(sym, abs=1e-3)


class TestThreshold:
    def test_reduces_to_risk_weight(self):
        value = threshold_risk_weight(DistributionSpec.normal(0.3), 0.9 / 1.1, 0.9, Direction.BELOW_TRIGGERS)
        assert abs(value - 0.74) <= 0.005

    @pytest.mark.parametrize("direction", list(Direction))
    def test_same_trigger(self, direction):
        assert threshold_risk_weight(DistributionSpec.skew_normal(0.2, 2), 1.05, 1.05, direction) == 1.0

    def test_above(self):
        assert ABOVE_RATIO == pytest.approx(oracles.normal_cdf(-1) / oracles.normal_cdf(0), abs=1e-16)
        value = threshold_risk_weight(DistributionSpec.normal(0.2), 1.2, 1.0, Direction.ABOVE_TRIGGERS)
        assert value == pytest.approx(0.317310, abs=1e-5)
        assert value == pytest.approx(ABOVE_RATIO, abs=1e-13)

    def test_direction_from_string(self):
        assert threshold_risk_weight(DistributionSpec.normal(0.2), 1.2, 1.0, "above") == pytest.approx(ABOVE_RATIO)

    def test_unresolvable(self):
        with pytest.raises(UnresolvableBaseError):
            threshold_risk_weight(DistributionSpec.normal(0.1), 1.0, 2.0, Direction.ABOVE_TRIGGERS)

    def test_reduction_random_grid(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            f, n, s, base = rng.uniform(0.6, 1), rng.uniform(0.2, 3), rng.uniform(0.05, 0.5), rng.uniform(0.8, 1.2)
            spec = DistributionSpec.normal(s)
            try:
                expected = risk_weight(ServiceabilityCase(f, n, spec, base_nsr=base))
            except UnresolvableBaseError:
                continue
            got = threshold_risk_weight(spec, f / n, f / base, Direction.BELOW_TRIGGERS)
            assert got == pytest.approx(expected, abs=1e-12)


class TestGrid:
    def test_published_table(self):
        printed = oracles.printed_weights()
        nsr_axis, sd_axis = standard_axes()
        grid = risk_weight_grid(0.9, nsr_axis, sd_axis, Family.NORMAL)
        assert len(grid.values) == 19 and all(len(r) == 7 for r in grid.values)
        for i, n in enumerate(nsr_axis):
            for j, s in enumerate(sd_axis):
                assert abs(grid.values[i][j] - printed[(n, s)]) <= 0.005, (n, s)

    def test_single_cell(self):
        assert risk_weight_grid(0.9, [1.0], [0.25]).values == ((1.0,),)

    def test_plateau_rows(self):
        grid = risk_weight_grid(0.9, [0.2, 0.3, 0.4], [0.10])
        assert all(abs(row[0] - 6.30) <= 0.005 for row in grid.values)
        assert len({row[0] for row in grid.values}) == 1

    def test_base_row_and_columns(self):
        grid = risk_weight_grid(0.8, np.arange(0.5, 2.01, 0.25), [0.1, 0.2, 0.35], base_nsr=1.0)
        assert grid.values[2] == (1.0, 1.0, 1.0)
        for j in range(3):
            column = [row[j] for row in grid.values]
            assert all(b <= a for a, b in zip(column, column[1:]))

    def test_cell_lookup(self):
        nsr_axis, sd_axis = standard_axes()
        grid = risk_weight_grid(0.9, nsr_axis, sd_axis)
        assert grid.cell(1.1, 0.3) == risk_weight(case(0.9, 1.1, 0.3))

    @pytest.mark.parametrize(
        "nsr_axis, sd_axis",
        [([], [0.1]), ([1.0], []), ([1.0, 0.9], [0.1]), ([1.0], [0.1, 0.1]), ([0.0, 1.0], [0.1]), ([1.0], [-0.1])],
    )
    def test_bad_axes(self, nsr_axis, sd_axis):
        with pytest.raises(ValueError):
            risk_weight_grid(0.9, nsr_axis, sd_axis)

    def test_error_carries_coordinates(self):
        with pytest.raises(GridCellError) as info:
            risk_weight_grid(0.5, [1.0, 1.5], [0.05, 0.3])
        assert info.value.nsr == 1.0 and info.value.relative_sd == 0.05
        assert isinstance(info.value.cause, UnresolvableBaseError)

    def test_skew_family(self):
        grid = risk_weight_grid(0.9, [0.8, 1.0, 1.2], [0.2], Family.SKEW_NORMAL, skew=-2.0)
        assert grid.values[1] == (1.0,)
        assert grid.values[0][0] > 1 > grid.values[2][0]
