"""Tests for exact PL homeomorphisms."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linewalk.homeo import (
    FixedSet,
    Interval,
    LiftedPLHomeo,
    PLHomeo,
    common_fixed_point,
    compose,
    evaluate,
    fixed_points,
    homeo_from_record,
    integral,
    invert,
    phi,
    phi_increment_residual,
)
from linewalk.presets import rotation_lift

slopes = st.fractions(min_value=Fraction(1, 4), max_value=4).filter(lambda s: s > 0)
points = st.fractions(min_value=-20, max_value=20, max_denominator=8)


@st.composite
def pl_maps(draw):
    """Random PL homeomorphisms with rational data."""
    bps = sorted(set(draw(st.lists(points, min_size=0, max_size=5))))
    pieces = draw(st.lists(slopes, min_size=len(bps) + 1, max_size=len(bps) + 1))
    anchor = draw(points)
    return PLHomeo(tuple(bps), tuple(pieces), anchor)


class TestPLHomeo:
    """Construction and evaluation."""

    def test_canonical_merge(self):
        """Equal adjacent slopes are merged, so equal maps have equal records."""
        g = PLHomeo((0, 1), (2, 2, 2), 0)
        assert g == PLHomeo.affine(2)
        assert g.is_affine

    def test_evaluate(self):
        """Breakpoint images and tails follow the slopes."""
        g = PLHomeo((0, 1), (1, 2, 1), 0)
        assert g(Fraction(1, 2)) == 1
        assert g(1) == 2
        assert g(3) == 4
        assert g(-2) == -2

    def test_rational_input_stays_exact(self):
        """Fractions in, Fractions out."""
        assert isinstance(PLHomeo.affine(Fraction(1, 3), 1)(Fraction(1, 7)), Fraction)

    def test_float_constant(self):
        """Irrational constants propagate as floats."""
        g = PLHomeo.translation(2**0.5)
        assert isinstance(g(0), float)

    def test_rejects_nonpositive_slope(self):
        """Slopes must be strictly positive."""
        with pytest.raises(ValueError):
            PLHomeo((0,), (1, 0), 0)

    def test_rejects_unsorted_breakpoints(self):
        with pytest.raises(ValueError):
            PLHomeo((1, 0), (1, 2, 1), 0)

    def test_from_points(self):
        """Interpolated nodes reproduce their values."""
        g = PLHomeo.from_points([0, 1, 3], [0, 2, 3], 1, 1)
        assert [g(x) for x in (0, 1, 3)] == [0, 2, 3]
        assert g(2) == Fraction(5, 2)

    def test_max_slope_on(self):
        """Only pieces meeting the interval count; touching a breakpoint does not."""
        g = PLHomeo((0, 1), (1, 3, 2), 0)
        assert g.max_slope() == 3
        assert g.max_slope_on(-2, -1) == 1
        assert g.max_slope_on(-1, 0) == 1
        assert g.max_slope_on(0.25, 0.75) == 3
        assert g.max_slope_on(1, 4) == 2
        assert g.max_slope_on(-1, 5) == 3
        with pytest.raises(ValueError):
            g.max_slope_on(2, 1)

    def test_record_roundtrip(self):
        """``to_record`` output parses back to an equal map."""
        g = PLHomeo((0, 1), (1, 2, 1), 0)
        assert homeo_from_record(g.to_record()) == g
        assert homeo_from_record(PLHomeo.affine(3, 1).to_record()) == PLHomeo.affine(3, 1)

    def test_unknown_record(self):
        with pytest.raises(ValueError):
            homeo_from_record({"spline": [1, 2]})

    def test_float_evaluator_matches(self):
        """Array and scalar float paths agree with exact evaluation."""
        g = PLHomeo((0, 1), (1, 2, 1), 0)
        ev = g.evaluator()
        xs = np.array([-3.0, 0.25, 0.75, 5.0])
        expected = [float(g(Fraction(x))) for x in xs.tolist()]
        np.testing.assert_allclose(ev(xs), expected)
        assert [ev.scalar(x) for x in xs.tolist()] == ev(xs).tolist()


class TestGroupOperations:
    """compose, invert and fixed points."""

    @settings(max_examples=50, deadline=None)
    @given(pl_maps())
    def test_inverse_composes_to_identity(self, g):
        """``g o g^-1`` is exactly the identity."""
        assert compose(g, invert(g)).is_identity
        assert compose(invert(g), g).is_identity

    @settings(max_examples=50, deadline=None)
    @given(pl_maps(), pl_maps(), points)
    def test_compose_evaluates(self, g, h, x):
        """``(g o h)(x) = g(h(x))``."""
        assert evaluate(compose(g, h), x) == g(h(x))

    def test_fixed_points_of_dilation(self):
        """2x fixes only 0."""
        fs = fixed_points(PLHomeo.affine(2))
        assert fs.components == (Interval(Fraction(0), Fraction(0)),)

    def test_translation_has_no_fixed_point(self):
        assert fixed_points(PLHomeo.translation(1)).is_empty

    def test_fixed_interval(self):
        """A map equal to the identity on [0, 1] fixes that interval."""
        g = PLHomeo((0, 1), (2, 1, 2), 0)
        assert fixed_points(g).components == (Interval(Fraction(0), Fraction(1)),)

    def test_common_fixed_point(self):
        """2x and x/2 share 0; adding x+1 removes it."""
        sets = [fixed_points(PLHomeo.affine(2)), fixed_points(PLHomeo.affine(Fraction(1, 2)))]
        assert common_fixed_point(sets) == 0
        assert common_fixed_point(sets + [fixed_points(PLHomeo.translation(1))]) is None

    def test_mixed_periods_rejected(self):
        with pytest.raises(ValueError):
            common_fixed_point(
                [
                    FixedSet((Interval(0, 0),), period=Fraction(1)),
                    FixedSet((Interval(0, 0),), period=Fraction(2)),
                ]
            )


class TestLifts:
    """Periodic PL lifts."""

    def test_commutes_with_period(self):
        """``l(x + 1) = l(x) + 1``, also as maps."""
        ell = rotation_lift()
        t = PLHomeo.translation(1)
        assert ell(Fraction(13, 8)) == ell(Fraction(5, 8)) + 1
        assert compose(ell, t) == compose(t, ell)

    def test_fixed_set(self):
        """The rotation lift fixes 0 and 1/2 in every period."""
        fs = fixed_points(rotation_lift())
        assert fs.contains(0)
        assert fs.contains(Fraction(5, 2))
        assert not fs.contains(Fraction(1, 4))

    def test_inverse(self):
        ell = rotation_lift()
        assert compose(ell, ell.inverse()).is_identity

    def test_translation_nodes_collapse(self):
        """Nodes of a translation give back a PLHomeo."""
        g = LiftedPLHomeo.from_nodes([0, Fraction(1, 2)], [1, Fraction(3, 2)])
        assert g == PLHomeo.translation(1)

    def test_lift_cannot_compose_with_dilation(self):
        with pytest.raises(ValueError):
            compose(rotation_lift(), PLHomeo.affine(2))


class TestPhi:
    """Displacement areas."""

    def test_translation(self):
        """A unit translation sweeps a triangle of area 1/2 past any point."""
        assert phi(PLHomeo.translation(1), 0) == Fraction(1, 2)
        assert phi(PLHomeo.translation(1), 7) == Fraction(1, 2)

    def test_dilation(self):
        assert phi(PLHomeo.affine(2), 1) == Fraction(1, 4)

    def test_symmetric(self):
        g = PLHomeo((0, 1), (1, 2, 1), 0)
        assert phi(g, Fraction(1, 2)) == phi(g.inverse(), Fraction(1, 2))

    def test_integral(self):
        assert integral(PLHomeo.identity(), 0, 2) == 2
        assert integral(PLHomeo.identity(), 2, 0) == -2

    @settings(max_examples=30, deadline=None)
    @given(pl_maps(), points, points)
    def test_increment_identity(self, g, a, b):
        """The drift area between a and b equals the change in Phi."""
        if a == b:
            return
        a, b = min(a, b), max(a, b)
        assert phi_increment_residual(g, a, b) == 0

    def test_increment_needs_order(self):
        with pytest.raises(ValueError):
            phi_increment_residual(PLHomeo.identity(), 1, 0)
