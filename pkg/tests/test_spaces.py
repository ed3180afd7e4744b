from fractions import Fraction

import numpy as np
import pytest

from dynlab.errors import PointOutsideDomain
from dynlab.spaces import Box, Circle, Interval, StateSpace, annulus, torus, unit_interval_space


def test_dim_matches_factors():
    sp = StateSpace((Interval(0, 1), Circle(1.0), Interval(-1, 1)))
    assert sp.dim == 3


def test_invalid_factors_rejected():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)
    with pytest.raises(ValueError):
        Circle(0.0)


def test_circle_wraparound_distance():
    sp = StateSpace((Circle(1.0),))
    assert sp.distance([0.05], [0.95]) == pytest.approx(0.1)
    assert sp.distance([0.0], [0.5]) == pytest.approx(0.5)


def test_distance_symmetry_and_triangle_exact_on_rationals():
    # max metric: both properties hold exactly, including across the seam
    sp = StateSpace((Interval(0, 1), Circle(1.0)))
    triples = [
        ([Fraction(1, 4), Fraction(1, 8)], [Fraction(3, 4), Fraction(7, 8)], [Fraction(1, 2), Fraction(1, 2)]),
        ([Fraction(0), Fraction(0)], [Fraction(1), Fraction(1, 2)], [Fraction(1, 2), Fraction(3, 4)]),
        ([Fraction(1, 3), Fraction(2, 3)], [Fraction(2, 3), Fraction(1, 3)], [Fraction(1, 6), Fraction(5, 6)]),
    ]
    for x, y, z in triples:
        x, y, z = (np.array([float(v) for v in p]) for p in (x, y, z))
        assert sp.distance(x, y) == sp.distance(y, x)
        assert sp.distance(x, z) <= sp.distance(x, y) + sp.distance(y, z) + 1e-15


def test_canonicalize_and_domain_check():
    sp = annulus()
    p = sp.canonicalize(np.array([0.5, 1.4]))
    assert p[1] == pytest.approx(0.4)
    with pytest.raises(PointOutsideDomain):
        sp.check_inside(np.array([1.5, 0.2]))


def test_cell_index_wraps_on_circles():
    sp = torus(1)
    eps = 1 / 8
    assert sp.cell_index(np.array([0.999]), eps)[0] == 7
    assert sp.cell_index(np.array([1.001]), eps)[0] == 0
    assert sp.total_cells(eps) == 8


def test_box_grid_and_cells_cover():
    sp = unit_interval_space(2)
    box = Box(sp, [0.0, 0.0], [1.0, 0.5])
    cells = box.cells(0.25)
    assert len(cells) == 4 * 2
    centers = box.grid(0.25)
    assert len(centers) == 8
    for c in centers:
        assert box.contains(c)


def test_ball_is_box_in_max_metric():
    sp = unit_interval_space(2)
    b = Box.ball(sp, [0.5, 0.5], 0.25)
    assert b.contains([0.7, 0.3])
    assert not b.contains([0.8, 0.5])
    assert b.radius == pytest.approx(0.25)
    assert b.clearance([0.5, 0.5]) == pytest.approx(0.25)
