import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adimaxwell.grid import (
    COMPONENTS,
    FieldState,
    GridError,
    make_grid,
    random_state,
    staggered_location,
    state_from_functions,
    zero_state,
)


def test_spacing_unit_cube_two_cells():
    g = make_grid((2, 2, 2))
    assert g.h == (0.5, 0.5, 0.5)


def test_spacing_reference_resolution():
    g = make_grid((150, 150, 75))
    assert g.h == (1 / 150, 1 / 150, 1 / 75)


@pytest.mark.parametrize(
    "n, extent",
    [((2, 2, 0), (1, 1, 1)), ((1, 4, 4), (1, 1, 1)), ((4, 4, 4), (1, 0, 1)), ((4, 4, 4), (1, 1, -2))],
)
def test_make_grid_rejects_bad_input(n, extent):
    with pytest.raises(GridError):
        make_grid(n, extent=extent)


def test_make_grid_rejects_wrong_arity():
    with pytest.raises(GridError):
        make_grid((4, 4))


@pytest.mark.parametrize(
    "component, index, expected",
    [
        ("e1", (0, 0, 0), (0.25, 0.0, 0.0)),
        ("h1", (0, 0, 0), (0.0, 0.25, 0.25)),
        ("e3", (1, 1, 0), (0.5, 0.5, 0.25)),
        ("e2", (2, 1, 2), (1.0, 0.75, 1.0)),
        ("h3", (1, 1, 2), (0.75, 0.75, 1.0)),
    ],
)
def test_staggered_location(component, index, expected):
    g = make_grid((2, 2, 2))
    assert staggered_location(g, component, index) == pytest.approx(expected, abs=0)


@pytest.mark.parametrize("index", [(2, 0, 0), (0, 3, 0), (-1, 0, 0)])
def test_staggered_location_out_of_range(index):
    g = make_grid((2, 2, 2))
    with pytest.raises(GridError):
        staggered_location(g, "e1", index)


def test_shape_table():
    g = make_grid((3, 4, 5))
    assert g.shape("e1") == (3, 5, 6)
    assert g.shape("e2") == (4, 4, 6)
    assert g.shape("e3") == (4, 5, 5)
    assert g.shape("h1") == (4, 4, 5)
    assert g.shape("h2") == (3, 5, 5)
    assert g.shape("h3") == (3, 4, 6)


@settings(max_examples=25, deadline=None)
@given(
    n=st.tuples(*(st.integers(2, 6),) * 3),
    comp=st.sampled_from(COMPONENTS),
    data=st.data(),
)
def test_mesh_agrees_with_staggered_location(n, comp, data):
    g = make_grid(n, origin=(-1.0, 0.5, 2.0), extent=(2.0, 1.0, 3.0))
    shape = g.shape(comp)
    idx = tuple(data.draw(st.integers(0, s - 1)) for s in shape)
    x, y, z = g.mesh(comp)
    point = (x[idx[0], 0, 0], y[0, idx[1], 0], z[0, 0, idx[2]])
    assert staggered_location(g, comp, idx) == pytest.approx(point, rel=1e-15, abs=1e-15)


def test_staggered_points_inside_closed_domain():
    g = make_grid((3, 4, 5), extent=(1.0, 2.0, 0.5))
    for c in COMPONENTS:
        for axis, coords in enumerate(g.coordinates(c)):
            assert coords.min() >= g.origin[axis]
            assert coords.max() <= g.upper[axis] + 1e-15


def test_pec_mask_marks_tangential_e_only():
    g = make_grid((3, 3, 3))
    m = g.pec_mask("e1")
    # E1 is tangential on the x2 and x3 faces, never on the x1 faces
    assert m[:, 0, :].all() and m[:, -1, :].all() and m[:, :, 0].all() and m[:, :, -1].all()
    assert not m[:, 1:-1, 1:-1].any()
    assert not g.pec_mask("h2").any()


def test_zero_state_is_zero(grid8):
    s = zero_state(grid8)
    assert s.time == 0.0
    assert all(not arr.any() for _, arr in s.items())


def test_random_state_respects_pec(grid8, rng):
    s = random_state(grid8, rng)
    for c in ("e1", "e2", "e3"):
        assert not s[c][grid8.pec_mask(c)].any()


def test_flat_round_trip(grid8, rng):
    s = random_state(grid8, rng)
    back = FieldState.from_flat(grid8, s.flat())
    assert all(np.array_equal(back[c], s[c]) for c in COMPONENTS)
    assert s.flat().size == grid8.dof_count()


def test_shape_mismatch_rejected(grid8):
    arrays = [np.zeros(grid8.shape(c)) for c in COMPONENTS]
    arrays[0] = np.zeros((2, 2, 2))
    with pytest.raises(GridError):
        FieldState(grid8, *arrays)


def test_state_from_functions_pins_boundary(grid8):
    s = state_from_functions(grid8, {"e1": lambda x, y, z: 1.0 + 0 * x})
    assert s.e1[:, 0, :].max() == 0.0
    assert s.e1[:, 1:-1, 1:-1].min() == 1.0


def test_linear_combination(grid8, rng):
    a, b = random_state(grid8, rng), random_state(grid8, rng)
    c = a.linear_combination(2.0, b, -3.0)
    assert np.allclose(c.h2, 2.0 * a.h2 - 3.0 * b.h2, rtol=0, atol=0)
