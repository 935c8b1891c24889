import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from amoeba_scope.errors import GridMismatch, ValidationError
from amoeba_scope.voxels import (
    VoxelGrid,
    boundary_cells,
    complement_components,
    from_rle,
    grid_complement,
    grid_difference,
    grid_intersect,
    grid_union,
    load_grid,
    parse_window,
    save_grid,
    sidecar,
    to_rle,
)


def _grid(occ):
    occ = np.asarray(occ, dtype=bool)
    return VoxelGrid(np.zeros(occ.ndim), np.ones(occ.ndim), occ)


def test_parse_window():
    assert parse_window([-1, 1, -2, 2]).tolist() == [[-1, 1], [-2, 2]]
    assert parse_window([[0, 1]], 1).shape == (1, 2)
    for bad in ([0, 1, 2], [1, 0], [0, float("nan")]):
        with pytest.raises(ValidationError):
            parse_window(bad)
    with pytest.raises(ValidationError):
        parse_window([0, 1], 2)


def test_geometry():
    g = VoxelGrid.empty([0, 4, -1, 1], (4, 2))
    assert g.resolution == (4, 2)
    assert np.allclose(g.pitch, [1, 1])
    assert np.allclose(g.axis_centers(0), [0.5, 1.5, 2.5, 3.5])
    assert np.allclose(g.centers([[0, 0], [3, 1]]), [[0.5, -0.5], [3.5, 0.5]])
    idx, inside = g.cell_index([[0.2, 0.9], [4.0, 1.0], [5, 0]])
    assert idx[:2].tolist() == [[0, 1], [3, 1]]
    assert inside.tolist() == [True, True, False]


def test_mismatch():
    a = VoxelGrid.empty([0, 1, 0, 1], 4)
    with pytest.raises(GridMismatch):
        grid_union([a, VoxelGrid.empty([0, 1, 0, 1], 5)])
    with pytest.raises(GridMismatch):
        grid_intersect([a, VoxelGrid.empty([0, 2, 0, 1], 4)])


def test_components_and_boundary():
    occ = np.zeros((5, 5), bool)
    occ[2, :] = True
    g = _grid(occ)
    assert complement_components(g) == 2
    assert boundary_cells(g).sum() == 5
    full = _grid(np.ones((3, 3), bool))
    assert boundary_cells(full).sum() == 0  # the box edge is not a boundary


def test_rle_literal():
    g = _grid([[True, True, False], [False, True, True]])
    assert to_rle(g) == "0 2 2 2\n"
    assert from_rle("3 2 1\n", sidecar(g)).occupied.tolist() == [[False, False, False], [True, True, False]]
    with pytest.raises(ValidationError):
        from_rle("1 2\n", sidecar(g))


_occ = st.integers(1, 3).flatmap(
    lambda n: arrays(bool, st.tuples(*[st.integers(1, 6)] * n)))


@given(_occ)
def test_rle_roundtrip(occ):
    g = _grid(occ)
    assert from_rle(to_rle(g), sidecar(g)) == g


@given(arrays(bool, (4, 5)), arrays(bool, (4, 5)), arrays(bool, (4, 5)))
def test_set_algebra_laws(a, b, c):
    A, B, C = _grid(a), _grid(b), _grid(c)
    assert grid_union([A, B]) == grid_union([B, A])
    assert grid_intersect([A, grid_union([B, C])]) == grid_union([grid_intersect([A, B]), grid_intersect([A, C])])
    assert grid_complement(grid_union([A, B])) == grid_intersect([grid_complement(A), grid_complement(B)])
    assert grid_difference(A, B) == grid_intersect([A, grid_complement(B)])
    assert grid_intersect([A, B]).count() <= min(A.count(), B.count())


def test_save_load(tmp_path):
    g = _grid(np.eye(4, dtype=bool))
    rle, meta = save_grid(g, tmp_path / "g")
    assert rle.name == "g.rle" and meta.name == "g.json"
    assert load_grid(tmp_path / "g") == g
