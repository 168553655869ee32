import numpy as np
import pytest

from coprime_opa.farfield import DirectionGrid, PhaseMap, aperture_pattern
from coprime_opa.geometry import make_uniform_grid
from coprime_opa.io import (TableParseError, read_geometry, read_phase_map, write_geometry, write_history_csv,
                            write_pattern_csv, write_phase_map)


def test_geometry_roundtrip(tmp_path):
    g = make_uniform_grid(3, 2, 1.7)
    write_geometry(tmp_path / "g.txt", g)
    back = read_geometry(tmp_path / "g.txt")
    np.testing.assert_array_equal(back.positions, g.positions)


def test_geometry_bad_line(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# header\n0 0\n1 1 1\n")
    with pytest.raises(TableParseError, match=":3:") as info:
        read_geometry(path)
    assert info.value.line == 3


def test_geometry_spacing_enforced(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("0 0\n0.1 0\n")
    with pytest.raises(ValueError, match="apart"):
        read_geometry(path)


def test_phase_map_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    pm = PhaseMap(rng.uniform(0, 2 * np.pi, 12))
    write_phase_map(tmp_path / "p.txt", pm, (3, 4))
    np.testing.assert_array_equal(read_phase_map(tmp_path / "p.txt", (3, 4)), pm.as_grid((3, 4)))


@pytest.mark.parametrize("body, line", [
    ("0 0 1.0\n0 1 x\n", 2),
    ("0 0 1.0\n0 0 2.0\n", 2),
    ("0 0 1.0\n\n5 0 1.0\n", 3),
    ("0 0 1.0 4\n", 1),
    ("0 0 nan\n", 1),
])
def test_phase_map_errors_carry_line(tmp_path, body, line):
    path = tmp_path / "p.txt"
    path.write_text(body)
    with pytest.raises(TableParseError) as info:
        read_phase_map(path, (1, 2))
    assert info.value.line == line


def test_phase_map_missing_cell(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("0 0 1.0\n")
    with pytest.raises(TableParseError, match="missing"):
        read_phase_map(path, (1, 2))


def test_pattern_csv_visible_only(tmp_path):
    grid = DirectionGrid.uniform(21)
    p = aperture_pattern(make_uniform_grid(2, 2, 0.5), PhaseMap.zeros(4), grid)
    write_pattern_csv(tmp_path / "p.csv", p)
    data = np.loadtxt(tmp_path / "p.csv", delimiter=",", skiprows=1)
    assert len(data) == grid.visible.sum()
    assert np.all(data[:, 0] ** 2 + data[:, 1] ** 2 <= 1 + 1e-12)
    assert data[:, 2].max() == 0.0


def test_history_csv(tmp_path):
    write_history_csv(tmp_path / "h.csv", [1.0, 10.0, 100.0])
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines == ["sweep,objective_db", "0,0.0", "1,10.0", "2,20.0"]
