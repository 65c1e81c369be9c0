import numpy as np
import pytest

from b3rep import scanner as sc
from b3rep import spectra as sp


def test_cell_centres():
    assert np.allclose(sc.cell_centres(4), [0.125, 0.375, 0.625, 0.875])


def test_resolution_bounds():
    with pytest.raises(ValueError):
        sc.scan_raster(2, 8)
    with pytest.raises(ValueError):
        sc.scan_raster(4, 64)


def test_d2_black_count():
    r = sc.scan_raster(2, 1024)
    assert abs(r.counts()["black"] - 683) <= 2


def test_d3_worked_cell_black():
    res = 96
    r = sc.scan_raster(3, res)
    col = int(1 / 3 * res)
    row = int(2 / 3 * res)
    assert sc.cell_centres(res)[col] == pytest.approx(1 / 3, abs=1 / res)
    assert r.cells[row, col] == sc.CellClass.BLACK


def test_d3_diagonal_never_black():
    r = sc.scan_raster(3, 128)
    assert not np.any(np.diag(r.cells) == sc.CellClass.BLACK)
    t = sc.cell_centres(128)
    cls, _ = sc.classify_angles(np.stack([np.zeros(128), t, t], axis=-1))
    assert np.all(cls == sc.CellClass.EXCLUDED)


def test_classify_matches_scalar_verdict(rng):
    for d in (2, 3, 4, 5):
        branch = 0 if d >= 4 else None
        angles = np.concatenate([np.zeros((200, 1)), rng.random((200, d - 1))], axis=1)
        cls, _ = sc.classify_angles(angles, branch)
        for a, c in zip(angles, cls):
            s = sp.spectrum_from_angles(d, a, branch)
            assert sc._VERDICT_OF[sc.CellClass(c)] is sp.unitarizable(s)


def test_line_distance_on_lines():
    assert sc.line_distance(0.2, 0.3) == pytest.approx(0.0, abs=1e-15)     # t2 + t3 = 1/2
    assert sc.line_distance(0.1, 0.7) == pytest.approx(0.0, abs=1e-15)     # t3 = 2 t2 + 1/2
    assert sc.line_distance(0.9, 0.2) == pytest.approx(0.0, abs=1e-15)     # t2 = 2 t3 + 1/2 mod 1
    assert sc.line_distance(0.37, 0.37) == pytest.approx(0.0, abs=1e-15)
    assert sc.line_distance(0.0, 0.61) == pytest.approx(0.0, abs=1e-15)


def test_pgm_roundtrip():
    r = sc.scan_raster(3, 32)
    img = sc.read_pgm(r.to_pgm())
    expected = np.vectorize(sc.PGM_LEVELS.__getitem__)(r.cells)
    assert np.array_equal(img, expected)
    assert r.to_pgm().startswith(b"P2\n32 32\n255\n")


def test_samples_seeded():
    a = sc.scan_samples(4, 50, 1, seed=3)
    b = sc.scan_samples(4, 50, 1, seed=3, jobs=2)
    for x, y in zip(a, b):
        assert np.array_equal(x, y, equal_nan=True)
