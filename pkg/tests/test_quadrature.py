import numpy as np
import pytest

from ar2max.errors import GridTooLarge, InvalidInterval, UnsupportedKernelRegime
from ar2max.model import gaussian_innovation, logistic_innovation, validate_params
from ar2max.quadrature import Box, gauss_legendre_1d, integrate, tensor_grid, truncation_box


@pytest.mark.parametrize("m", [1, 2, 5, 16, 40, 80])
def test_nodes_match_numpy(m):
    t, w = gauss_legendre_1d(m)
    t_ref, w_ref = np.polynomial.legendre.leggauss(m)
    assert np.allclose(t, t_ref, atol=1e-14) and np.allclose(w, w_ref, atol=1e-14)


@pytest.mark.parametrize("m", [3, 7, 12])
def test_polynomial_exactness(m):
    t, w = gauss_legendre_1d(m, -0.3, 2.1)
    for deg in range(2 * m):
        exact = (2.1 ** (deg + 1) - (-0.3) ** (deg + 1)) / (deg + 1)
        assert w @ t ** deg == pytest.approx(exact, rel=1e-12, abs=1e-12)
    deg = 2 * m
    exact = (2.1 ** (deg + 1) - (-0.3) ** (deg + 1)) / (deg + 1)
    assert abs(w @ t ** deg - exact) > 1e-12


def test_bad_intervals():
    with pytest.raises(InvalidInterval):
        gauss_legendre_1d(4, 1.0, 1.0)
    with pytest.raises(InvalidInterval):
        gauss_legendre_1d(0)
    with pytest.raises(InvalidInterval):
        gauss_legendre_1d(4, 0.0, np.inf)


def test_tensor_grid_integrates_gaussian_mass():
    box = Box(-8.0, 8.0, -8.0, 8.0, 0.5)
    grid = tensor_grid(40, box)
    val = integrate(grid, lambda a, b: np.exp(-(a * a + b * b) / 2) / (2 * np.pi))
    assert val == pytest.approx(1.0, abs=1e-12)
    assert grid.weights.sum() == pytest.approx(box.area, rel=1e-13)


def test_refinement_converges():
    box = Box(0.0, 3.0, -1.0, 2.0)
    f = lambda a, b: np.sin(3 * a) * np.exp(b) / (1 + a * a)
    vals = [integrate(tensor_grid(m, box), f) for m in (4, 8, 16, 32)]
    errs = np.abs(np.diff(vals))
    assert errs[-1] < 1e-9 and errs[-1] < errs[0]


def test_grid_cap():
    with pytest.raises(GridTooLarge):
        tensor_grid(101, Box(0, 1, 0, 1))
    assert tensor_grid(40, Box(0, 1, 0, 1)).size == 1600


def test_split_puts_breakpoint_between_panels():
    grid = tensor_grid(10, Box(-2.0, 4.0, -2.0, 6.0, 1.0))
    nodes0 = grid.axis0[0]
    assert (nodes0 < 1.0).sum() == 5 and (nodes0 > 1.0).sum() == 5


def test_truncation_box_reference():
    p = validate_params(0.5, 0.3)
    box = truncation_box(gaussian_innovation(1.0), p, 3.0)
    assert box.lo0 == pytest.approx(-8.406, abs=1e-3)
    assert box.hi0 == pytest.approx(22.27, abs=1e-2)
    assert box.hi1 == pytest.approx(42.72, abs=1e-2)
    assert box.split == 3.0


def test_logistic_box_is_wider():
    p = validate_params(0.5, 0.3)
    g = truncation_box(gaussian_innovation(1.0), p, 3.0)
    lg = truncation_box(logistic_innovation(np.sqrt(3) / np.pi), p, 3.0)
    assert lg.lo0 < g.lo0 and lg.hi1 > g.hi1


def test_negative_r2_unsupported():
    with pytest.raises(UnsupportedKernelRegime):
        truncation_box(gaussian_innovation(1.0), validate_params(0.5, -0.2), 3.0)
