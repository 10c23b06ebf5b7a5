"""Tests for the Poisson transform, spherical functions and the c-function."""

import numpy as np
import pytest
from scipy.special import hyp2f1

from poisson_bv import api
from poisson_bv.engines import geometry, transforms
from poisson_bv.models.boundary import BoundaryFunction
from poisson_bv.models.roots import ModelId
from poisson_bv.models.space import BoundaryPoint, CornerCoordinates, SpacePoint
from poisson_bv.parsers.values import ValueParser
from poisson_bv.utils.errors import ChamberError, QuadratureError, UnsupportedModelError


def h2_spherical(lam: float, t: float) -> float:
    """Legendre function P_{-1/2 + lambda}(cosh r) with r = -log t."""
    r = -np.log(t)
    return hyp2f1(0.5 - lam, 0.5 + lam, 1.0, -np.sinh(r / 2) ** 2)


def disk_laplacian(u, coords: np.ndarray, j: int, h: float = 1e-2) -> complex:
    """Five-point hyperbolic Laplacian ((1 - |w|^2)^2 / 4)(d_x^2 + d_y^2) in disk factor j."""
    center = coords[j]
    total = -4 * u(coords)
    for step in (h, -h, 1j * h, -1j * h):
        moved = coords.copy()
        moved[j] = center + step
        total += u(moved)
    return (1 - abs(center) ** 2) ** 2 / 4 * total / h**2


class TestSphericalFunction:
    """Tests for phi_lambda = P_lambda 1."""

    @pytest.mark.parametrize("lam", [0.7, 1.3, 0.25])
    @pytest.mark.parametrize("t", [0.9, 0.3, 0.05])
    def test_h2_matches_legendre(self, lam, t):
        """Test the hyperbolic plane against the hypergeometric closed form."""
        value = api.spherical("h2", [lam], [t])
        assert value == pytest.approx(h2_spherical(lam, t), rel=1e-10)

    def test_h3_closed_form(self):
        """Test hyperbolic 3-space against sinh(lambda r) / (lambda sinh r)."""
        lam, t = 0.6, 0.2
        r = -np.log(t)
        value = api.spherical("h3", [lam], [t], enable_h3=True)
        assert value == pytest.approx(np.sinh(lam * r) / (lam * np.sinh(r)), rel=1e-9)

    def test_product_factorizes(self):
        """Test that phi on the product is the product of the factors."""
        value = api.spherical("h2xh2", [0.7, 1.1], [0.3, 0.6])
        assert value == pytest.approx(h2_spherical(0.7, 0.3) * h2_spherical(1.1, 0.6), rel=1e-10)

    def test_value_at_origin(self):
        """Test phi_lambda(o) = 1."""
        model = api.get_model("h2")
        assert transforms.spherical_function(model, 0.4 + 0.2j, geometry.origin(model)) == (
            pytest.approx(1.0)
        )

    @pytest.mark.parametrize("lam", [0.7, 1.3, 0.4 + 0.2j])
    @pytest.mark.parametrize("w", [0.3, 0.5 + 0.4j, -0.8j])
    def test_even_in_lambda(self, lam, w):
        """Test phi_lambda = phi_{-lambda} although the kernels differ."""
        model = api.get_model("h2")
        x = SpacePoint(ModelId.H2, np.array([w]))
        assert transforms.spherical_function(model, -lam, x) == pytest.approx(
            transforms.spherical_function(model, lam, x), rel=1e-10
        )

    def test_even_in_lambda_product(self):
        """Test that flipping either factor of lambda leaves phi unchanged."""
        model = api.get_model("h2xh2")
        x = SpacePoint(ModelId.H2XH2, np.array([0.3 + 0.1j, -0.6]))
        value = transforms.spherical_function(model, [0.7, 1.1], x)
        for lam in ([-0.7, 1.1], [0.7, -1.1], [-0.7, -1.1]):
            assert transforms.spherical_function(model, lam, x) == pytest.approx(value, rel=1e-10)


class TestPoissonTransform:
    """Tests for P_lambda on band-limited data."""

    def test_kernel_at_origin(self):
        """Test that the kernel is 1 at the origin."""
        model = api.get_model("h2xh2")
        b = BoundaryPoint(ModelId.H2XH2, np.array([1.0, 2.0]))
        assert transforms.poisson_kernel(model, [0.7, 1.1], geometry.origin(model), b) == pytest.approx(1.0)

    def test_equivariance(self):
        """Test P_lambda(pi_lambda(g) f) = P_lambda f o g^-1."""
        model = api.get_model("h2")
        lam = 0.7
        f = BoundaryFunction(ModelId.H2, fourier=np.array([0.25j, 0.5, 1.0, 0.5, -0.25j]))
        rng = np.random.default_rng(11)
        x = geometry.from_corner(
            model, CornerCoordinates(b=BoundaryPoint(ModelId.H2, np.array([0.4])), t=[0.5])
        )
        for _ in range(10):
            g = geometry.random_group_element(model, rng)
            moved = transforms.principal_series_action(model, lam, g, f)
            lhs = transforms.poisson_transform(model, lam, moved, x)
            rhs = transforms.poisson_transform(
                model, lam, f, geometry.group_action(model, g.inverse(), x)
            )
            assert lhs == pytest.approx(rhs, abs=1e-8)

    @pytest.mark.parametrize("lam", [0.7, 0.4 + 0.2j])
    def test_eigenfunction_h2(self, lam):
        """Test Delta P_lambda f = (lambda^2 - 1/4) P_lambda f by finite differences."""
        model = api.get_model("h2")
        f = ValueParser().parse_boundary_function("cos(1)+0.5*sin(2)", "h2")
        evaluator = transforms.PoissonEvaluator(model, lam, f)

        def u(coords):
            return evaluator(SpacePoint(ModelId.H2, coords))

        coords = np.array([0.3 + 0.2j])
        expected = (lam**2 - 0.25) * u(coords)
        assert disk_laplacian(u, coords, 0) == pytest.approx(expected, rel=1e-3, abs=1e-5)

    def test_joint_eigenfunction_product(self):
        """Test that each factor Laplacian acts by its own eigenvalue on the product."""
        model = api.get_model("h2xh2")
        lam = [0.7, 1.1]
        f = ValueParser().parse_boundary_function("cos(1@1)*sin(1@2)+0.5", "h2xh2")
        evaluator = transforms.PoissonEvaluator(model, lam, f)

        def u(coords):
            return evaluator(SpacePoint(ModelId.H2XH2, coords))

        coords = np.array([0.2 - 0.1j, 0.4j])
        for j, lj in enumerate(lam):
            expected = (lj**2 - 0.25) * u(coords)
            assert disk_laplacian(u, coords, j) == pytest.approx(expected, rel=1e-3, abs=1e-5)

    def test_harmonic_case_is_translation(self):
        """Test that pi_rho(g) is plain composition with g^-1 on the boundary."""
        model = api.get_model("h2")
        f = BoundaryFunction(ModelId.H2, fourier=np.array([0.5, 0.0, 0.5]))
        g = geometry.random_group_element(model, np.random.default_rng(2))
        moved = transforms.principal_series_action(model, 0.5, g, f, grid=16)
        for idx, theta in enumerate(transforms.circle_grid(model, 16).reshape(-1)):
            b = BoundaryPoint(ModelId.H2, np.array([theta]))
            target, _ = geometry.boundary_action(model, g, b)
            assert moved.samples[idx] == pytest.approx(f(target))

    def test_model_mismatch(self):
        """Test that data of another model is refused."""
        with pytest.raises(ValueError):
            transforms.PoissonEvaluator(api.get_model("h2"), 0.7, BoundaryFunction.constant("h2xh2"))

    def test_quadrature_cap(self):
        """Test that a tiny node cap fails near the boundary."""
        model = api.get_model("h2")
        evaluator = transforms.PoissonEvaluator(
            model, 0.7, BoundaryFunction.constant(ModelId.H2), max_nodes=64
        )
        with pytest.raises(QuadratureError):
            evaluator.at_corner(BoundaryPoint(ModelId.H2, np.zeros(1)), [1e-4])

    def test_profiles_cached(self):
        """Test that mode profiles are reused for the same radius."""
        evaluator = transforms.PoissonEvaluator(
            api.get_model("h2"), 0.7, BoundaryFunction.constant(ModelId.H2)
        )
        first = evaluator.profile(0, 0.3)
        assert evaluator.profile(0, 0.3) is first

    def test_h3_action_unsupported(self):
        """Test that the principal series action needs circle factors."""
        model = api.get_model("h3", enable_h3=True)
        with pytest.raises(UnsupportedModelError):
            transforms.principal_series_action(
                model, 0.6, geometry.random_group_element(model, np.random.default_rng(0)),
                BoundaryFunction.constant(ModelId.H3),
            )

    def test_circle_grid_shape(self):
        """Test the torus grid layout."""
        grid = transforms.circle_grid(api.get_model("h2xh2"), 4)
        assert grid.shape == (4, 4, 2)
        assert grid[1, 2].tolist() == pytest.approx([np.pi / 2, np.pi])


class TestCFunction:
    """Tests for the Harish-Chandra c-function."""

    @pytest.mark.parametrize("lam", [0.7, 1.3, 0.4 + 0.2j, 2.5])
    def test_integral_matches_closed_form_h2(self, lam):
        """Test the N-bar integral on the hyperbolic plane."""
        model = api.get_model("h2")
        assert transforms.c_function_integral(model, lam) == pytest.approx(
            transforms.c_function_closed_form(model, lam), rel=1e-8
        )

    @pytest.mark.parametrize("lam", [0.7, 1.3 + 0.4j])
    def test_integral_is_holomorphic(self, lam):
        """Test the Cauchy-Riemann equations for lambda -> c(lambda) by central differences."""
        model = api.get_model("h2")
        h = 1e-4
        along_real = (
            transforms.c_function_integral(model, lam + h)
            - transforms.c_function_integral(model, lam - h)
        ) / (2 * h)
        along_imag = (
            transforms.c_function_integral(model, lam + 1j * h)
            - transforms.c_function_integral(model, lam - 1j * h)
        ) / (2j * h)
        assert along_imag == pytest.approx(along_real, rel=1e-6)

    def test_integral_matches_closed_form_h3(self):
        """Test c(lambda) = 1 / lambda on hyperbolic 3-space."""
        model = api.get_model("h3", enable_h3=True)
        assert transforms.c_function_integral(model, 0.6) == pytest.approx(1 / 0.6, rel=1e-8)

    def test_normalized_at_rho(self):
        """Test c(rho) = 1 on every model."""
        assert transforms.c_function_integral(api.get_model("h2"), 0.5) == pytest.approx(1.0)
        assert transforms.c_function_closed_form(api.get_model("h2xh2"), [0.5, 0.5]) == (
            pytest.approx(1.0)
        )

    def test_product_factorizes(self):
        """Test c on the product as a product of rank-one values."""
        h2 = api.get_model("h2")
        value = transforms.c_function_integral(api.get_model("h2xh2"), [0.7, 1.1])
        expected = transforms.c_function_closed_form(h2, 0.7) * transforms.c_function_closed_form(
            h2, 1.1
        )
        assert value == pytest.approx(expected, rel=1e-8)

    def test_outside_chamber(self):
        """Test that Re(lambda) <= 0 is refused by the integral."""
        with pytest.raises(ChamberError):
            transforms.c_function_integral(api.get_model("h2"), -0.7)
