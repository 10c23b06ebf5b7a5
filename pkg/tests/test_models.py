"""Tests for poisson-bv value types."""

import numpy as np
import pytest

from poisson_bv.engines.rootdata import build_root_datum
from poisson_bv.models.boundary import (
    AsymptoticExpansion,
    BoundaryFunction,
    ExpansionTerm,
    ExtractionConfig,
)
from poisson_bv.models.codec import decode_array, encode_array, pair_to_complex
from poisson_bv.models.config import RunConfig
from poisson_bv.models.operator import MatrixThetaOperator, ThetaOperator
from poisson_bv.models.roots import ModelId, RootDatum, SpectralParameter
from poisson_bv.models.series import DeltaLayer, FormalSeries, MonicPolynomial, taylor_shift
from poisson_bv.models.space import (
    BoundaryPoint,
    CornerCoordinates,
    GroupElement,
    SpacePoint,
)


class TestMonicPolynomial:
    """Tests for MonicPolynomial."""

    def test_from_roots(self):
        """Test building (s - 0.2)(s - 0.8)."""
        p = MonicPolynomial.from_roots([0.2, 0.8])
        assert p.degree == 2
        assert np.allclose(p.coefficients, [0.16, -1.0, 1.0])
        assert abs(p(0.2)) < 1e-15
        assert np.allclose(sorted(p.roots().real), [0.2, 0.8])

    def test_empty_roots_give_constant_one(self):
        """Test that no roots give the constant polynomial 1."""
        p = MonicPolynomial.from_roots([])
        assert p.degree == 0
        assert p(3.0) == 1

    def test_not_monic_rejected(self):
        """Test that a leading coefficient other than 1 is refused."""
        with pytest.raises(ValueError, match="Leading coefficient"):
            MonicPolynomial(np.array([1.0, 2.0]))

    def test_normalize_returns_factor(self):
        """Test dividing out the leading coefficient."""
        p, lead = MonicPolynomial.normalize([2.0, -6.0, 4.0])
        assert lead == 4
        assert np.allclose(p.coefficients, [0.5, -1.5, 1.0])

    def test_normalize_zero_leading(self):
        """Test that a zero leading coefficient is refused."""
        with pytest.raises(ValueError):
            MonicPolynomial.normalize([1.0, 0.0])

    def test_shifted_and_derivative(self):
        """Test p(s + a) and p'(s)."""
        p = MonicPolynomial.from_roots([1.0, 3.0])
        shifted = p.shifted(2.0)
        assert np.allclose(sorted(shifted.roots().real), [-1.0, 1.0])
        assert p.derivative(2.0) == pytest.approx(0.0)
        assert p.derivative(1.0) == pytest.approx(-2.0)

    def test_taylor_shift_matches_evaluation(self):
        """Test that the shifted coefficients evaluate to c(s + shift)."""
        coeffs = np.array([1.0, -2.0, 0.5, 3.0], dtype=complex)
        shifted = taylor_shift(coeffs, 0.7 - 0.2j)
        s = 0.3 + 0.1j
        direct = np.polynomial.polynomial.polyval(s + 0.7 - 0.2j, coeffs)
        assert np.polynomial.polynomial.polyval(s, shifted) == pytest.approx(direct)


class TestThetaOperator:
    """Tests for ThetaOperator."""

    def test_from_terms(self):
        """Test building theta^2 - t theta from its terms."""
        P = ThetaOperator.from_terms({(0, 2): 1, (1, 1): -1})
        assert P.order == 2
        assert P.t_degree == 1
        assert P.is_fuchsian
        assert P.terms() == {(0, 2): 1 + 0j, (1, 1): -1 + 0j}

    def test_not_fuchsian(self):
        """Test that a higher theta-power above t^0 breaks Fuchsian form."""
        P = ThetaOperator.from_terms({(0, 1): 1, (1, 2): 1})
        assert not P.is_fuchsian

    def test_trailing_zero_columns_trimmed(self):
        """Test that zero theta columns do not count toward the order."""
        P = ThetaOperator(np.array([[1.0, 1.0, 0.0, 0.0]]))
        assert P.order == 1

    def test_negative_power_rejected(self):
        """Test that negative powers are refused."""
        with pytest.raises(ValueError, match="Negative power"):
            ThetaOperator.from_terms({(-1, 0): 1})

    def test_empty_terms_rejected(self):
        """Test that an empty operator is refused."""
        with pytest.raises(ValueError):
            ThetaOperator.from_terms({})

    def test_slice_past_degree_is_zero(self):
        """Test that missing t-slices read as zero."""
        P = ThetaOperator.from_terms({(0, 1): 1})
        assert not np.any(P.slice(5))

    def test_dict_round_trip(self):
        """Test operator persistence as "i,k" keyed terms."""
        P = ThetaOperator.from_terms({(0, 2): 1, (0, 0): -0.25 + 0.1j, (2, 1): 3})
        data = P.to_dict()
        assert set(data["terms"]) == {"0,0", "0,2", "2,1"}
        assert ThetaOperator.from_dict(data).allclose(P)


class TestMatrixThetaOperator:
    """Tests for MatrixThetaOperator."""

    def test_perturbation_at(self):
        """Test evaluating the t^1 matrix at a theta value."""
        p = MonicPolynomial.from_roots([-1.0])
        A0 = np.array([[0.0, 1.0], [1.0, 0.0]])
        A1 = np.eye(2)
        M = MatrixThetaOperator.from_terms(p, 2, {(1, 0): A0, (1, 1): A1})
        assert M.size == 2
        assert np.allclose(M.perturbation_at(1, 2.0), A0 + 2 * A1)
        assert not np.any(M.perturbation_at(2, 2.0))

    def test_theta_degree_above_indicial_rejected(self):
        """Test that Q may not exceed the theta-degree of p."""
        p = MonicPolynomial.from_roots([-1.0])
        with pytest.raises(ValueError):
            MatrixThetaOperator.from_terms(p, 1, {(1, 2): np.eye(1)})

    def test_t_power_zero_rejected(self):
        """Test that perturbation terms need a positive t-power."""
        p = MonicPolynomial.from_roots([-1.0])
        with pytest.raises(ValueError):
            MatrixThetaOperator.from_terms(p, 1, {(0, 0): np.eye(1)})


class TestFormalSeries:
    """Tests for FormalSeries and DeltaLayer."""

    def test_padded(self):
        """Test truncating and zero-padding."""
        u = FormalSeries(np.array([1.0, 2.0, 3.0]), 0.5)
        assert u.padded(1).truncation == 1
        longer = u.padded(5)
        assert longer.truncation == 5
        assert longer.coeffs[3] == 0
        assert longer.exponent_offset == 0.5

    def test_evaluate_with_offset(self):
        """Test t^offset * polynomial."""
        u = FormalSeries(np.array([1.0, 1.0]), 0.5)
        assert u.evaluate(0.25) == pytest.approx(0.5 * 1.25)

    def test_monomial(self):
        """Test the series t^n."""
        u = FormalSeries.monomial(2, truncation=4)
        assert np.array_equal(u.coeffs, [0, 0, 1, 0, 0])

    def test_non_finite_rejected(self):
        """Test that NaN coefficients are refused."""
        with pytest.raises(ValueError):
            FormalSeries(np.array([1.0, np.nan]))

    def test_delta_layer_order(self):
        """Test layer order and validation."""
        layer = DeltaLayer(np.array([1.0, 0.0, 2.0]))
        assert layer.order == 2
        with pytest.raises(ValueError):
            DeltaLayer(np.array([]))

    def test_series_dict_round_trip(self):
        """Test series persistence keeps the complex offset."""
        u = FormalSeries(np.array([1.0, 0.5 - 0.25j]), 0.1 + 0.2j)
        restored = FormalSeries.from_dict(u.to_dict())
        assert restored.exponent_offset == u.exponent_offset
        assert np.array_equal(restored.coeffs, u.coeffs)


class TestCodec:
    """Tests for the [re, im] encoding."""

    def test_nested_arrays(self):
        """Test that a 2-D complex array keeps its shape."""
        values = np.array([[1 + 2j, 3.0], [0.0, -1j]])
        assert np.array_equal(decode_array(encode_array(values)), values)

    def test_bare_real_accepted(self):
        """Test that a plain number decodes as a real complex value."""
        assert pair_to_complex(0.5) == 0.5 + 0j

    def test_malformed_pair_rejected(self):
        """Test that a three-element list is not a complex number."""
        with pytest.raises(ValueError):
            pair_to_complex([1.0, 2.0, 3.0])


class TestRootDatum:
    """Tests for RootDatum and SpectralParameter."""

    def test_wall_degree(self):
        """Test m_j = |W| / |W_j| on the product model."""
        rd = build_root_datum("h2xh2")
        assert rd.order == 4
        assert rd.wall_degree(1) == 2
        assert rd.wall_degree(2) == 2

    def test_missing_inverse_rejected(self):
        """Test that a set of matrices that is not a group is refused."""
        with pytest.raises(ValueError):
            RootDatum(
                model_id=ModelId.H2,
                simple_roots=("alpha",),
                multiplicities=((1, 0),),
                rho=np.array([0.5]),
                weyl_elements=(np.array([[1]]), np.array([[2]])),
                weyl_labels=("e", "x"),
                wall_stabilizers=((0,),),
            )

    def test_wrong_stabilizer_rejected(self):
        """Test that a stabilizer inconsistent with the action is refused."""
        with pytest.raises(ValueError, match="Stabilizer"):
            RootDatum(
                model_id=ModelId.H2,
                simple_roots=("alpha",),
                multiplicities=((1, 0),),
                rho=np.array([0.5]),
                weyl_elements=(np.array([[1]]), np.array([[-1]])),
                weyl_labels=("e", "-1"),
                wall_stabilizers=((0, 1),),
            )

    def test_spectral_parameter_rank(self):
        """Test rank checking in coerce."""
        lam = SpectralParameter.coerce([0.7, 1.1])
        assert lam.rank == 2
        assert lam[1] == 1.1
        with pytest.raises(ValueError, match="rank"):
            SpectralParameter.coerce(0.7, rank=2)

    def test_spectral_parameter_finite(self):
        """Test that infinite coordinates are refused."""
        with pytest.raises(ValueError):
            SpectralParameter(np.array([np.inf]))


class TestSpace:
    """Tests for points, group elements and corner coordinates."""

    def test_group_determinant(self):
        """Test that determinant-one is enforced."""
        with pytest.raises(ValueError, match="Determinant"):
            GroupElement(ModelId.H2, (np.array([[2.0, 0.0], [0.0, 1.0]]),))

    def test_real_model_needs_real_matrices(self):
        """Test that h2 refuses complex entries."""
        with pytest.raises(ValueError):
            GroupElement(ModelId.H2, (np.array([[1.0, 1j], [0.0, 1.0]]),))

    def test_group_inverse(self):
        """Test g g^-1 = e."""
        g = GroupElement(ModelId.H2, (np.array([[2.0, 1.0], [1.0, 1.0]]),))
        assert np.allclose((g @ g.inverse()).factors[0], np.eye(2))

    def test_disk_point_outside_rejected(self):
        """Test that |w| >= 1 lies outside the model."""
        with pytest.raises(ValueError):
            SpacePoint(ModelId.H2, np.array([1.0 + 0j]))

    def test_h3_point_needs_positive_height(self):
        """Test h3 half-space validation."""
        with pytest.raises(ValueError):
            SpacePoint(ModelId.H3, np.array([0.0, 0.0, -1.0]))

    def test_boundary_angles_wrapped(self):
        """Test that circle angles are reduced mod 2 pi."""
        b = BoundaryPoint(ModelId.H2, np.array([2 * np.pi + 0.5]))
        assert b.angles[0] == pytest.approx(0.5)

    def test_h3_polar_range(self):
        """Test that the polar angle must lie in [0, pi]."""
        with pytest.raises(ValueError):
            BoundaryPoint(ModelId.H3, np.array([4.0, 0.0]))

    def test_corner_coordinates_range(self):
        """Test that t_j must lie in [0, 1] with one entry per wall."""
        b = BoundaryPoint(ModelId.H2XH2, np.zeros(2))
        assert CornerCoordinates(b=b, t=[0.5, 0.2]).interior
        assert not CornerCoordinates(b=b, t=[0.0, 0.2]).interior
        with pytest.raises(ValueError):
            CornerCoordinates(b=b, t=[1.5, 0.2])
        with pytest.raises(ValueError):
            CornerCoordinates(b=b, t=[0.5])


class TestBoundaryFunction:
    """Tests for BoundaryFunction."""

    def test_constant(self):
        """Test constant data on every model."""
        f = BoundaryFunction.constant(ModelId.H2XH2, 2.0)
        assert f.dims == 2
        assert f.band_limit == 0
        assert f(BoundaryPoint(ModelId.H2XH2, np.array([1.0, 2.0]))) == 2.0

    def test_evaluate_cosine(self):
        """Test that centered coefficients [0.5, 0, 0.5] give cos(theta)."""
        f = BoundaryFunction(ModelId.H2, fourier=np.array([0.5, 0.0, 0.5]))
        theta = np.linspace(0, 2 * np.pi, 7)
        assert np.allclose(f.evaluate(theta), np.cos(theta))

    def test_samples_to_fourier(self):
        """Test that the FFT of samples recovers the coefficients."""
        theta = 2 * np.pi * np.arange(8) / 8
        f = BoundaryFunction(ModelId.H2, samples=np.cos(3 * theta) + 0.5)
        coeffs = f.fourier_coefficients()
        assert coeffs.shape == (7,)
        assert coeffs[3] == pytest.approx(0.5)
        assert coeffs[6] == pytest.approx(0.5)
        assert coeffs[0] == pytest.approx(0.5)

    def test_even_fourier_length_rejected(self):
        """Test that coefficients need odd length."""
        with pytest.raises(ValueError):
            BoundaryFunction(ModelId.H2, fourier=np.array([1.0, 1.0]))

    def test_needs_some_data(self):
        """Test that an empty boundary function is refused."""
        with pytest.raises(ValueError):
            BoundaryFunction(ModelId.H2)

    def test_h3_limited_to_constants(self):
        """Test that h3 accepts only constants."""
        assert BoundaryFunction.constant(ModelId.H3).band_limit == 0
        with pytest.raises(ValueError, match="h3"):
            BoundaryFunction(ModelId.H3, fourier=np.array([0.5, 0.0, 0.5]))

    def test_from_dict_grid_mismatch(self):
        """Test that a declared grid must match the sample count."""
        f = BoundaryFunction(ModelId.H2, samples=np.ones(4))
        data = f.to_dict()
        assert data["grid"] == 4
        data["grid"] = 5
        with pytest.raises(ValueError, match="grid"):
            BoundaryFunction.from_dict(data)


class TestExtractionConfig:
    """Tests for ExtractionConfig."""

    def test_defaults(self):
        """Test the default radial grid."""
        cfg = ExtractionConfig()
        assert cfg.t0 == 0.2
        assert cfg.ratio == 0.7
        assert cfg.n_points == 12
        assert cfg.correction_orders == 3
        grid = cfg.grid()
        assert len(grid) == 12
        assert grid[0] == 0.2
        assert grid[1] == pytest.approx(0.14)

    @pytest.mark.parametrize(
        "kwargs",
        [{"t0": 0.0}, {"t0": 1.0}, {"ratio": 1.2}, {"correction_orders": -1}, {"n_points": 4}],
    )
    def test_invalid_settings(self, kwargs):
        """Test that out-of-range settings are refused."""
        with pytest.raises(ValueError):
            ExtractionConfig(**kwargs)

    def test_wall_override(self):
        """Test per-wall settings on the product model."""
        cfg = ExtractionConfig(wall_overrides={2: {"t0": 0.1, "n_points": 14}})
        assert cfg.for_wall(1) is cfg
        assert cfg.grid(2)[0] == 0.1
        assert len(cfg.grid(2)) == 14

    def test_unknown_override_rejected(self):
        """Test that only the grid and order settings can be overridden."""
        with pytest.raises(ValueError, match="Unknown override"):
            ExtractionConfig(wall_overrides={1: {"cond_max": 10.0}})

    def test_check_basis(self):
        """Test that the grid must exceed the basis size by two."""
        cfg = ExtractionConfig()
        cfg.check_basis(1, 10)
        with pytest.raises(ValueError, match="grid points"):
            cfg.check_basis(1, 11)

    def test_scaled_start(self):
        """Test scaling t0 on the base settings and on overrides."""
        cfg = ExtractionConfig(wall_overrides={2: {"t0": 0.1}}).with_scaled_start(0.5)
        assert cfg.t0 == pytest.approx(0.1)
        assert cfg.for_wall(2).t0 == pytest.approx(0.05)

    def test_dict_round_trip(self):
        """Test persistence with string wall keys."""
        cfg = ExtractionConfig(t0=0.05, correction_orders=4, wall_overrides={1: {"ratio": 0.6}})
        data = cfg.to_dict()
        assert list(data["wall_overrides"]) == ["1"]
        restored = ExtractionConfig.from_dict(data)
        assert restored == cfg


class TestAsymptoticExpansion:
    """Tests for AsymptoticExpansion."""

    @staticmethod
    def _term(label, offset):
        return ExpansionTerm(label, 1.0, (FormalSeries(np.array([1.0, 0.0]), offset),))

    def test_integer_difference_rejected(self):
        """Test that exponents differing by an integer are refused."""
        with pytest.raises(ValueError, match="integers"):
            AsymptoticExpansion(ModelId.H2, [self._term("e", 0.0), self._term("-1", 1.0)])

    def test_term_lookup(self):
        """Test lookup by Weyl label."""
        expansion = AsymptoticExpansion(ModelId.H2, [self._term("e", -0.2), self._term("-1", 1.2)])
        assert expansion.term("-1").exponents[0] == 1.2
        assert expansion.truncation == 1
        with pytest.raises(KeyError):
            expansion.term("flip1")

    def test_factor_count_per_rank(self):
        """Test that product-model terms need two factor series."""
        with pytest.raises(ValueError, match="factor series"):
            AsymptoticExpansion(ModelId.H2XH2, [self._term("e", 0.0)])

    def test_evaluate(self):
        """Test evaluation as a sum of products."""
        expansion = AsymptoticExpansion(ModelId.H2, [self._term("e", 0.5), self._term("-1", 0.25)])
        assert expansion.evaluate([0.16]) == pytest.approx(0.4 + 0.16**0.25)

    def test_dict_round_trip(self):
        """Test expansion persistence."""
        expansion = AsymptoticExpansion(ModelId.H2, [self._term("e", -0.2 + 0.1j)])
        restored = AsymptoticExpansion.from_dict(expansion.to_dict())
        assert restored.terms[0].exponents[0] == -0.2 + 0.1j


class TestRunConfig:
    """Tests for RunConfig."""

    def test_rank_checked_against_model(self):
        """Test that the product model needs two lambda coordinates."""
        with pytest.raises(ValueError, match="lambda"):
            RunConfig(model="h2xh2", lam=[0.7])

    def test_invalid_output(self):
        """Test that only json and csv are accepted."""
        with pytest.raises(ValueError):
            RunConfig(model="h2", lam=[0.7], output="xml")

    def test_invalid_tol(self):
        """Test that tol must be positive."""
        with pytest.raises(ValueError):
            RunConfig(model="h2", lam=[0.7], tol=0.0)

    def test_from_dict_defaults(self):
        """Test that missing keys take their defaults."""
        cfg = RunConfig.from_dict({"model": "h2", "lambda": [[0.7, 0.0]]})
        assert cfg.f == "const:1"
        assert cfg.tol == 1e-4
        assert cfg.extraction == ExtractionConfig()
        assert cfg.grid is None

    def test_dict_round_trip(self):
        """Test persistence of every field."""
        cfg = RunConfig(
            model="h2xh2",
            lam=[0.7, 1.1 + 0.1j],
            f="cos(1@1)*cos(2@2)",
            extraction=ExtractionConfig(t0=0.1),
            tol=1e-3,
            output="csv",
            seed=7,
            grid=4,
        )
        restored = RunConfig.from_dict(cfg.to_dict())
        assert restored.model == ModelId.H2XH2
        assert np.array_equal(restored.lam.values, cfg.lam.values)
        assert restored.f == cfg.f
        assert restored.extraction.t0 == 0.1
        assert (restored.tol, restored.output, restored.seed, restored.grid) == (1e-3, "csv", 7, 4)
