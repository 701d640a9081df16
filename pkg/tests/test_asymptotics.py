import numpy as np
import pytest
from scipy.special import j0

from lattice import asymptotics, spectral
from lattice.asymptotics import BandFunction
from lattice.errors import DomainError, NoContributingSaddle, StallError
from lattice.laurent import Laurent
from lattice.model import bloch, make_chain


@pytest.fixture(scope="module")
def lossy_cosine_chain():
    """E(beta) = beta + 1/beta - 0.01i: two order-2 saddles at beta = +1 and -1."""
    return make_chain(1.0, 1.0, -0.01j)


def test_laurent_arithmetic():
    p = Laurent.from_coefficients([1, 0, 1], -1)  # 1/beta + beta
    assert (p.low, p.high) == (-1, 1)
    derivative = p.deriv()
    assert derivative(2.0) == pytest.approx(1 - 1 / 4)
    product = p * p - 2
    assert product(0.5 + 0.5j) == pytest.approx((0.5 + 0.5j) ** 2 + (0.5 + 0.5j) ** -2)
    assert sorted(derivative.roots(), key=lambda z: z.real) == pytest.approx([-1, 1])
    assert (p - p).is_zero()


@pytest.mark.parametrize("name", ["trivial_critical_half", "flux_a", "flux_b"])
def test_band_functions_reproduce_bloch_eigenvalues(models, name):
    model = models[name]
    beta = 0.7 + 0.4j
    energies = [complex(bf.energy(beta)) for bf in asymptotics.band_functions(model)]
    eigenvalues = np.linalg.eigvals(bloch(model, beta).entries)
    assert np.abs(np.sort_complex(np.array(energies)) - np.sort_complex(eigenvalues)).max() < 1e-12


def test_upper_band_has_larger_imaginary_part(flux_a):
    upper, lower = asymptotics.band_functions(flux_a)
    k = np.linspace(0.1, 6.2, 40)
    assert np.all(upper.energy(np.exp(1j * k)).imag >= lower.energy(np.exp(1j * k)).imag - 1e-14)


def test_band_function_validation(flux_a):
    with pytest.raises(DomainError):
        BandFunction.from_model(flux_a, band=2)
    with pytest.raises(DomainError):
        BandFunction.from_model(make_chain(1.0), band=-1)


def test_gap_closings_are_saddles(trivial_half):
    saddles = asymptotics.saddle_points(trivial_half)
    betas = np.array([s.beta_s for s in saddles])
    for k0, _ in spectral.gap_closing_points(trivial_half):
        assert np.abs(betas - np.exp(1j * k0)).min() < 1e-8
    for beta in (1.0, -1.0):
        assert np.abs(betas - beta).min() < 1e-8
    closing = [s for s in saddles if abs(s.E_s) < 1e-8]
    assert {s.order for s in closing} == {2}
    assert all(s.on_unit_circle for s in closing)


def test_fourth_order_saddle(trivial_one):
    saddles = [s for s in asymptotics.saddle_points(trivial_one, band=1) if abs(s.beta_s + 1) < 1e-6]
    assert len(saddles) == 1
    saddle = saddles[0]
    assert saddle.order == 4
    # E ~ -i h_x^2 / gamma with h_x ~ -t1 (beta + 1)^2
    assert saddle.lead_deriv == pytest.approx(-24j * 0.5 ** 2 / 0.8, rel=1e-6)
    bf = BandFunction.from_model(trivial_one, 1)
    assert asymptotics.saddle_order(bf, saddle.beta_s) == 4
    assert asymptotics.saddle_order(bf, saddle.beta_s, radius=saddle.radius / 2) == 4


def test_saddles_are_stationary(flux_a):
    functions = {bf.band: bf for bf in asymptotics.band_functions(flux_a)}
    for saddle in asymptotics.saddle_points(flux_a):
        slope = functions[saddle.band].derivative(saddle.beta_s, saddle.root)
        assert abs(slope) < 1e-7


def test_flux_ladder_saddles(flux_a):
    saddles = asymptotics.saddle_points(flux_a)
    assert min(abs(abs(s.beta_s) - 1) for s in saddles) > 1e-3
    assert max(s.E_s.imag for s in saddles) == pytest.approx(0.0111, abs=5e-4)


def test_dominant_saddle_of_flux_ladder(flux_a):
    dominant = asymptotics.dominant_saddle(flux_a)
    assert dominant.rate == pytest.approx(-0.0462, abs=5e-4)
    assert dominant.multiple_dominant
    assert all(s.thimble_coeff_parity == "nonzero" for s in dominant.saddles)
    top = max(dominant.candidates, key=lambda s: s.E_s.imag)
    assert top.E_s.imag == pytest.approx(0.0111, abs=5e-4)
    assert top.thimble_coeff_parity in ("zero", "undetermined")
    assert all(abs(s.beta_s - top.beta_s) > 1e-8 for s in dominant.saddles)

    functions = {bf.band: bf for bf in asymptotics.band_functions(flux_a)}
    for saddle in dominant.saddles:
        paths = asymptotics.trace_constant_ReE_path(functions[saddle.band], saddle, "ascent")
        assert sum(p.crossings for p in paths) % 2 == 1


def test_stalled_ascent_is_left_out_of_dominance(flux_a, monkeypatch):
    trace = asymptotics.trace_constant_ReE_path
    top_rate = max(s.E_s.imag for s in asymptotics.saddle_points(flux_a))

    def stall_top(bf, saddle, direction="ascent"):
        if saddle.E_s.imag >= top_rate - 1e-9:
            raise StallError("ascent curve ran into another saddle")
        return trace(bf, saddle, direction)

    monkeypatch.setattr(asymptotics, "trace_constant_ReE_path", stall_top)
    dominant = asymptotics.dominant_saddle(flux_a)
    top = max(dominant.candidates, key=lambda s: s.E_s.imag)
    assert top.thimble_coeff_parity == "undetermined"
    assert dominant.rate == pytest.approx(-0.0462, abs=5e-4)

    def stall_all(bf, saddle, direction="ascent"):
        raise StallError("ascent curve ran into another saddle")

    monkeypatch.setattr(asymptotics, "trace_constant_ReE_path", stall_all)
    with pytest.raises(NoContributingSaddle):
        asymptotics.dominant_saddle(flux_a)


def test_steepest_directions(lossy_cosine_chain):
    for saddle in asymptotics.saddle_points(lossy_cosine_chain):
        c = saddle.lead_coeff
        for direction, sign in (("ascent", 1j), ("descent", -1j)):
            u = asymptotics.steepest_directions(saddle, direction)
            assert len(u) == saddle.order
            assert np.abs(np.abs(u) - 1).max() < 1e-12
            assert np.abs(c * u ** saddle.order - sign * abs(c)).max() < 1e-12


def test_constant_real_part_paths(lossy_cosine_chain):
    bf = BandFunction.from_model(lossy_cosine_chain)
    saddle = next(s for s in asymptotics.saddle_points(lossy_cosine_chain) if abs(s.beta_s - 1) < 1e-8)
    paths = asymptotics.trace_constant_ReE_path(bf, saddle, "ascent")
    assert len(paths) == 2
    assert {p.termination for p in paths} == {"inner", "outer"}
    for path in paths:
        assert np.abs(path.energy.real - 2.0).max() < 1e-6
        assert path.energy.imag[-1] > path.energy.imag[0]
        assert path.crossings == 0


def test_symmetric_saddles_share_dominance(lossy_cosine_chain):
    dominant = asymptotics.dominant_saddle(lossy_cosine_chain)
    assert dominant.multiple_dominant
    assert sorted(s.beta_s.real for s in dominant.saddles) == pytest.approx([-1.0, 1.0])
    assert dominant.rate == pytest.approx(-0.01)


def test_local_prediction_matches_bessel_asymptotics(lossy_cosine_chain):
    prediction = asymptotics.predict_local_green(lossy_cosine_chain)
    assert prediction.exponent == -0.5
    assert len(prediction.terms) == 2
    t = np.linspace(100.0, 200.0, 9)
    exact = np.exp(-0.01 * t) * j0(2 * t)
    envelope = np.exp(-0.01 * t) / np.sqrt(np.pi * t)
    assert np.all(np.abs(prediction.evaluate(t) - exact) < 0.02 * envelope)


def test_trivial_prediction_exponents(trivial_half, trivial_one):
    assert asymptotics.predict_local_green(trivial_half).exponent == -0.5
    one = asymptotics.predict_local_green(trivial_one)
    assert one.exponent == -0.25
    assert one.rate == pytest.approx(0.0, abs=1e-10)


def _drift(model, speed):
    bandset = spectral.pbc_bands(model)
    k0, band = spectral.gap_closing_points(model)[0]
    return k0, float(np.sign(spectral.group_velocity(bandset, band, k0))) * speed


@pytest.mark.parametrize("name, speed, order", [("flux_a", 0.3, 2), ("flux_b", 1.4, 3)])
def test_worldline_saddle_order(models, name, speed, order):
    model = models[name]
    k0, v = _drift(model, speed)
    saddle = asymptotics.worldline_saddle(model, v, k_hint=k0)
    assert saddle.order == order
    assert saddle.E_s.imag == pytest.approx(0.0, abs=1e-8)
    prediction = asymptotics.predict_worldline_green(model, v, k_hint=k0)
    assert prediction.exponent == pytest.approx(-1 / order)
