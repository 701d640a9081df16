import numpy as np
import pytest

from lattice import dynamics
from lattice.dynamics import EvolutionPlan
from lattice.errors import DomainError, ZeroVelocity
from lattice.model import ModelParamsLadder, make_ladder_flux, make_ladder_trivial
from tools import export


def random_ladders(count=10, seed=7):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        t0, t1, tp = rng.uniform(0.2, 1.2, 3)
        params = ModelParamsLadder(t0=t0, t1=t1, tp=tp, gamma=rng.uniform(0.1, 1.0), phi=rng.uniform(0, np.pi))
        yield make_ladder_flux(params)


def test_log_time_grid():
    times = dynamics.log_time_grid(0.1, 1000.0, 10)
    assert times[0] == 0
    assert times[1] == pytest.approx(0.1)
    assert times[-1] == pytest.approx(1000.0)
    assert np.all(np.diff(times) > 0)
    with pytest.raises(DomainError):
        dynamics.log_time_grid(10.0, 1.0)


def test_wrap_time_grid():
    assert dynamics.wrap_time_grid(-0.5, 10.0) == pytest.approx(np.arange(0, 11, 2.0))
    with pytest.raises(ZeroVelocity):
        dynamics.wrap_time_grid(0.0, 10.0)


def test_time_lists_are_validated(flux_a):
    with pytest.raises(DomainError):
        dynamics.local_green(flux_a, 10, "PBC", 5, 0, [0.5, 1.0])
    with pytest.raises(DomainError):
        dynamics.local_green(flux_a, 10, "PBC", 5, 0, [0.0, 2.0, 1.0])
    with pytest.raises(DomainError):
        dynamics.local_green(flux_a, 10, "PBC", 10, 0, [0.0, 1.0])
    with pytest.raises(DomainError):
        dynamics.local_green(flux_a, 10, "OBC", 5, 0, [0.0, 1.0], EvolutionPlan(method="momentum"))


def test_cosine_chain_return_amplitude(cosine_chain):
    L = 16
    times = np.linspace(0.0, 5.0, 11)
    series = dynamics.local_green(cosine_chain, L, "PBC", 3, 0, times)
    k = 2 * np.pi * np.arange(L) / L
    exact = np.exp(-2j * np.outer(times, np.cos(k))).mean(axis=1)
    assert np.abs(series.values - exact).max() < 1e-10
    assert series.values[0] == pytest.approx(1.0)
    assert series.meta["kind"] == "local"


def test_momentum_evolution_is_the_real_space_one():
    times = np.linspace(0.0, 8.0, 17)
    for model in random_ladders():
        eig = dynamics.local_green(model, 20, "PBC", 4, 1, times)
        momentum = dynamics.local_green(model, 20, "PBC", 4, 1, times, EvolutionPlan(method="momentum"))
        assert np.abs(eig.values - momentum.values).max() < 1e-8


def test_runge_kutta_agrees_with_eigendecomposition(trivial_half, flux_a):
    times = np.linspace(0.0, 10.0, 21)
    for model, boundary in ((trivial_half, "OBC"), (trivial_half, "PBC"), (flux_a, "PBC")):
        eig = dynamics.local_green(model, 30, boundary, 15, 0, times)
        rk = dynamics.local_green(model, 30, boundary, 15, 0, times, EvolutionPlan(method="rk"))
        assert eig.meta["method"] == "eig" and rk.meta["method"] == "rk"
        assert np.abs(eig.values - rk.values).max() < 1e-7


def test_skin_effect_obc_falls_back_to_runge_kutta(flux_a):
    # the flux ladder's GBZ is not a circle, so no single rescaling tames its eigenvectors
    times = np.linspace(0.0, 10.0, 21)
    default = dynamics.local_green(flux_a, 30, "OBC", 15, 0, times)
    rk = dynamics.local_green(flux_a, 30, "OBC", 15, 0, times, EvolutionPlan(method="rk"))
    assert default.meta["method"] in ("eig", "rk")
    assert np.abs(default.values - rk.values).max() < 1e-7


def test_quadrature_is_the_pbc_sum(flux_b):
    L = 24
    times = np.linspace(0.0, 20.0, 41)
    pbc = dynamics.local_green(flux_b, L, "PBC", 7, 0, times)
    quadrature = dynamics.quadrature_green(flux_b, 7, 0, times, n_k=L)
    assert np.abs(pbc.values - quadrature.values).max() < 1e-8


def test_norm_never_grows(flux_a):
    L = 20
    psi0 = np.zeros(2 * L, dtype=complex)
    psi0[2 * 10] = 1.0
    states = dynamics.evolve_state(flux_a, L, "OBC", psi0, np.linspace(0.0, 20.0, 81))
    norms = np.linalg.norm(states, axis=1)
    assert norms[0] == pytest.approx(1.0)
    assert np.all(np.diff(norms) <= 1e-10)


def test_initial_state_must_be_normalised(flux_a):
    with pytest.raises(DomainError):
        dynamics.evolve_state(flux_a, 10, "PBC", np.ones(20), [0.0, 1.0])
    with pytest.raises(DomainError):
        dynamics.evolve_state(flux_a, 10, "PBC", np.ones(7) / np.sqrt(7), [0.0, 1.0])


def test_worldline_wraps_onto_local_green(flux_a):
    L, x0, v = 20, 4, 0.5
    series = dynamics.worldline_green(flux_a, L, x0, v, 40.0)
    assert series.times == pytest.approx(np.arange(21) / v)
    assert series.values[0] == pytest.approx(1.0)
    local = dynamics.local_green(flux_a, L, "PBC", x0, 0, [0.0, 40.0])
    assert series.values[-1] == pytest.approx(local.values[-1], abs=1e-10)


def test_crossover_time_of_cosine_band(cosine_chain):
    assert dynamics.crossover_time(cosine_chain, 100) == pytest.approx(25.0, rel=1e-9)


def test_trivial_ladder_is_stable_at_criticality():
    model = make_ladder_trivial(ModelParamsLadder(t0=0.5, t1=0.5, gamma=0.8))
    times = np.linspace(0.0, 30.0, 31)
    series = dynamics.local_green(model, 40, "PBC", 20, 0, times)
    assert np.all(series.magnitude <= 1.0 + 1e-12)


def test_series_file_round_trip(tmp_path, cosine_chain):
    series = dynamics.local_green(cosine_chain, 12, "PBC", 2, 0, np.linspace(0.0, 3.0, 7))
    path = export.write_series(series, tmp_path / "green.csv")
    assert path.read_text().startswith("# {")
    loaded = export.read_series(path)
    assert loaded.meta == series.meta
    assert np.abs(loaded.values - series.values).max() == 0
    assert list(series.to_frame().columns) == ["t", "re_G", "im_G", "abs_G"]


def test_quadrature_follows_a_long_ring_before_wrap_around(flux_b):
    L = 150
    t_c = dynamics.crossover_time(flux_b, L)
    times = np.linspace(0.0, t_c, 201)
    ring = dynamics.local_green(flux_b, L, "PBC", 75, 0, times)
    infinite = dynamics.quadrature_green(flux_b, 75, 0, times, n_k=2048)
    assert np.abs(ring.values - infinite.values).max() < 1e-6
