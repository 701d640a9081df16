import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from conftest import match_sets
from lattice.errors import ConfigError, DomainError, GainNotSupported, SizeError
from lattice.model import (LatticeModel, ModelParamsLadder, bloch, bloch_momentum, bloch_stack, load_model,
                           make_chain, make_ladder_flux, make_ladder_trivial, real_space_hamiltonian, rescaled)


def test_trivial_ladder_bloch_matrix():
    model = make_ladder_trivial(ModelParamsLadder(t0=0.5, t1=0.5, gamma=0.8))
    beta = 0.7 + 0.4j
    h = bloch(model, beta).entries
    h_x = 0.5 + 0.5 * (beta + 1 / beta)
    np.testing.assert_allclose(h, np.array([[0, h_x], [h_x, -0.8j]]), atol=1e-14)


def test_flux_ladder_matches_pauli_form():
    params = ModelParamsLadder(t0=0.5, t1=0.5, tp=0.3, gamma=0.8, phi=0.7)
    model = make_ladder_flux(params)
    beta = 1.3 - 0.2j
    h = bloch(model, beta).entries
    h_x = params.t0 + params.t1 * (beta + 1 / beta)
    h_z = 1j * params.tp * math.sin(params.phi) * (beta - 1 / beta) + 0.4j
    h_0 = params.tp * math.cos(params.phi) * (beta + 1 / beta) - 0.4j
    expected = np.array([[h_0 + h_z, h_x], [h_x, h_0 - h_z]])
    np.testing.assert_allclose(h, expected, atol=1e-13)


def test_trivial_ladder_rejects_same_sublattice_hopping():
    with pytest.raises(DomainError):
        make_ladder_trivial(ModelParamsLadder(t0=0.5, t1=0.5, gamma=0.8, tp=0.1))


@pytest.mark.parametrize("factory", [make_ladder_trivial, make_ladder_flux])
def test_gain_is_rejected(factory):
    with pytest.raises(GainNotSupported):
        factory(ModelParamsLadder(t0=0.5, t1=0.5, gamma=-0.1))


def test_model_validation():
    with pytest.raises(DomainError):
        LatticeModel(q=1, hop_range=1, hoppings={(2, 0, 0): 1.0})
    with pytest.raises(DomainError):
        LatticeModel(q=1, hop_range=1, hoppings={(1, 0, 1): 1.0})
    with pytest.raises(DomainError):
        LatticeModel(q=1, hop_range=1, hoppings={(1, 0, 0): 0.0})
    with pytest.raises(GainNotSupported):
        LatticeModel(q=1, hop_range=1, hoppings={(0, 0, 0): 0.2j})


def test_zero_hoppings_are_dropped():
    model = LatticeModel(q=1, hop_range=1, hoppings={(1, 0, 0): 0.5, (-1, 0, 0): 0.5, (0, 0, 0): 0.0})
    assert dict(model.hoppings) == {(-1, 0, 0): 0.5, (1, 0, 0): 0.5}
    assert model.n_roots == 2
    assert model.blocks.shape == (3, 1, 1)


def test_bloch_stack_at_zero_is_undefined(flux_a):
    with pytest.raises(DomainError):
        bloch_stack(flux_a, [1.0, 0.0])


def test_pbc_spectrum_is_bloch_spectrum(flux_a):
    L = 12
    H = real_space_hamiltonian(flux_a, L, "PBC")
    k = 2 * np.pi * np.arange(L) / L
    expected = np.linalg.eigvals(bloch_momentum(flux_a, k))
    assert match_sets(np.linalg.eigvals(H), expected) < 1e-9


def test_sparse_and_dense_agree(flux_b):
    for boundary in ("OBC", "PBC"):
        dense = real_space_hamiltonian(flux_b, 9, boundary)
        sparse = real_space_hamiltonian(flux_b, 9, boundary, sparse=True)
        assert np.abs(sparse.toarray() - dense).max() < 1e-15


def test_obc_cosine_chain():
    L = 15
    H = real_space_hamiltonian(make_chain(1.0), L, "OBC")
    expected = 2 * np.cos(np.pi * np.arange(1, L + 1) / (L + 1))
    assert np.sort(np.linalg.eigvalsh(H)) == pytest.approx(np.sort(expected), abs=1e-12)


def test_hopping_direction():
    H = real_space_hamiltonian(make_chain(2.0, 0.5), 5, "OBC")
    # <x+1|H|x> carries the rightward amplitude
    assert H[3, 2] == 2.0
    assert H[2, 3] == 0.5


def test_rescaling_is_an_obc_similarity(flux_a):
    L = 10
    original = np.linalg.eigvals(real_space_hamiltonian(flux_a, L, "OBC"))
    moved = np.linalg.eigvals(real_space_hamiltonian(rescaled(flux_a, 1.3), L, "OBC"))
    assert match_sets(original, moved) < 1e-8


def test_small_lattices_are_rejected(flux_a):
    with pytest.raises(SizeError):
        real_space_hamiltonian(flux_a, 2)
    with pytest.raises(DomainError):
        real_space_hamiltonian(flux_a, 10, "twisted")


def test_load_model():
    model = load_model(json.dumps({"model": "ladder_flux", "t0": 1.0, "t1": 0.5, "tp": 0.7, "gamma": 0.8,
                                   "phi": math.pi / 2}))
    assert model.q == 2 and model.hop_range == 1
    assert "ladder_flux" in model.notes

    with pytest.raises(ConfigError):
        load_model("{not json")
    with pytest.raises(ValidationError):
        load_model({"model": "ladder_trivial", "t0": 1.0, "t1": 0.5, "gamma": 0.8, "mass": 1.0})
    with pytest.raises(ValidationError):
        load_model({"model": "ladder_kagome", "t0": 1.0, "t1": 0.5, "gamma": 0.8})
