import numpy as np
import pytest

from conftest import match_sets
from lattice import spectral
from lattice.errors import DomainError, OnSpectrum
from lattice.model import ModelParamsLadder, bloch, make_ladder_trivial


def test_trivial_bands_match_closed_form(trivial_half):
    bandset = spectral.pbc_bands(trivial_half)
    assert bandset.bands.shape == (2, bandset.n_k)
    h_x = 0.5 + 0.5 * 2 * np.cos(bandset.k_grid)
    root = np.sqrt(h_x.astype(complex) ** 2 - 0.16)
    expected = np.stack([-0.4j + root, -0.4j - root])
    for j in range(0, bandset.n_k, 17):
        assert match_sets(bandset.bands[:, j], expected[:, j]) < 1e-12


def test_pbc_bands_need_enough_momenta(flux_a):
    with pytest.raises(DomainError):
        spectral.pbc_bands(flux_a, 32)


def test_biorthonormal_eigenvectors(flux_a):
    bandset = spectral.pbc_bands(flux_a, 128)
    overlap = np.einsum("kna,kam->knm", bandset.left, bandset.right)
    assert np.abs(overlap - np.eye(2)).max() < 1e-10
    completeness = bandset.weights.sum(axis=0)
    assert np.abs(completeness - np.eye(2)).max() < 1e-10


def test_eigendata_reconstructs_bloch_matrix(flux_b):
    data = spectral.eigendata(flux_b, 0.8 + 0.3j)
    h = np.einsum("n,nab->ab", data.energies, data.weights)
    assert np.abs(h - bloch(flux_b, 0.8 + 0.3j).entries).max() < 1e-12


def test_gap_closing_of_trivial_ladder(trivial_half):
    momenta = [k for k, _ in spectral.gap_closing_points(trivial_half)]
    assert momenta == pytest.approx([2 * np.pi / 3, 4 * np.pi / 3], abs=1e-6)


@pytest.mark.parametrize("t0, expected", [(1.0, [np.pi]), (1.2, [])])
def test_gap_closing_moves_with_the_intracell_hop(t0, expected):
    model = make_ladder_trivial(ModelParamsLadder(t0=t0, t1=0.5, gamma=0.8))
    momenta = [k for k, _ in spectral.gap_closing_points(model)]
    assert momenta == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("name", ["trivial_critical_half", "trivial_critical_one", "flux_a", "flux_b"])
def test_bands_are_dissipative(models, name):
    assert spectral.pbc_bands(models[name]).bands.imag.max() <= 1e-10


def test_gap_closing_velocity_of_flux_ladder(flux_a):
    bandset = spectral.pbc_bands(flux_a)
    closings = spectral.gap_closing_points(flux_a)
    assert [k for k, _ in closings] == pytest.approx([2 * np.pi / 3, 4 * np.pi / 3], abs=1e-6)
    for k0, band in closings:
        assert abs(spectral.group_velocity(bandset, band, k0)) == pytest.approx(0.3, abs=1e-6)


def test_group_velocity_of_cosine_band(cosine_chain):
    bandset = spectral.pbc_bands(cosine_chain, 256)
    assert spectral.group_velocity(bandset, 0, np.pi / 2) == pytest.approx(-2.0, abs=1e-8)
    velocities = spectral.band_velocities(bandset)
    assert velocities[0] == pytest.approx(-2 * np.sin(bandset.k_grid), abs=1e-12)
    with pytest.raises(DomainError):
        spectral.group_velocity(bandset, 0, 7.0)


def test_winding_of_hatano_nelson(hatano_nelson):
    assert spectral.winding_number(hatano_nelson, 0j).W == -1
    assert spectral.winding_number(hatano_nelson, 3.0).W == 0
    coarse = spectral.winding_number(hatano_nelson, 0.2 + 0.1j, n_k=128)
    fine = spectral.winding_number(hatano_nelson, 0.2 + 0.1j, n_k=256)
    assert coarse.W == fine.W == -1
    assert abs(coarse.phase_residual) < 1e-8


def test_winding_on_spectrum(hatano_nelson):
    with pytest.raises(OnSpectrum):
        spectral.winding_number(hatano_nelson, 1.5)


def test_trivial_ladder_has_no_point_gap(trivial_half):
    grid = spectral.winding_scan(trivial_half, [-1.9, -0.7, 0.3, 1.1, 2.3], [-1.1, -0.55, -0.15, 0.25], n_k=512)
    assert len(grid) == 20
    assert str(grid["W"].dtype) == "Int64"
    values = grid["W"].dropna()
    assert len(values) > 0
    assert (values == 0).all()


def test_flux_ladder_has_a_point_gap(flux_a):
    # each PBC band encloses its own loop; the centroid sits inside it
    bandset = spectral.pbc_bands(flux_a)
    for band in bandset.bands:
        centroid = complex(band.mean())
        coarse = spectral.winding_number(flux_a, centroid, n_k=1024)
        fine = spectral.winding_number(flux_a, centroid, n_k=2048)
        assert coarse.W == fine.W == -1


def test_winding_between_loops_is_zero(flux_a):
    assert spectral.winding_number(flux_a, -0.4j).W == 0


def test_winding_refuses_energies_on_the_spectrum(trivial_half):
    # h = +-sqrt(0.15) lies inside the band range [-0.5, 1.5], so -0.5i is a PBC eigenvalue
    with pytest.raises(OnSpectrum):
        spectral.winding_number(trivial_half, -0.5j)
    sampled = complex(np.linalg.eigvals(bloch(trivial_half, 1j).entries)[0])
    with pytest.raises(OnSpectrum):
        spectral.winding_number(trivial_half, sampled)

    grid = spectral.winding_scan(trivial_half, [0.0, 2.5], [-0.5, -0.4], n_k=256)
    assert grid["W"].isna().iloc[0]
    assert grid["W"].iloc[3] == 0


def test_hermitian_obc_spectrum(cosine_chain):
    L = 30
    expected = 2 * np.cos(np.pi * np.arange(1, L + 1) / (L + 1))
    spectrum = spectral.obc_spectrum(cosine_chain, L)
    assert np.abs(spectrum.imag).max() < 1e-10
    assert np.sort(spectrum.real) == pytest.approx(np.sort(expected), abs=1e-10)


def test_skin_effect_spectrum_is_balanced(hatano_nelson):
    L = 40
    assert spectral.balancing_radius(hatano_nelson, L) == pytest.approx(np.sqrt(2), rel=1e-6)
    spectrum = spectral.obc_spectrum(hatano_nelson, L)
    expected = 2 * np.sqrt(0.5) * np.cos(np.pi * np.arange(1, L + 1) / (L + 1))
    assert np.abs(spectrum.imag).max() < 1e-8
    assert np.sort(spectrum.real) == pytest.approx(np.sort(expected), abs=1e-8)


def test_gbz_of_hatano_nelson(hatano_nelson):
    points = spectral.gbz_check(hatano_nelson, 40)
    assert len(points) == 40
    assert not any(p.outlier for p in points)
    assert [p.radius for p in points] == pytest.approx([np.sqrt(2)] * 40, rel=1e-8)


def test_characteristic_roots_pair_up_for_reflection_symmetric_ladder(trivial_one):
    roots = spectral.char_poly_roots(trivial_one, 0.3 - 0.1j)
    assert len(roots) == 4
    assert np.all(np.diff(np.abs(roots)) >= 0)
    for beta in roots:
        assert np.abs(1 / beta - roots).min() < 1e-9


def test_characteristic_roots_solve_the_secular_equation(flux_b):
    E = -0.2 - 0.3j
    for beta in spectral.char_poly_roots(flux_b, E):
        h = bloch(flux_b, beta).entries
        assert abs(np.linalg.det(h - E * np.eye(2))) < 1e-9 * max(1.0, abs(beta) ** 2, abs(beta) ** -2)


def test_hausdorff_distance():
    assert spectral.hausdorff_distance([0, 1], [0]) == pytest.approx(1.0)
    assert spectral.hausdorff_distance([1j], [1j, 1j + 0.5]) == pytest.approx(0.5)


def test_gbz_of_reflection_symmetric_ladder(trivial_half):
    points = spectral.gbz_check(trivial_half, 100)
    ratios = np.array([p.mid_ratio for p in points])
    assert np.nanmedian(ratios) == pytest.approx(1.0, abs=1e-3)
    assert sum(p.outlier for p in points) <= 0.1 * len(points)


@pytest.mark.slow
def test_gbz_of_flux_ladder(flux_a):
    # the GBZ is not a circle here; eigenvalues must still sit where the middle roots meet
    points = spectral.gbz_check(flux_a, 150)
    ratios = np.array([p.mid_ratio for p in points])
    assert len(points) == 300
    assert np.nanmedian(ratios) == pytest.approx(1.0, abs=2e-2)
    assert sum(p.outlier for p in points) <= 0.25 * len(points)


def test_obc_spectrum_approaches_the_bands_without_skin_effect(trivial_half):
    bands = spectral.pbc_bands(trivial_half).bands.ravel()
    distances = [spectral.hausdorff_distance(spectral.obc_spectrum(trivial_half, L), bands) for L in (50, 100, 200)]
    assert distances[2] < distances[0]
    assert distances[2] < 0.1
