"""PBC bands, OBC spectra, point-gap winding and the characteristic-polynomial roots behind the GBZ."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import linear_sum_assignment, minimize_scalar
from scipy.spatial.distance import directed_hausdorff

from lattice.errors import (BandDiscontinuity, DegenerateLeadingCoefficient, DomainError,
                            ExceptionalPoint, NonDiagonalizable, OnSpectrum, WindingError)
from lattice.model import LatticeModel, bloch_momentum, bloch_stack, real_space_hamiltonian, rescaled
from options import options
from toolkit.cache import conditioned_eigvals
from toolkit.parallel import parallel_map

logger = logging.getLogger(__name__)

settings = options["spectral"]


@dataclass(frozen=True, eq=False)
class Eigendata:
    """Biorthogonal decomposition h = R diag(E) L with L = R^-1.

    R holds right vectors as columns, L left covectors as rows and
    weights[n, a, b] = R[a, n] L[n, b].
    """
    energies: np.ndarray
    right: np.ndarray
    left: np.ndarray
    weights: np.ndarray
    condition: float


@dataclass(frozen=True, eq=False)
class BandSet:
    model: LatticeModel
    k_grid: np.ndarray
    bands: np.ndarray          # (n_bands, N_k)
    right: np.ndarray          # (N_k, q, n_bands)
    left: np.ndarray           # (N_k, n_bands, q)
    discontinuous: np.ndarray  # (n_bands, N_k - 1) step flags

    @property
    def weights(self) -> np.ndarray:
        """g_n^{ab}(k), shape (n_bands, N_k, q, q)."""
        return np.einsum("kan,knb->nkab", self.right, self.left)

    @property
    def n_k(self) -> int:
        return len(self.k_grid)

    def energies_at(self, k: float) -> np.ndarray:
        return np.linalg.eigvals(bloch_momentum(self.model, k)[0])


@dataclass(frozen=True)
class WindingResult:
    E_b: complex
    W: int
    N_k: int
    phase_residual: float


@dataclass(frozen=True, eq=False)
class GBZPoint:
    E: complex
    betas: np.ndarray
    mid_ratio: float
    outlier: bool = False

    @property
    def radius(self) -> float:
        """|beta_M|, the GBZ radius at this energy."""
        return float(abs(self.betas[len(self.betas) // 2 - 1]))


def _eig_stack(h_stack: np.ndarray, where: np.ndarray, label: str):
    energies, right = np.linalg.eig(h_stack)
    condition = np.linalg.cond(right)
    worst = int(np.argmax(condition))
    if not np.isfinite(condition[worst]) or condition[worst] > settings["ep_condition"]:
        raise ExceptionalPoint(
            f"Bloch matrix is not diagonalizable at {label}={where[worst]:.12g} "
            f"(eigenvector condition {condition[worst]:.3g})")
    return energies, right, np.linalg.inv(right), condition


def eigendata(model: LatticeModel, beta: complex) -> Eigendata:
    """Right/left eigenvectors and band weights of h(beta)."""
    energies, right, left, condition = _eig_stack(bloch_stack(model, beta), np.atleast_1d(beta), "beta")
    weights = np.einsum("an,nb->nab", right[0], left[0])
    return Eigendata(energies=energies[0], right=right[0], left=left[0], weights=weights,
                     condition=float(condition[0]))


def eigensystem(model: LatticeModel, k_grid):
    """Untracked (energies, R, L) of h(e^{ik}) on a momentum grid."""
    k_grid = np.atleast_1d(np.asarray(k_grid, dtype=float))
    energies, right, left, _ = _eig_stack(bloch_momentum(model, k_grid), k_grid, "k")
    return energies, right, left


def _track(energies: np.ndarray) -> np.ndarray:
    """Permutation per k keeping bands continuous. Band 0 starts as the one with largest Im E."""
    n_k, q = energies.shape
    order = np.empty((n_k, q), dtype=int)
    order[0] = np.argsort(-energies[0].imag, kind="stable")
    for j in range(1, n_k):
        previous = energies[j - 1, order[j - 1]]
        cost = np.abs(previous[:, None] - energies[j][None, :])
        _, columns = linear_sum_assignment(cost)
        order[j] = columns
    return order


def _tracked_bands(model: LatticeModel, n_k: int):
    k_grid = 2 * np.pi * np.arange(1, n_k + 1) / n_k
    energies, right, left = eigensystem(model, k_grid)
    order = _track(energies)
    rows = np.arange(n_k)[:, None]
    bands = energies[rows, order].T
    right = np.take_along_axis(right, order[:, None, :], axis=2)
    left = np.take_along_axis(left, order[:, :, None], axis=1)
    return k_grid, bands, right, left


def pbc_bands(model: LatticeModel, n_k: Optional[int] = None) -> BandSet:
    """
    Continuity-tracked Bloch bands on k in (0, 2pi].

    The grid is doubled until no band jumps by more than 5% of the spectrum
    diameter between neighbouring samples; steps still above that after
    max_refinements doublings are flagged in `discontinuous`.

    Args:
        model: lattice model.
        n_k: requested number of momenta (at least 64).

    Returns:
        BandSet: bands with biorthonormal eigenvectors, L_n . R_m = delta_nm.
    """
    n_k = n_k or settings["n_k"]
    if n_k < 64:
        raise DomainError(f"N_k={n_k} is below the minimum of 64 momenta")

    for attempt in range(settings["max_refinements"] + 1):
        k_grid, bands, right, left = _tracked_bands(model, n_k)
        steps = np.abs(np.diff(bands, axis=1))
        diameter = max(np.ptp(bands.real), np.ptp(bands.imag))
        bound = 0.05 * diameter
        if diameter == 0 or steps.max() < bound:
            break
        if attempt < settings["max_refinements"]:
            logger.info(f"Band step {steps.max():.3g} above {bound:.3g} at N_k={n_k}, refining")
            n_k *= 2

    discontinuous = steps >= bound if diameter > 0 else np.zeros_like(steps, dtype=bool)
    if discontinuous.any():
        logger.warning(f"{int(discontinuous.sum())} band steps remain discontinuous at N_k={n_k}")
    return BandSet(model=model, k_grid=k_grid, bands=bands, right=right, left=left,
                   discontinuous=discontinuous)


def balancing_radius(model: LatticeModel, L: int) -> float:
    """
    Radius r for which the OBC matrix of the model with h(beta) -> h(r beta) is closest to normal.

    Minimises ||[H, H^dagger]||_F over log r. Under the skin effect this is the
    similarity that undoes the exponential boundary localisation, so the
    balanced matrix has well-conditioned eigenvectors.
    """
    def departure(log_r):
        H = real_space_hamiltonian(rescaled(model, float(np.exp(log_r))), L, "OBC")
        Hd = H.conj().T
        return np.linalg.norm(H @ Hd - Hd @ H)

    result = minimize_scalar(departure, bounds=(-4.0, 4.0), method="bounded", options={"xatol": 1e-8})
    r = float(np.exp(result.x))
    logger.debug(f"Balancing radius r={r:.6g} (commutator norm {result.fun:.3g})")
    return r


def _balanced_eigvals(model: LatticeModel, L: int, r: float):
    return conditioned_eigvals(real_space_hamiltonian(rescaled(model, r), L, "OBC"))


def _gbz_radius(model: LatticeModel, E: complex) -> float:
    """Geometric mean of the two middle root moduli, the skin-localisation radius at E."""
    betas = char_poly_roots(model, E)
    M = len(betas) // 2
    if M == 0:
        return np.nan
    return float(np.sqrt(abs(betas[M - 1]) * abs(betas[M])))


def _radius_sweep(model: LatticeModel, L: int, estimates, extra=()) -> np.ndarray:
    radii = [r for r in parallel_map(lambda E: _gbz_radius(model, E), estimates) if np.isfinite(r) and r > 0]
    logs = np.clip(np.log(np.concatenate([radii, list(extra)])), -4.0, 4.0)
    step = min(0.05, 6.0 / L)
    lo, hi = logs.min() - 2 * step, logs.max() + 2 * step
    return np.exp(np.linspace(lo, hi, int(np.ceil((hi - lo) / step)) + 1))


def _best_conditioned(candidates, n: int, separation: float):
    """One copy per eigenvalue, taking copies in order of increasing condition number."""
    energies = np.concatenate([c[0] for c in candidates])
    condition = np.concatenate([c[1] for c in candidates])
    order = np.argsort(condition, kind="stable")
    chosen, worst = [], 0.0
    for i in order:
        if chosen and np.abs(np.asarray(chosen) - energies[i]).min() < separation:
            continue
        chosen.append(energies[i])
        worst = condition[i]
        if len(chosen) == n:
            break
    return np.asarray(chosen), float(worst)


def obc_spectrum(model: LatticeModel, L: int) -> np.ndarray:
    """
    qL eigenvalues of the open chain.

    The matrix is first diagonalised at the balancing radius. When the skin
    localisation radius varies along the spectrum no single similarity balances
    every eigenvector, so the diagonalisation is repeated over a sweep of radii
    covering the middle-root moduli of the eigenvalues and each eigenvalue is
    taken from the radius where it is best conditioned.
    """
    n = model.q * L
    r0 = balancing_radius(model, L)
    energies, condition = _balanced_eigvals(model, L, r0)
    if np.quantile(condition, 0.9) <= settings["obc_condition"]:
        return np.sort_complex(energies)

    separation = 1e-9 * float(np.abs(model.blocks).sum())
    radii = _radius_sweep(model, L, energies, extra=[r0])
    logger.info(f"OBC eigenvalues ill-conditioned at r={r0:.6g}; sweeping {len(radii)} radii "
                f"in [{radii[0]:.4g}, {radii[-1]:.4g}]")
    for _ in range(2):
        candidates = parallel_map(lambda r: _balanced_eigvals(model, L, r), radii)
        spectrum, worst = _best_conditioned(candidates, n, separation)
        needed = _radius_sweep(model, L, spectrum)
        if needed[0] >= radii[0] and needed[-1] <= radii[-1]:
            break
        radii = _radius_sweep(model, L, spectrum, extra=[radii[0], radii[-1]])
        logger.info(f"Extending the radius sweep to [{radii[0]:.4g}, {radii[-1]:.4g}]")

    if len(spectrum) < n:
        raise NonDiagonalizable(f"only {len(spectrum)} of {n} OBC eigenvalues resolved across the radius sweep")
    if worst > settings["obc_condition"]:
        logger.warning(f"Worst OBC eigenvalue condition {worst:.3g} after the radius sweep")
    return np.sort_complex(spectrum)


def _det_loop(model: LatticeModel, E_b: complex, n_k: int) -> np.ndarray:
    k = 2 * np.pi * np.arange(n_k + 1) / n_k
    h = bloch_momentum(model, k) - E_b * np.eye(model.q)
    return np.linalg.det(h)


def winding_number(model: LatticeModel, E_b: complex, n_k: Optional[int] = None) -> WindingResult:
    """
    Point-gap winding of det[h(e^{ik}) - E_b] around 0 by phase accumulation.

    The grid is doubled while any phase step exceeds pi/2. A step that survives
    every refinement is a zero of the determinant between samples, so E_b is
    reported as lying on the spectrum.
    """
    n_k = n_k or settings["n_k"]
    E_b = complex(E_b)

    for attempt in range(settings["max_refinements"] + 1):
        dets = _det_loop(model, E_b, n_k)
        if np.abs(dets).min() < settings["winding_det_floor"]:
            raise OnSpectrum(f"E_b={E_b} lies on the PBC spectrum (|det| below floor)")
        k = 2 * np.pi * np.arange(n_k) / n_k
        if np.abs(np.linalg.eigvals(bloch_momentum(model, k)).ravel() - E_b).min() < 1e-6:
            raise OnSpectrum(f"E_b={E_b} is within 1e-6 of the sampled PBC spectrum")
        steps = np.angle(dets[1:] / dets[:-1])
        if np.abs(steps).max() < np.pi / 2:
            break
        if attempt < settings["max_refinements"]:
            logger.info(f"Winding phase step {np.abs(steps).max():.3f} too large at N_k={n_k}, refining")
            n_k *= 2
    else:
        raise OnSpectrum(f"phase step {np.abs(steps).max():.3f} persists at N_k={n_k}: "
                         f"E_b={E_b} lies on the PBC spectrum between samples")

    total = steps.sum()
    W = int(np.rint(total / (2 * np.pi)))
    residual = float(total - 2 * np.pi * W)
    if abs(residual) >= np.pi / 4:
        raise WindingError(f"accumulated phase {total:.6g} is not close to a multiple of 2pi")
    return WindingResult(E_b=E_b, W=W, N_k=n_k, phase_residual=residual)


def winding_scan(model: LatticeModel, re_grid, im_grid, n_k: Optional[int] = None) -> pd.DataFrame:
    """W(E_b) on a rectangular grid; on-spectrum or unresolved points come back as <NA>."""
    points = [complex(x, y) for y in im_grid for x in re_grid]

    def one(E_b):
        try:
            return winding_number(model, E_b, n_k).W
        except (OnSpectrum, WindingError) as e:
            logger.debug(f"No winding at E_b={E_b}: {e}")
            return pd.NA

    windings = parallel_map(one, points)
    return pd.DataFrame({
        "re_Eb": [p.real for p in points],
        "im_Eb": [p.imag for p in points],
        "W": pd.array(windings, dtype="Int64"),
    })


def _top_envelope(model: LatticeModel, k) -> np.ndarray:
    return np.linalg.eigvals(bloch_momentum(model, k)).imag.max(axis=-1)


def gap_closing_points(model: LatticeModel, n_k: Optional[int] = None) -> List[Tuple[float, int]]:
    """
    Momenta where a band touches Im E = 0.

    Local maxima of max_n Im E_n(k) on the periodic grid are refined with a
    bounded Brent search and kept when they reach zero within tol_gap.
    """
    bandset = pbc_bands(model, n_k)
    k_grid = bandset.k_grid
    dk = k_grid[1] - k_grid[0]
    top = bandset.bands.imag.max(axis=0)
    # a zero between samples leaves the nearest sample within one grid step of 0
    reach = 2 * np.abs(np.diff(top)).max() + settings["tol_gap"]
    peaks = np.flatnonzero((top >= np.roll(top, 1)) & (top >= np.roll(top, -1)) & (top > -reach))

    found: List[Tuple[float, int]] = []
    for j in peaks:
        k_j = k_grid[j]
        result = minimize_scalar(lambda k: -_top_envelope(model, k)[0], bounds=(k_j - dk, k_j + dk),
                                 method="bounded", options={"xatol": 1e-12})
        if abs(result.fun) >= settings["tol_gap"]:
            continue
        k0 = float(np.mod(result.x, 2 * np.pi)) or 2 * np.pi
        if any(min(abs(k0 - k), 2 * np.pi - abs(k0 - k)) < 1e-3 for k, _ in found):
            continue
        energies = bandset.energies_at(k0)
        E0 = energies[np.argmax(energies.imag)]
        nearest = int(np.argmin(np.abs(k_grid - k0)))
        band = int(np.argmin(np.abs(bandset.bands[:, nearest] - E0)))
        found.append((k0, band))
    found.sort()
    logger.debug(f"Gap-closing momenta: {found}")
    return found


def group_velocity(bandset: BandSet, band: int, k0: float, h: Optional[float] = None) -> float:
    """d Re E_n/dk at k0 by Richardson-extrapolated central differences."""
    k_grid = bandset.k_grid
    if not (k_grid[0] - (k_grid[1] - k_grid[0]) <= k0 <= k_grid[-1]):
        raise DomainError(f"k0={k0} outside the tracked range (0, 2pi]")
    dk = k_grid[1] - k_grid[0]
    nearest = int(np.argmin(np.abs(k_grid - k0)))
    window = slice(max(0, nearest - 2), nearest + 2)
    if bandset.discontinuous[band, window].any():
        raise BandDiscontinuity(f"band {band} is not continuously tracked near k0={k0:.6g}")

    E_center = bandset.energies_at(k0)
    E0 = E_center[np.argmin(np.abs(E_center - bandset.bands[band, nearest]))]
    h = h or dk

    def follow(k):
        candidates = bandset.energies_at(k)
        distance = np.sort(np.abs(candidates - E0))
        if len(distance) > 1 and distance[1] - distance[0] < 1e-12:
            raise BandDiscontinuity(f"band {band} is degenerate near k={k:.6g}")
        return candidates[np.argmin(np.abs(candidates - E0))]

    def central(step):
        return (follow(k0 + step) - follow(k0 - step)).real / (2 * step)

    return float((4 * central(h / 2) - central(h)) / 3)


def band_velocities(bandset: BandSet) -> np.ndarray:
    """d Re E_n/dk on the whole grid from L_n (dh/dk) R_n, shape (n_bands, N_k)."""
    model = bandset.model
    phases = np.exp(1j * np.outer(bandset.k_grid, model.offsets))
    dh = np.tensordot(phases * (1j * model.offsets), model.blocks, axes=(1, 0))
    return np.einsum("kna,kab,kbn->nk", bandset.left, dh, bandset.right).real


def char_poly_roots(model: LatticeModel, E: complex) -> np.ndarray:
    """
    The 2M roots of beta^M det[h(beta) - E], sorted by |beta| then angle.

    Coefficients are recovered exactly by sampling on 2M+1 roots of unity and
    transforming back; vanishing extreme coefficients are deflated.
    """
    M = model.q * model.hop_range
    n = 2 * M + 1
    z = np.exp(2j * np.pi * np.arange(n) / n)
    values = z ** M * np.linalg.det(bloch_stack(model, z) - complex(E) * np.eye(model.q))
    coeffs = np.fft.fft(values) / n

    scale = np.abs(coeffs).max()
    if scale == 0:
        raise DegenerateLeadingCoefficient("characteristic polynomial vanishes identically")
    significant = np.flatnonzero(np.abs(coeffs) > 1e-12 * scale)
    lo, hi = significant[0], significant[-1]
    if lo > 0 or hi < 2 * M:
        logger.warning(f"Deflating characteristic polynomial at E={E}: degree {hi - lo} instead of {2 * M}")
    roots = np.polynomial.polynomial.polyroots(coeffs[lo:hi + 1])
    return roots[np.lexsort((np.angle(roots), np.abs(roots)))]


def gbz_check(model: LatticeModel, L: int, tol: float = 1e-2) -> List[GBZPoint]:
    """Middle-root ratio |beta_{M+1}|/|beta_M| for every OBC eigenvalue."""
    if L < 100:
        logger.warning(f"L={L} < 100: expect a visible finite-size tail in the GBZ check")
    M = model.q * model.hop_range
    spectrum = obc_spectrum(model, L)

    def point(E):
        betas = char_poly_roots(model, E)
        if len(betas) < 2 * M:
            return GBZPoint(E=complex(E), betas=betas, mid_ratio=np.nan, outlier=True)
        ratio = float(abs(betas[M]) / abs(betas[M - 1]))
        return GBZPoint(E=complex(E), betas=betas, mid_ratio=ratio, outlier=abs(ratio - 1) > tol)

    points = parallel_map(point, spectrum)
    outliers = sum(p.outlier for p in points)
    if outliers:
        logger.info(f"{outliers}/{len(points)} OBC eigenvalues are finite-size outliers (tol={tol})")
    return points


def hausdorff_distance(points, curve_points) -> float:
    """Symmetric Hausdorff distance between two sets of complex numbers."""
    a = np.column_stack([np.real(points), np.imag(points)])
    b = np.column_stack([np.real(curve_points), np.imag(curve_points)])
    return float(max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0]))
