"""Time evolution of delta-localised states and the Green's functions read off from it."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from lattice.errors import DomainError, NonDiagonalizable, ZeroVelocity
from lattice.model import Boundary, LatticeModel, bloch_momentum, real_space_hamiltonian, rescaled
from lattice.spectral import balancing_radius, band_velocities, eigensystem, pbc_bands
from options import options
from toolkit.cache import dense_eig
from toolkit.parallel import parallel_map

logger = logging.getLogger(__name__)

settings = options["dynamics"]

CHUNK = 512


@dataclass(frozen=True, eq=False)
class GreensSeries:
    times: np.ndarray
    values: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def floored(self) -> np.ndarray:
        """Samples below the double-precision amplitude floor; excluded from fits."""
        return self.magnitude < settings["amplitude_floor"]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times,
            "re_G": self.values.real,
            "im_G": self.values.imag,
            "abs_G": self.magnitude,
        })


class EvolutionPlan(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    method: Literal["eig", "rk", "momentum"] = "eig"
    tolerance: float = Field(default=settings["rk_tolerance"], gt=0)
    cross_check: bool = False


def log_time_grid(t_min: float, t_max: float, points_per_decade: Optional[int] = None) -> np.ndarray:
    """0 followed by a log-uniform grid on [t_min, t_max]."""
    if not 0 < t_min < t_max:
        raise DomainError(f"need 0 < t_min < t_max, got {t_min}, {t_max}")
    per_decade = points_per_decade or settings["points_per_decade"]
    count = int(np.ceil(np.log10(t_max / t_min) * per_decade)) + 1
    return np.concatenate([[0.0], np.logspace(np.log10(t_min), np.log10(t_max), count)])


def wrap_time_grid(v: float, t_max: float) -> np.ndarray:
    """Times j/|v| at which x0 + v t lands on a lattice site."""
    if v == 0:
        raise ZeroVelocity("world-line sampling needs a nonzero drift velocity")
    return np.arange(int(np.floor(t_max * abs(v))) + 1) / abs(v)


def _check_times(t_list) -> np.ndarray:
    times = np.asarray(t_list, dtype=float)
    if times.ndim != 1 or len(times) == 0 or times[0] != 0:
        raise DomainError("time lists must be one-dimensional and start at t = 0")
    if np.any(np.diff(times) <= 0):
        raise DomainError("time lists must be strictly increasing")
    return times


def _pick(states: np.ndarray, rows) -> np.ndarray:
    if rows is None:
        return states
    return states[np.arange(len(states)), rows]


def _evolve_eig(model: LatticeModel, L: int, boundary: Boundary, psi0: np.ndarray, times: np.ndarray, rows):
    """Biorthogonal resolution e^{-iHt} = sum_n R_n e^{-iE_n t} L_n, on the balanced matrix for OBC."""
    if boundary == "OBC":
        r = balancing_radius(model, L)
        H = real_space_hamiltonian(rescaled(model, r), L, "OBC")
        cells = np.repeat(np.arange(L), model.q)
        center = cells[np.argmax(np.abs(psi0))]
        scaling = float(r) ** (cells - center)
    else:
        H = real_space_hamiltonian(model, L, "PBC")
        scaling = np.ones(model.q * L)

    energies, vectors, inverse, condition = dense_eig(H)
    if inverse is None or condition > options["spectral"]["ep_condition"]:
        raise NonDiagonalizable(f"eigenvector condition {condition:.3g} exceeds threshold")
    coefficients = inverse @ (psi0 / scaling)

    def chunk(bounds):
        lo, hi = bounds
        phases = np.exp(-1j * np.outer(energies, times[lo:hi])) * coefficients[:, None]
        if rows is None:
            return (vectors @ phases).T * scaling
        picked = rows[lo:hi]
        return np.einsum("tn,nt->t", vectors[picked], phases) * scaling[picked]

    pieces = parallel_map(chunk, [(lo, min(lo + CHUNK, len(times))) for lo in range(0, len(times), CHUNK)])
    return np.concatenate(pieces)


def _evolve_rk(model: LatticeModel, L: int, boundary: Boundary, psi0: np.ndarray, times: np.ndarray,
               tolerance: float, rows):
    H = real_space_hamiltonian(model, L, boundary, sparse=True)
    sol = solve_ivp(lambda _, y: -1j * (H @ y), (0.0, times[-1]), psi0.astype(complex), method="DOP853",
                    t_eval=times, rtol=tolerance, atol=tolerance * settings["amplitude_floor"])
    if sol.status != 0:
        raise NonDiagonalizable(f"Runge-Kutta integration failed: {sol.message}")
    return _pick(sol.y.T, rows)


def _evolve_momentum(model: LatticeModel, L: int, psi0: np.ndarray, times: np.ndarray, rows):
    """PBC evolution as independent q x q exponentials per allowed momentum."""
    k = 2 * np.pi * np.arange(L) / L
    h = bloch_momentum(model, k)
    modes = np.fft.fft(psi0.reshape(L, model.q), axis=0) / L

    def one(t):
        evolved = np.einsum("kab,kb->ka", expm(-1j * t * h), modes)
        return (np.fft.ifft(evolved, axis=0) * L).reshape(-1)

    return _pick(np.array(parallel_map(one, times)), rows)


def _propagate(model: LatticeModel, L: int, boundary: Boundary, psi0: np.ndarray, times: np.ndarray,
               plan: EvolutionPlan, rows=None):
    method = plan.method
    if method == "momentum" and boundary != "PBC":
        raise DomainError("the momentum-space method needs periodic boundaries")

    if method == "eig":
        try:
            result = _evolve_eig(model, L, boundary, psi0, times, rows)
        except NonDiagonalizable as e:
            logger.warning(f"Eigendecomposition unusable ({e}); falling back to Runge-Kutta")
            method = "rk"
            result = _evolve_rk(model, L, boundary, psi0, times, plan.tolerance, rows)
    elif method == "rk":
        result = _evolve_rk(model, L, boundary, psi0, times, plan.tolerance, rows)
    else:
        result = _evolve_momentum(model, L, psi0, times, rows)

    if plan.cross_check:
        reference = _evolve_rk(model, L, boundary, psi0, times, plan.tolerance, rows)
        error = float(np.max(np.abs(result - reference)) / max(np.max(np.abs(reference)), 1e-300))
        if error > 1e-8:
            logger.warning(f"{method} and Runge-Kutta evolutions disagree by {error:.3g}")
        else:
            logger.debug(f"Cross-check agreement {error:.3g}")
    return result, method


def _delta(model: LatticeModel, L: int, x0: int, orbital: int) -> np.ndarray:
    if not 0 <= x0 < L:
        raise DomainError(f"x0={x0} outside 0..{L - 1}")
    if not 0 <= orbital < model.q:
        raise DomainError(f"orbital {orbital} outside 0..{model.q - 1}")
    psi0 = np.zeros(model.q * L, dtype=complex)
    psi0[model.q * x0 + orbital] = 1.0
    return psi0


def evolve_state(model: LatticeModel, L: int, boundary: Boundary, initial, t_list,
                 plan: Optional[EvolutionPlan] = None) -> np.ndarray:
    """
    States psi(t) = e^{-iHt} psi(0) at every requested time.

    Args:
        model: lattice model.
        L: number of unit cells.
        boundary: "OBC" or "PBC".
        initial: unit-norm state of length qL.
        t_list: strictly increasing times starting at 0.
        plan: evolution method; eigendecomposition by default, falling back to
            Runge-Kutta when the eigenvectors are too ill-conditioned.

    Returns:
        np.ndarray: trajectory of shape (len(t_list), qL).
    """
    plan = plan or EvolutionPlan()
    boundary = boundary.upper()
    psi0 = np.asarray(initial, dtype=complex)
    if psi0.shape != (model.q * L,):
        raise DomainError(f"initial state must have length {model.q * L}")
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise DomainError("initial state must have unit norm")
    states, _ = _propagate(model, L, boundary, psi0, _check_times(t_list), plan)
    return states


def local_green(model: LatticeModel, L: int, boundary: Boundary, x0: int, orbital: int, t_list,
                plan: Optional[EvolutionPlan] = None) -> GreensSeries:
    """Return amplitude <x0,a| e^{-iHt} |x0,a>."""
    plan = plan or EvolutionPlan()
    boundary = boundary.upper()
    times = _check_times(t_list)
    psi0 = _delta(model, L, x0, orbital)
    rows = np.full(len(times), model.q * x0 + orbital)
    values, method = _propagate(model, L, boundary, psi0, times, plan, rows)
    logger.info(f"Local Green's function: L={L} {boundary} x0={x0} over {len(times)} times ({method})")
    return GreensSeries(times=times, values=values, meta={
        "L": L, "boundary": boundary, "x0": x0, "orbital": orbital, "kind": "local", "v": None, "method": method,
    })


def worldline_green(model: LatticeModel, L: int, x0: int, v: float, t_max: float, orbital: int = 0,
                    plan: Optional[EvolutionPlan] = None) -> GreensSeries:
    """
    Amplitude along m = x0 + v t under PBC, sampled when m is a lattice site.

    Site indices wrap modulo L, so at multiples of L/|v| the value coincides with
    the local Green's function.
    """
    plan = plan or EvolutionPlan()
    times = wrap_time_grid(v, t_max)
    steps = np.arange(len(times))
    sites = np.mod(x0 + int(np.sign(v)) * steps, L)
    psi0 = _delta(model, L, x0, orbital)
    values, method = _propagate(model, L, "PBC", psi0, times, plan, model.q * sites + orbital)
    logger.info(f"World-line Green's function: L={L} v={v} over {len(times)} sites ({method})")
    return GreensSeries(times=times, values=values, meta={
        "L": L, "boundary": "PBC", "x0": x0, "orbital": orbital, "kind": "worldline", "v": v, "method": method,
    })


def crossover_time(model: LatticeModel, L: int, n_k: Optional[int] = None) -> float:
    """t_c = L / (max_k v + |min_k v|) for the band with the widest velocity range."""
    velocities = band_velocities(pbc_bands(model, n_k))
    spread = (velocities.max(axis=1) + np.abs(velocities.min(axis=1))).max()
    t_c = L / spread
    logger.debug(f"Crossover time t_c={t_c:.6g} for L={L}")
    return float(t_c)


def quadrature_green(model: LatticeModel, x0: int, orbital: int, t_list, n_k: int = 2048) -> GreensSeries:
    """
    Infinite-lattice local Green's function as a uniform Bloch-momentum sum
    (1/N_k) sum_k sum_n g_n^{aa}(k) e^{-iE_n(k) t}; x0 only labels the output.
    """
    times = _check_times(t_list)
    k = 2 * np.pi * np.arange(1, n_k + 1) / n_k
    energies, right, left = eigensystem(model, k)
    weights = right[:, orbital, :] * left[:, :, orbital]

    def chunk(bounds):
        lo, hi = bounds
        return np.exp(-1j * np.outer(times[lo:hi], energies.ravel())) @ weights.ravel() / n_k

    pieces = parallel_map(chunk, [(lo, min(lo + CHUNK, len(times))) for lo in range(0, len(times), CHUNK)])
    return GreensSeries(times=times, values=np.concatenate(pieces), meta={
        "L": None, "boundary": "PBC", "x0": x0, "orbital": orbital, "kind": "local", "v": None,
        "method": f"quadrature N_k={n_k}",
    })
