"""Dissipative tight-binding lattices: hopping maps, Bloch matrices, real-space matrices.

The hopping map follows H = sum t_{y-x}^{ab} |x,a><y,b|: the amplitude stored under
offset l couples cell x to cell x+l, so Bloch eigenstates go as beta**x and
h(beta)_ab = sum_l t_l^ab beta**l. A hop moving a particle from x to x+1 is therefore
stored under l = -1 and contributes beta**-1, so group velocities carry the opposite sign
to the convention that puts rightward hops on beta; only |v| is compared downstream.
Orbitals are flattened as index = q*x + a.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Dict, Literal, Mapping, Tuple, Union

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict

from lattice.errors import ConfigError, DomainError, GainNotSupported, SizeError

logger = logging.getLogger(__name__)

Hopping = Tuple[int, int, int]
Boundary = Literal["OBC", "PBC"]

A, B = 0, 1


@dataclass(frozen=True, eq=False)
class LatticeModel:
    q: int
    hop_range: int
    hoppings: Mapping[Hopping, complex]
    notes: str = ""

    def __post_init__(self):
        if self.q < 1 or self.hop_range < 1:
            raise DomainError(f"q and hop_range must be positive, got q={self.q}, N={self.hop_range}")

        merged: Dict[Hopping, complex] = {}
        for (l, a, b), amplitude in self.hoppings.items():
            if abs(l) > self.hop_range:
                raise DomainError(f"hopping offset {l} exceeds range {self.hop_range}")
            if not (0 <= a < self.q and 0 <= b < self.q):
                raise DomainError(f"orbital pair ({a}, {b}) outside 0..{self.q - 1}")
            key = (int(l), int(a), int(b))
            merged[key] = merged.get(key, 0j) + complex(amplitude)
        merged = {key: amp for key, amp in sorted(merged.items()) if amp != 0}
        if not merged:
            raise DomainError("a lattice model needs at least one nonzero hopping")
        object.__setattr__(self, "hoppings", MappingProxyType(merged))

        onsite = self.blocks[self.hop_range]
        loss = (onsite - onsite.conj().T) / 2j
        if np.linalg.eigvalsh(loss).max() > 1e-12:
            raise GainNotSupported("on-site block has gain (positive anti-Hermitian part)")

    @cached_property
    def blocks(self) -> np.ndarray:
        """Hopping matrices stacked as blocks[l + N] = t_l, shape (2N+1, q, q)."""
        out = np.zeros((2 * self.hop_range + 1, self.q, self.q), dtype=complex)
        for (l, a, b), amplitude in self.hoppings.items():
            out[l + self.hop_range, a, b] = amplitude
        return out

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.hop_range, self.hop_range + 1)

    @property
    def n_roots(self) -> int:
        """2M = 2qN, the number of roots of the characteristic polynomial."""
        return 2 * self.q * self.hop_range


class ModelParamsLadder(BaseModel):
    model_config = ConfigDict(frozen=True)

    t0: float
    t1: float
    gamma: float
    tp: float = 0.0
    phi: float = 0.0


class ModelSpec(ModelParamsLadder):
    """JSON model block: {"model": ..., "t0": ..., "t1": ..., "tp": ..., "gamma": ..., "phi": ...}."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    model: Literal["ladder_trivial", "ladder_flux"]


@dataclass(frozen=True, eq=False)
class BlochMatrix:
    beta: complex
    entries: np.ndarray


def _check_gamma(gamma):
    if gamma < 0:
        raise GainNotSupported(f"gamma={gamma} < 0 describes gain, which is not modelled")


def make_ladder_trivial(params: ModelParamsLadder) -> LatticeModel:
    """Lossy two-leg ladder with intracell t0, intercell t1 and loss gamma on sublattice B."""
    _check_gamma(params.gamma)
    if params.tp != 0:
        raise DomainError("the trivial ladder has no same-sublattice hopping (tp must be 0)")
    t0, t1 = params.t0, params.t1
    hoppings = {
        (0, A, B): t0,
        (0, B, A): t0,
        (0, B, B): -1j * params.gamma,
        (1, A, B): t1,
        (-1, A, B): t1,
        (1, B, A): t1,
        (-1, B, A): t1,
    }
    return LatticeModel(q=2, hop_range=1, hoppings=hoppings,
                        notes=f"ladder_trivial t0={t0} t1={t1} gamma={params.gamma}")


def make_ladder_flux(params: ModelParamsLadder) -> LatticeModel:
    """
    Ladder with Peierls-phased same-sublattice hopping tp and flux phi per plaquette.

    The phase is attached so that h(beta) = h_x s_x + h_z s_z + h_0 with
    h_x = t0 + t1 (b + 1/b), h_z = i tp sin(phi) (b - 1/b) + i gamma/2 and
    h_0 = tp cos(phi) (b + 1/b) - i gamma/2.
    """
    _check_gamma(params.gamma)
    trivial = make_ladder_trivial(params.model_copy(update={"tp": 0.0}))
    hoppings = dict(trivial.hoppings)
    phase = np.exp(1j * params.phi)
    for key, amplitude in {
        (1, A, A): params.tp * phase,
        (-1, A, A): params.tp * phase.conjugate(),
        (1, B, B): params.tp * phase.conjugate(),
        (-1, B, B): params.tp * phase,
    }.items():
        hoppings[key] = hoppings.get(key, 0j) + amplitude
    return LatticeModel(q=2, hop_range=1, hoppings=hoppings,
                        notes=(f"ladder_flux t0={params.t0} t1={params.t1} tp={params.tp} "
                               f"gamma={params.gamma} phi={params.phi}"))


def make_chain(t_right: complex, t_left: complex = None, onsite: complex = 0.0) -> LatticeModel:
    """Single-orbital chain; t_right moves a particle from x to x+1. Equal hoppings give 2t cos k."""
    if t_left is None:
        t_left = t_right
    hoppings = {(-1, 0, 0): t_right, (1, 0, 0): t_left, (0, 0, 0): onsite}
    return LatticeModel(q=1, hop_range=1, hoppings=hoppings,
                        notes=f"chain t_right={t_right} t_left={t_left} onsite={onsite}")


def rescaled(model: LatticeModel, r: float) -> LatticeModel:
    """Model with t_l -> t_l r**l, i.e. h(beta) -> h(r beta). OBC-similar to the original."""
    hoppings = {(l, a, b): amp * r ** l for (l, a, b), amp in model.hoppings.items()}
    return LatticeModel(q=model.q, hop_range=model.hop_range, hoppings=hoppings,
                        notes=f"{model.notes} rescaled r={r:.6g}")


def model_from_spec(spec: ModelSpec) -> LatticeModel:
    params = ModelParamsLadder(t0=spec.t0, t1=spec.t1, gamma=spec.gamma, tp=spec.tp, phi=spec.phi)
    if spec.model == "ladder_trivial":
        return make_ladder_trivial(params)
    return make_ladder_flux(params)


def load_model(document: Union[str, Mapping]) -> LatticeModel:
    """Build a model from a JSON document (string or already-parsed mapping)."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ConfigError(f"model document is not valid JSON: {e}")
    return model_from_spec(ModelSpec.model_validate(document))


def bloch_stack(model: LatticeModel, betas) -> np.ndarray:
    """h(beta) for an array of Bloch factors, shape (n, q, q)."""
    betas = np.atleast_1d(np.asarray(betas, dtype=complex))
    if np.any(betas == 0):
        raise DomainError("beta = 0: the Laurent polynomial h(beta) is undefined")
    powers = betas[:, None] ** model.offsets[None, :]
    return np.tensordot(powers, model.blocks, axes=(1, 0))


def bloch(model: LatticeModel, beta: complex) -> BlochMatrix:
    beta = complex(beta)
    return BlochMatrix(beta=beta, entries=bloch_stack(model, beta)[0])


def bloch_momentum(model: LatticeModel, k) -> np.ndarray:
    return bloch_stack(model, np.exp(1j * np.asarray(k, dtype=float)))


def _shift(L: int, l: int, boundary: Boundary, sparse: bool):
    if boundary == "OBC":
        return sp.eye(L, k=l, format="csr") if sparse else np.eye(L, k=l)
    shift = np.roll(np.eye(L), l, axis=1)
    return sp.csr_matrix(shift) if sparse else shift


def real_space_hamiltonian(model: LatticeModel, L: int, boundary: Boundary = "OBC", sparse: bool = False):
    """
    qL x qL matrix of the model on L cells.

    OBC drops hoppings leaving the chain, PBC wraps offsets modulo L.
    """
    boundary = boundary.upper()
    if boundary not in ("OBC", "PBC"):
        raise DomainError(f"unknown boundary condition {boundary!r}")
    if L <= 2 * model.hop_range:
        raise SizeError(f"L={L} must exceed 2N={2 * model.hop_range}")

    kron = sp.kron if sparse else np.kron
    H = None
    for l, block in zip(model.offsets, model.blocks):
        if not np.any(block):
            continue
        term = kron(_shift(L, int(l), boundary, sparse), block)
        H = term if H is None else H + term
    if sparse:
        return sp.csr_matrix(H, dtype=complex)
    return np.asarray(H, dtype=complex)


def figure_models() -> Dict[str, LatticeModel]:
    """The four parameter sets used throughout the tests and presets."""
    half_pi = math.pi / 2
    return {
        "trivial_critical_half": make_ladder_trivial(ModelParamsLadder(t0=0.5, t1=0.5, gamma=0.8)),
        "trivial_critical_one": make_ladder_trivial(ModelParamsLadder(t0=1.0, t1=0.5, gamma=0.8)),
        "flux_a": make_ladder_flux(ModelParamsLadder(t0=0.5, t1=0.5, tp=0.3, gamma=0.8, phi=half_pi)),
        "flux_b": make_ladder_flux(ModelParamsLadder(t0=1.0, t1=0.5, tp=0.7, gamma=0.8, phi=half_pi)),
    }
