"""
Saddle points of complex band functions and the long-time asymptotics they control.

A band of a q <= 2 model is written E(beta) = h0(beta) + W(beta) with
W**2 = D(beta); W is carried along every numerical path so the band is
continued across branch cuts instead of being relabelled. Band +1 is the
square-root branch with Im W >= 0, the band with the larger imaginary part.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import gamma as gamma_fn
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from lattice.errors import (BranchPointCollision, ConvergenceError, DomainError, NoContributingSaddle,
                            OrderUndetermined, StallError, VanishingResidue)
from lattice.laurent import Laurent
from lattice.model import LatticeModel
from options import options
from toolkit.parallel import parallel_map

logger = logging.getLogger(__name__)

settings = options["asymptotics"]

BETA_MIN, BETA_MAX = 1e-3, 1e3


def _upper_sqrt(D):
    w = np.sqrt(np.asarray(D, dtype=complex))
    flip = (w.imag < 0) | ((w.imag == 0) & (w.real < 0))
    return np.where(flip, -w, w)


def _nearest_root(D, reference):
    w = np.sqrt(np.asarray(D, dtype=complex))
    return np.where(np.abs(w - reference) <= np.abs(w + reference), w, -w)


@dataclass(frozen=True, eq=False)
class BandFunction:
    model: LatticeModel
    band: int
    h0: Laurent
    delta: Laurent
    D: Laurent

    @classmethod
    def from_model(cls, model: LatticeModel, band: int = 1) -> "BandFunction":
        if model.q > 2:
            raise DomainError(f"analytic band functions are available for q <= 2, got q={model.q}")
        if band not in (1, -1) or (model.q == 1 and band != 1):
            raise DomainError(f"band must be +1 or -1 (only +1 for q=1), got {band}")

        def entry(a, b):
            return Laurent.from_coefficients(model.blocks[:, a, b], -model.hop_range)

        if model.q == 1:
            zero = Laurent.from_coefficients([0])
            return cls(model, band, entry(0, 0), zero, zero)
        h_aa, h_bb = entry(0, 0), entry(1, 1)
        delta = (h_aa - h_bb) * 0.5
        return cls(model, band, (h_aa + h_bb) * 0.5, delta, delta * delta + entry(0, 1) * entry(1, 0))

    @cached_property
    def scale(self) -> float:
        return float(np.abs(self.model.blocks).sum()) or 1.0

    @cached_property
    def dh0(self) -> Laurent:
        return self.h0.deriv()

    @cached_property
    def dD(self) -> Laurent:
        return self.D.deriv()

    @property
    def single_sheet(self) -> bool:
        return self.D.is_zero(1e-14 * self.scale)

    @cached_property
    def branch_points(self) -> np.ndarray:
        if self.single_sheet:
            return np.array([], dtype=complex)
        return self.D.roots()

    def root(self, beta):
        """W on this band's global sheet."""
        if self.single_sheet:
            return np.zeros_like(np.asarray(beta, dtype=complex))
        return self.band * _upper_sqrt(self.D(beta))

    def energy(self, beta):
        return self.h0(beta) + self.root(beta)

    def follow(self, betas: Sequence[complex], W_start: complex):
        """E and W along an ordered sequence of points, continuing W from W_start."""
        betas = np.asarray(betas, dtype=complex)
        if self.single_sheet:
            return self.h0(betas), np.zeros_like(betas)
        D = self.D(betas)
        W = np.empty_like(betas)
        previous = complex(W_start)
        for j, d in enumerate(D):
            previous = complex(_nearest_root(d, previous))
            W[j] = previous
        return self.h0(betas) + W, W

    def derivative(self, beta, W):
        if self.single_sheet:
            return self.dh0(beta)
        return self.dh0(beta) + self.dD(beta) / (2 * W)

    def weight(self, beta, W, orbital: int = 0):
        """Diagonal band weight g^{aa} = R_a L_a on the sheet selected by W."""
        if self.single_sheet:
            return np.ones_like(np.asarray(beta, dtype=complex))
        sign = 1 if orbital == 0 else -1
        return (sign * self.delta(beta) + W) / (2 * W)

    def saddle_equation(self) -> Laurent:
        """Laurent polynomial whose roots contain dE/dbeta = 0 on either sheet."""
        if self.single_sheet:
            return self.dh0
        if self.dh0.is_zero(1e-12 * self.scale):
            return self.dD
        return 4 * self.dh0 * self.dh0 * self.D - self.dD * self.dD

    def worldline_equation(self, v: float) -> Laurent:
        """Roots contain i beta dE/dbeta = v, i.e. the k-saddles of E(k) - k v."""
        beta = Laurent.from_coefficients([1], 1)
        drift = 1j * beta * self.dh0 - v
        if self.single_sheet:
            return drift
        return 4 * drift * drift * self.D + beta * beta * self.dD * self.dD


@dataclass(frozen=True, eq=False)
class SaddlePoint:
    band: int
    beta_s: complex
    order: int
    E_s: complex
    lead_deriv: complex
    on_unit_circle: bool
    root: complex
    taylor: np.ndarray
    radius: float
    multiplicity: int = 1
    thimble_coeff_parity: Optional[str] = None
    k_s: Optional[complex] = None
    velocity: Optional[float] = None

    @property
    def lead_coeff(self) -> complex:
        """c_n = E^{(n)}(beta_s)/n!."""
        return complex(self.taylor[self.order])

    def sort_key(self):
        return (round(self.beta_s.real, 10), round(self.beta_s.imag, 10), -self.band)


@dataclass(frozen=True, eq=False)
class SteepestPath:
    direction: str
    beta: np.ndarray
    root: np.ndarray
    energy: np.ndarray
    crossings: int
    termination: str


@dataclass(frozen=True, eq=False)
class DominantSaddle:
    saddles: Tuple[SaddlePoint, ...]
    multiple_dominant: bool
    candidates: Tuple[SaddlePoint, ...] = ()

    @property
    def primary(self) -> SaddlePoint:
        return self.saddles[0]

    @property
    def rate(self) -> float:
        return self.primary.E_s.imag


@dataclass(frozen=True)
class PredictionTerm:
    beta_s: complex
    E_s: complex
    order: int
    prefactor: complex
    reduced: complex
    validity_from: float


@dataclass(frozen=True, eq=False)
class AsymptoticPrediction:
    kind: str
    exponent: float
    prefactor: complex
    E_s: complex
    validity_from: float
    terms: Tuple[PredictionTerm, ...]

    @property
    def rate(self) -> float:
        """Exponential envelope rate Im E_s."""
        return self.E_s.imag

    def oscillation(self, t):
        return np.exp(-1j * self.E_s * np.asarray(t, dtype=float))

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        total = np.zeros_like(t, dtype=complex)
        for term in self.terms:
            total += term.prefactor * t ** (-1.0 / term.order) * np.exp(-1j * term.E_s * t)
        return total


def band_functions(model: LatticeModel, band: Optional[int] = None) -> List[BandFunction]:
    bands = (band,) if band is not None else ((1,) if model.q == 1 else (1, -1))
    return [BandFunction.from_model(model, b) for b in bands]


def _clustered_roots(equation: Laurent) -> List[Tuple[complex, int]]:
    """Roots merged within cluster_tol; a cluster is replaced by its centroid."""
    clusters: List[List[complex]] = []
    for r in sorted(equation.roots(), key=lambda z: (z.real, z.imag)):
        for cluster in clusters:
            if abs(r - np.mean(cluster)) < settings["cluster_tol"]:
                cluster.append(r)
                break
        else:
            clusters.append([r])
    return [(complex(np.mean(c)), len(c)) for c in clusters if abs(np.mean(c)) > 1e-12]


def _newton(poly, dpoly, start: complex, anchor: complex) -> complex:
    z = start
    for _ in range(50):
        slope = dpoly(z)
        if slope == 0:
            raise ConvergenceError(f"flat Newton step at {z}")
        step = poly(z) / slope
        z -= step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    else:
        raise ConvergenceError(f"Newton did not converge from {start}")
    if abs(z - anchor) > settings["cluster_tol"]:
        raise ConvergenceError(f"Newton wandered from {anchor} to {z}")
    return complex(z)


def _polish(equation: Laurent, seed: complex) -> complex:
    """Newton on the saddle polynomial, restarted from deterministic perturbed seeds."""
    poly = equation.numerator()
    dpoly = poly.deriv()
    restarts = settings["newton_restarts"]
    for attempt in Retrying(stop=stop_after_attempt(restarts),
                            retry=retry_if_exception_type(ConvergenceError), reraise=True):
        with attempt:
            k = attempt.retry_state.attempt_number - 1
            start = seed * (1 + (1e-6 * np.exp(2j * np.pi * k / restarts) if k else 0))
            return _newton(poly, dpoly, start, seed)


def _cauchy_taylor(evaluate, center: complex, radius: float):
    """Taylor coefficients c_p from a circle of `cauchy_nodes` samples; also returns the sample values."""
    nodes = settings["cauchy_nodes"]
    circle = center + radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    values = evaluate(circle)
    terms = np.fft.fft(values) / nodes
    half = nodes // 2
    return terms[:half] / radius ** np.arange(half), values


def _order_from_taylor(taylor: np.ndarray, radius: float, scale: float) -> int:
    terms = np.abs(taylor) * radius ** np.arange(len(taylor))
    threshold = max(settings["order_tol"] * terms[1:].max(), 1e-13 * scale)
    for p in range(2, settings["max_order"] + 1):
        if terms[p] > threshold:
            return p
    raise OrderUndetermined(f"no Taylor coefficient up to order {settings['max_order']} exceeds {threshold:.3g}")


def _cauchy_radius(center: complex, singular: Sequence[complex]) -> float:
    distances = [abs(center)] + [abs(center - s) for s in singular if abs(center - s) > settings["cluster_tol"]]
    return max(0.1 * min(distances), 1e-3)


def _check_branch(bf: BandFunction, beta: complex):
    if len(bf.branch_points) and np.abs(bf.branch_points - beta).min() < settings["branch_tol"]:
        raise BranchPointCollision(f"saddle candidate {beta} sits on a branch point of the band")


def saddle_order(band_function: BandFunction, beta_s: complex, radius: Optional[float] = None,
                 root: Optional[complex] = None) -> int:
    """Order n of the saddle at beta_s: the first p >= 2 with a non-negligible Taylor coefficient."""
    root = band_function.root(beta_s) if root is None else root
    if radius is None:
        others = [b for b, _ in _clustered_roots(band_function.saddle_equation())]
        radius = _cauchy_radius(beta_s, list(band_function.branch_points) + others)
    taylor, _ = _cauchy_taylor(lambda pts: band_function.follow(pts, root)[0], beta_s, radius)
    return _order_from_taylor(taylor, radius, band_function.scale)


def _classify(bf: BandFunction, beta: complex, multiplicity: int, others: Sequence[complex]) -> Optional[SaddlePoint]:
    _check_branch(bf, beta)
    W = complex(bf.root(beta))
    slope = complex(bf.derivative(beta, W))
    size = 1 + abs(complex(bf.dh0(beta))) + (0 if bf.single_sheet else abs(complex(bf.dD(beta)) / (2 * W)))
    if abs(slope) > settings["newton_tol"] * size:
        return None

    radius = _cauchy_radius(beta, list(bf.branch_points) + list(others))
    taylor, _ = _cauchy_taylor(lambda pts: bf.follow(pts, W)[0], beta, radius)
    order = _order_from_taylor(taylor, radius, bf.scale)
    return SaddlePoint(
        band=bf.band,
        beta_s=beta,
        order=order,
        E_s=complex(bf.h0(beta) + W),
        lead_deriv=complex(taylor[order] * math.factorial(order)),
        on_unit_circle=abs(abs(beta) - 1) < 1e-8,
        root=W,
        taylor=taylor,
        radius=radius,
        multiplicity=multiplicity,
    )


def saddle_points(model: LatticeModel, band: Optional[int] = None) -> List[SaddlePoint]:
    """
    All saddles dE/dbeta = 0 of the band (both bands when `band` is None).

    The saddle condition is reduced to a polynomial by clearing powers of beta
    and the square root; clustered roots stand for multiple roots, simple ones
    are Newton-polished before each sheet is tested.
    """
    found: List[SaddlePoint] = []
    for bf in band_functions(model, band):
        equation = bf.saddle_equation()
        roots = _clustered_roots(equation)
        for beta, multiplicity in roots:
            if multiplicity == 1:
                beta = _polish(equation, beta)
            others = [b for b, _ in roots if b != beta]
            saddle = _classify(bf, beta, multiplicity, others)
            if saddle is not None:
                found.append(saddle)
    found.sort(key=SaddlePoint.sort_key)
    logger.info(f"Found {len(found)} saddle points: "
                + ", ".join(f"beta={s.beta_s:.6g} n={s.order} E={s.E_s:.6g}" for s in found))
    return found


def steepest_directions(saddle: SaddlePoint, direction: str = "ascent") -> np.ndarray:
    """The n unit directions u with c_n u**n = +i|c_n| (ascent) or -i|c_n| (descent)."""
    c = saddle.lead_coeff
    target = (1j if direction == "ascent" else -1j) * abs(c) / c
    base = target ** (1.0 / saddle.order)
    return base * np.exp(2j * np.pi * np.arange(saddle.order) / saddle.order)


def _project(bf: BandFunction, betas: np.ndarray, roots: np.ndarray, target: float):
    """Newton steps moving each point back onto Re E = target."""
    for _ in range(3):
        energy = bf.h0(betas) + roots
        slope = bf.derivative(betas, roots)
        step = (energy.real - target) * np.conj(slope) / np.abs(slope) ** 2
        # points next to the saddle have E' ~ 0 and are already on the curve
        betas = betas - np.where(np.abs(step) < 1e-3 * np.abs(betas), step, 0)
        if not bf.single_sheet:
            roots = _nearest_root(bf.D(betas), roots)
    return betas, bf.h0(betas) + roots


def _integrate(bf: BandFunction, beta0: complex, W0: complex, sign: int, direction: str) -> SteepestPath:
    stall_floor = 1e-10 * bf.scale

    def rhs(_, y):
        beta, W = y
        if bf.single_sheet:
            return np.array([sign * 1j / complex(bf.dh0(beta)), 0j])
        dD = complex(bf.dD(beta))
        denom = 2 * W * complex(bf.dh0(beta)) + dD
        return np.array([sign * 2j * W / denom, sign * 1j * dD / denom])

    def crossing(_, y):
        return abs(y[0]) - 1.0

    def inner(_, y):
        return abs(y[0]) - BETA_MIN

    def outer(_, y):
        return abs(y[0]) - BETA_MAX

    def stalled(_, y):
        beta, W = y
        if bf.single_sheet:
            return abs(complex(bf.dh0(beta))) - stall_floor
        return abs(2 * W * complex(bf.dh0(beta)) + complex(bf.dD(beta))) - stall_floor

    inner.terminal = outer.terminal = stalled.terminal = True
    stalled.direction = -1

    tau_max = 1e6 * bf.scale
    sol = solve_ivp(rhs, (0.0, tau_max), np.array([beta0, W0], dtype=complex), method="DOP853",
                    rtol=1e-10, atol=1e-12, events=[crossing, inner, outer, stalled])
    betas, roots = sol.y[0], sol.y[1]
    if sol.status == -1 or len(sol.t_events[3]):
        raise StallError(f"{direction} path from {beta0:.6g} stalled: {sol.message}",
                         partial_path=betas)

    if len(sol.t_events[1]):
        termination = "inner"
    elif len(sol.t_events[2]):
        termination = "outer"
    else:
        termination = "cap"
    return SteepestPath(direction=direction, beta=betas, root=roots, energy=bf.h0(betas) + roots,
                        crossings=len(sol.t_events[0]), termination=termination)


def trace_constant_ReE_path(band_function: BandFunction, saddle: SaddlePoint,
                            direction: str = "ascent") -> List[SteepestPath]:
    """
    Constant-Re E curves leaving the saddle, one per steepest direction.

    Integrates d beta/d tau = +-i/E'(beta) with tau = +-Im E, so Im E is the
    curve parameter; the square root W is integrated alongside beta.
    """
    if direction not in ("ascent", "descent"):
        raise DomainError(f"direction must be 'ascent' or 'descent', got {direction!r}")
    sign = 1 if direction == "ascent" else -1
    epsilon = 1e-4 * abs(saddle.beta_s)

    paths = []
    for u in steepest_directions(saddle, direction):
        beta0 = saddle.beta_s + epsilon * u
        W0 = complex(band_function.follow([beta0], saddle.root)[1][0])
        path = _integrate(band_function, beta0, W0, sign, direction)
        betas, energy = _project(band_function, path.beta, path.root, saddle.E_s.real)
        paths.append(replace(path, beta=betas, root=energy - band_function.h0(betas), energy=energy))
    return paths


def _parity(bf: BandFunction, saddle: SaddlePoint) -> str:
    if saddle.on_unit_circle:
        return "nonzero"
    try:
        crossings = sum(p.crossings for p in trace_constant_ReE_path(bf, saddle, "ascent"))
    except StallError as e:
        logger.warning(f"Saddle beta={saddle.beta_s:.6g} (Im E={saddle.E_s.imag:.6g}) left undetermined: {e}")
        return "undetermined"
    logger.debug(f"Saddle beta={saddle.beta_s:.6g}: {crossings} unit-circle crossings")
    return "nonzero" if crossings % 2 else "zero"


def dominant_saddle(model: LatticeModel, band: Optional[int] = None) -> DominantSaddle:
    """
    The saddle(s) with largest Im E_s among those whose steepest-ascent curves
    cross |beta| = 1 an odd number of times.

    A saddle whose ascent curve stalls at another saddle (a Stokes configuration)
    gets the parity "undetermined" and is left out of the dominance decision.
    """
    saddles = saddle_points(model, band)
    if not saddles:
        raise NoContributingSaddle("the band function has no saddle points")
    functions = {bf.band: bf for bf in band_functions(model, band)}

    traced = parallel_map(lambda s: replace(s, thimble_coeff_parity=_parity(functions[s.band], s)), saddles)
    contributing = [s for s in traced if s.thimble_coeff_parity == "nonzero"]
    if not contributing:
        raise NoContributingSaddle("every saddle has an even or undetermined number of unit-circle crossings")

    top = max(s.E_s.imag for s in contributing)
    winners = tuple(sorted((s for s in contributing if s.E_s.imag >= top - 1e-6), key=SaddlePoint.sort_key))
    if len(winners) > 1:
        logger.info(f"{len(winners)} saddles share the dominant rate Im E = {top:.6g}")
    above = [s for s in traced if s.thimble_coeff_parity == "undetermined" and s.E_s.imag > top + 1e-6]
    if above:
        logger.warning(f"{len(above)} undetermined saddle(s) lie above the dominant rate {top:.6g}")
    return DominantSaddle(saddles=winners, multiple_dominant=len(winners) > 1, candidates=tuple(traced))


def _contour_directions(saddle: SaddlePoint, tangent: complex):
    descent = steepest_directions(saddle, "descent")
    alignment = (np.conj(descent) * tangent).real
    out = int(np.argmax(alignment))
    alignment[out] = np.inf
    return descent[out], descent[int(np.argmin(alignment))]


def _term(saddle: SaddlePoint, g: complex, measure: complex, log_slope: float, tangent: complex) -> PredictionTerm:
    n, c = saddle.order, saddle.lead_coeff
    if abs(g) < 1e-12:
        raise VanishingResidue(f"band weight vanishes at the saddle {saddle.beta_s:.6g}; next order needed")
    u_out, u_in = _contour_directions(saddle, tangent)
    gamma_part = gamma_fn(1.0 / n) / (n * abs(c) ** (1.0 / n))
    prefactor = g * measure * (u_out - u_in) * gamma_part
    reduced = g * gamma_fn(1.0 / n) / (n * (1j * c) ** (1.0 / n))

    next_coeff = abs(saddle.taylor[n + 1]) if n + 1 < len(saddle.taylor) else 0.0
    correction = next_coeff / abs(c) ** ((n + 1.0) / n) + log_slope / abs(c) ** (1.0 / n)
    validity = (10 * correction) ** n
    return PredictionTerm(beta_s=saddle.beta_s, E_s=saddle.E_s, order=n, prefactor=complex(prefactor),
                          reduced=complex(reduced), validity_from=float(validity))


def _assemble(kind: str, terms: List[PredictionTerm]) -> AsymptoticPrediction:
    terms = sorted(terms, key=lambda term: term.order)
    lead = terms[0]
    return AsymptoticPrediction(kind=kind, exponent=-1.0 / lead.order, prefactor=lead.prefactor, E_s=lead.E_s,
                                validity_from=max(term.validity_from for term in terms), terms=tuple(terms))


def predict_local_green(model: LatticeModel, orbital: int = 0, band: Optional[int] = None,
                        dominant: Optional[DominantSaddle] = None) -> AsymptoticPrediction:
    """
    Leading saddle-point estimate of <x0,a| e^{-iHt} |x0,a> for t -> infinity.

    Args:
        model: lattice model with q <= 2.
        orbital: diagonal orbital a.
        band: restrict to one band, or None for both.
        dominant: a precomputed dominant_saddle result.

    Returns:
        AsymptoticPrediction: t^{-1/n} e^{-i E_s t} terms of every dominant saddle.
    """
    dominant = dominant or dominant_saddle(model, band)
    functions = {bf.band: bf for bf in band_functions(model, band)}
    terms = []
    for saddle in dominant.saddles:
        bf = functions[saddle.band]
        beta = saddle.beta_s

        def integrand(b):
            W = bf.follow([b], saddle.root)[1][0]
            return complex(bf.weight(b, W, orbital)) / (2j * np.pi * b)

        h = 1e-6 * abs(beta)
        value = integrand(beta)
        slope = abs((integrand(beta + h) - integrand(beta - h)) / (2 * h) / value) if value else 0.0
        g = complex(bf.weight(beta, saddle.root, orbital))
        terms.append(_term(saddle, g, 1 / (2j * np.pi * beta), slope, 1j * beta / abs(beta)))
    prediction = _assemble("local", terms)
    logger.info(f"Local Green's function ~ t^{prediction.exponent:.4g} exp({prediction.rate:.6g} t)")
    return prediction


def worldline_saddle(model: LatticeModel, v: float, band: Optional[int] = None,
                     k_hint: Optional[float] = None) -> SaddlePoint:
    """Real-k saddle of f(k) = E(e^{ik}) - k v with the largest Im f, nearest k_hint on ties."""
    candidates: List[SaddlePoint] = []
    for bf in band_functions(model, band):
        equation = bf.worldline_equation(v)
        roots = _clustered_roots(equation)
        for beta, multiplicity in roots:
            if abs(abs(beta) - 1) > 1e-6:
                continue
            if multiplicity == 1:
                beta = _polish(equation, beta)
            beta = beta / abs(beta)
            _check_branch(bf, beta)
            W = complex(bf.root(beta))
            mismatch = 1j * beta * complex(bf.derivative(beta, W)) - v
            if abs(mismatch) > 1e-7 * (1 + abs(v) + bf.scale):
                continue

            k_s = float(np.mod(np.angle(beta), 2 * np.pi)) or 2 * np.pi
            others = [b for b, _ in roots if b != beta] + list(bf.branch_points)
            radius = _cauchy_radius(beta, others) / abs(beta)

            def f(ks, W=W, bf=bf):
                return bf.follow(np.exp(1j * ks), W)[0] - v * ks

            taylor, _ = _cauchy_taylor(f, k_s, radius)
            order = _order_from_taylor(taylor, radius, bf.scale + abs(v) * 2 * np.pi)
            candidates.append(SaddlePoint(
                band=bf.band, beta_s=complex(beta), order=order, E_s=complex(bf.h0(beta) + W),
                lead_deriv=complex(taylor[order] * math.factorial(order)), on_unit_circle=True,
                root=W, taylor=taylor, radius=radius, multiplicity=multiplicity, k_s=complex(k_s), velocity=v))

    if not candidates:
        raise NoContributingSaddle(f"f(k) = E(k) - {v} k has no saddle on the real k axis")
    top = max(s.E_s.imag for s in candidates)
    best = [s for s in candidates if s.E_s.imag >= top - 1e-6]
    if k_hint is not None:
        best.sort(key=lambda s: abs(np.angle(np.exp(1j * (s.k_s.real - k_hint)))))
    chosen = best[0]
    logger.info(f"World-line saddle at k={chosen.k_s.real:.6g} (v={v}) of order {chosen.order}")
    return chosen


def predict_worldline_green(model: LatticeModel, v: float, orbital: int = 0, band: Optional[int] = None,
                            k_hint: Optional[float] = None) -> AsymptoticPrediction:
    """Leading estimate of the amplitude along m = x0 + v t, a t^{-1/n'} law from the k-saddle."""
    saddle = worldline_saddle(model, v, band, k_hint)
    bf = BandFunction.from_model(model, saddle.band)
    k_s = saddle.k_s.real

    def weight_at(k):
        W = bf.follow([np.exp(1j * k)], saddle.root)[1][0]
        return complex(bf.weight(np.exp(1j * k), W, orbital))

    h = 1e-6
    g = weight_at(k_s)
    slope = abs((weight_at(k_s + h) - weight_at(k_s - h)) / (2 * h) / g) if g else 0.0
    prediction = _assemble("worldline", [_term(saddle, g, 1 / (2 * np.pi), slope, 1.0)])
    logger.info(f"World-line Green's function ~ t^{prediction.exponent:.4g}")
    return prediction
