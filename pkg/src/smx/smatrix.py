"""Scattering-matrix algebra: star composition, closures, half-line sweeps.

A finite segment of the flattened ("associated") potential carries a 2x2
scattering matrix; a half-line with total reflection carries a scalar
phase factor.  Sweeping outward from an anchor composes slice matrices
until either the domain boundary is reached (then closed analytically) or
the cumulative transmission drops below a truncation threshold, at which
point the cumulative reflection coefficient is already the half-line phase
to that accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import potential as _potential
from . import slices as _slices
from .errors import (
    DomainError,
    InvalidClosureError,
    NonConvergenceError,
    ParameterError,
    ResonanceSingularityError,
)

_RESONANCE_TOL = 1e-14


@dataclass(frozen=True)
class SegmentS:
    """2x2 scattering matrix of the segment [xa, xb]."""

    s11: complex
    s12: complex
    s21: complex
    s22: complex
    xa: float
    xb: float
    k: float


@dataclass(frozen=True)
class PhaseFactor:
    """Unit-modulus scalar S-matrix of a half-line associated potential."""

    value: complex
    anchor: float
    side: str
    k: float


def identity_segment(x, k):
    """Zero-width segment: composing with it changes nothing."""
    return SegmentS(0.0, 1.0, 1.0, 0.0, x, x, k)


def segment_from_slice(sm: _slices.SliceSMatrix) -> SegmentS:
    return SegmentS(sm.s11, sm.s12, sm.s21, sm.s22, sm.xl, sm.xr, sm.k)


def _star_values(a11, a12, a21, a22, b11, b12, b21, b22):
    denom = 1.0 - a22 * b11
    if abs(denom) < _RESONANCE_TOL:
        raise ResonanceSingularityError(
            "standing-wave degeneracy in composition; perturb the energy"
        )
    return (
        a11 + a12 * b11 * a21 / denom,
        a12 * b12 / denom,
        b21 * a21 / denom,
        b22 + b21 * a22 * b12 / denom,
    )


def star(left: SegmentS, right: SegmentS) -> SegmentS:
    """Compose two adjacent segments into one."""
    scale = max(1.0, abs(left.xb))
    if abs(left.xb - right.xa) > 1e-12 * scale:
        raise ParameterError("segments do not share an edge")
    if left.k != right.k:
        raise ParameterError("segments have different exterior wavenumbers")
    s11, s12, s21, s22 = _star_values(
        left.s11, left.s12, left.s21, left.s22,
        right.s11, right.s12, right.s21, right.s22,
    )
    return SegmentS(s11, s12, s21, s22, left.xa, right.xb, left.k)


def _close_value(s11, s12, s21, s22, closure_value):
    denom = 1.0 - s22 * closure_value
    if abs(denom) < _RESONANCE_TOL:
        raise ResonanceSingularityError(
            "standing-wave degeneracy at closure; perturb the energy"
        )
    return s11 + s12 * s21 * closure_value / denom


def close_right(segment: SegmentS, closure: PhaseFactor) -> PhaseFactor:
    """Fold a known right half-line phase through a segment."""
    scale = max(1.0, abs(segment.xb))
    if abs(closure.anchor - segment.xb) > 1e-12 * scale:
        raise ParameterError("closure anchor does not match segment edge")
    if closure.side != "R":
        raise ParameterError("close_right needs a right-side phase")
    value = _close_value(segment.s11, segment.s12, segment.s21, segment.s22,
                         closure.value)
    return PhaseFactor(value=value, anchor=segment.xa, side="R", k=segment.k)


def barrier_phase(anchor=math.nan, k=math.nan, side="R") -> PhaseFactor:
    """Total reflection off an infinite barrier."""
    return PhaseFactor(value=-1.0 + 0.0j, anchor=anchor, side=side, k=k)


def step_phase(energy, v1, v0, anchor=math.nan, side="R") -> PhaseFactor:
    """Total reflection off a potential step up to level v1 > E."""
    if not energy > v0:
        raise ParameterError("step phase requires E > V0")
    if not energy < v1:
        raise InvalidClosureError(
            f"step closure undefined at E = {energy!r} >= V1 = {v1!r}"
        )
    k = math.sqrt(2.0 * (energy - v0))
    kappa = math.sqrt(2.0 * (v1 - energy))
    value = (1j * k + kappa) / (1j * k - kappa)
    return PhaseFactor(value=value, anchor=anchor, side=side, k=k)


@dataclass(frozen=True)
class Slicing:
    """Slice layout for sweeps: uniform half-width ``delta``, or geometric
    half-width center/``ratio`` (widths shrink toward the origin)."""

    delta: float = None
    ratio: float = None

    def __post_init__(self):
        if (self.delta is None) == (self.ratio is None):
            raise ParameterError("specify exactly one of delta (uniform) or ratio (geometric)")
        if self.delta is not None and not self.delta > 0:
            raise ParameterError("delta must be positive")
        if self.ratio is not None and not self.ratio > 1:
            raise ParameterError("ratio must exceed 1")


@dataclass
class CumulativeTrace:
    """Per-slice record of one sweep, as needed to rebuild the wavefunction.

    Arrays are ordered outward from the anchor.  ``cum11..cum22`` hold the
    cumulative segment from the anchor to each slice's near edge (identity
    for the first slice).  ``phip``/``phim`` are in the scaled variable
    tau = (x - center)/half_width, oriented away from the anchor (for a
    left sweep that is the reflected coordinate).
    """

    anchor: float
    direction: str
    energy: float
    k: float
    lambda_order: int
    centers: np.ndarray
    half_widths: np.ndarray
    qhat: np.ndarray
    phip: np.ndarray
    phim: np.ndarray
    s11: np.ndarray
    s12: np.ndarray
    s21: np.ndarray
    s22: np.ndarray
    cum11: np.ndarray
    cum12: np.ndarray
    cum21: np.ndarray
    cum22: np.ndarray
    closure_value: complex
    truncated: bool
    phase: complex

    def __len__(self):
        return len(self.centers)


def _edge_batches(slicing, x0, bound, direction, chunk, max_slices):
    """Yield (edges, final) with edges ordered outward from x0.

    ``final`` marks that the last edge sits exactly on the domain bound.
    Stops after max_slices slices in total.
    """
    outward = 1.0 if direction == "R" else -1.0
    if slicing.ratio is not None:
        if not x0 > 0:
            raise ParameterError("geometric slicing requires a positive anchor")
        rho = (slicing.ratio + 1.0) / (slicing.ratio - 1.0)
        factor = rho if direction == "R" else 1.0 / rho
    e = x0
    emitted = 0
    while emitted < max_slices:
        b = min(chunk, max_slices - emitted)
        if slicing.delta is not None:
            edges = e + outward * 2.0 * slicing.delta * np.arange(b + 1)
        else:
            edges = e * factor ** np.arange(b + 1)
        final = False
        if math.isfinite(bound):
            width_scale = abs(edges[1] - edges[0])
            crossed = (edges >= bound - 1e-12 * width_scale) if direction == "R" else (
                edges <= bound + 1e-12 * width_scale
            )
            idx = np.nonzero(crossed)[0]
            if len(idx):
                j = int(idx[0])
                edges = edges[: j + 1].copy()
                if j > 0:
                    edges[j] = bound
                final = True
        yield edges, final
        emitted += len(edges) - 1
        if final:
            return
        e = edges[-1]
    raise NonConvergenceError(
        f"sweep exceeded {max_slices} slices without truncation or closure"
    )


def sweep_halfline(model, energy, x0, direction, slicing, eps_trunc, *,
                   v0=None, order_m=2, lambda_order=None, keep_trace=False,
                   max_slices=10**6, chunk=64):
    """Phase factor of the half-line associated potential on one side.

    Composes slice matrices outward from ``x0`` until the domain closure is
    reached (applied analytically) or the cumulative |s12| falls below
    ``eps_trunc``.  Returns (PhaseFactor, CumulativeTrace or None).

    Left sweeps reflect the coordinate about x0 and reuse the right-sweep
    machinery; trace centers stay in original coordinates.
    """
    if direction not in ("L", "R"):
        raise ParameterError("direction must be 'L' or 'R'")
    if v0 is None:
        v0 = model.v_asymptotic
    if not energy > v0:
        raise ParameterError("sweep requires E > V0")
    if lambda_order is None:
        lambda_order = order_m + 2
    if not model.contains(x0):
        raise DomainError(f"anchor {x0!r} outside the potential domain")
    k = math.sqrt(2.0 * (energy - v0))

    if direction == "R":
        bound, closure = model.domain_hi, model.right_closure
    else:
        bound, closure = model.domain_lo, model.left_closure

    c11, c12, c21, c22 = 0.0 + 0.0j, 1.0 + 0.0j, 1.0 + 0.0j, 0.0 + 0.0j
    truncated = False
    reached_bound = False
    tr = ([], [], [], [], [], [], [], [], [], [], [], [], []) if keep_trace else None

    for edges, final in _edge_batches(slicing, x0, bound, direction, chunk, max_slices):
        if len(edges) < 2:
            if final:
                reached_bound = True
                break
            continue
        centers = 0.5 * (edges[:-1] + edges[1:])
        halfs = 0.5 * np.abs(edges[1:] - edges[:-1])
        vscaled = _potential.scaled_term_batch(model, energy, centers, halfs, order_m)
        if direction == "L":
            vscaled[:, 1::2] *= -1.0
        qhat, phip, phim = _slices._phi_batch(vscaled, lambda_order, allow_shift=True)
        s11a, s12a, s21a, s22a = _slices._smatrix_batch(qhat, phip, phim, halfs, k)

        for i in range(len(centers)):
            if keep_trace:
                tr[0].append(centers[i])
                tr[1].append(halfs[i])
                tr[2].append(qhat[i])
                tr[3].append(phip[i])
                tr[4].append(phim[i])
                tr[5].append(s11a[i])
                tr[6].append(s12a[i])
                tr[7].append(s21a[i])
                tr[8].append(s22a[i])
                tr[9].append(c11)
                tr[10].append(c12)
                tr[11].append(c21)
                tr[12].append(c22)
            c11, c12, c21, c22 = _star_values(
                c11, c12, c21, c22, s11a[i], s12a[i], s21a[i], s22a[i]
            )
            if abs(c12) < eps_trunc:
                truncated = True
                break
        if truncated:
            break
        if final:
            reached_bound = True
            break

    if truncated:
        closure_value = 0.0 + 0.0j
        phase = c11
    elif reached_bound:
        if closure.kind == "barrier":
            closure_value = -1.0 + 0.0j
        elif closure.kind == "step":
            closure_value = step_phase(energy, closure.level, v0).value
        else:
            closure_value = 0.0 + 0.0j
        phase = _close_value(c11, c12, c21, c22, closure_value)
    else:
        raise NonConvergenceError(
            f"sweep exceeded {max_slices} slices without truncation or closure"
        )

    trace = None
    if keep_trace:
        trace = CumulativeTrace(
            anchor=x0,
            direction=direction,
            energy=energy,
            k=k,
            lambda_order=lambda_order,
            centers=np.array(tr[0]),
            half_widths=np.array(tr[1]),
            qhat=np.array(tr[2]),
            phip=np.array(tr[3]) if tr[3] else np.zeros((0, lambda_order + 1), complex),
            phim=np.array(tr[4]) if tr[4] else np.zeros((0, lambda_order + 1), complex),
            s11=np.array(tr[5]),
            s12=np.array(tr[6]),
            s21=np.array(tr[7]),
            s22=np.array(tr[8]),
            cum11=np.array(tr[9]),
            cum12=np.array(tr[10]),
            cum21=np.array(tr[11]),
            cum22=np.array(tr[12]),
            closure_value=closure_value,
            truncated=truncated,
            phase=phase,
        )
    return PhaseFactor(value=phase, anchor=x0, side=direction, k=k), trace
