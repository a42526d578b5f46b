"""Local series solutions on a slice and the slice scattering matrix.

On a slice centred at x~ with half-width Delta the potential term is a
truncated polynomial and the two independent solutions take the form
exp(+-i q delta) * (power series in delta) with q = sqrt(v0).  Matching
both solutions to exterior plane waves at the slice edges yields a 2x2
scattering matrix per slice.

All kernels run on batches of slices in the scaled variable
tau = delta / Delta (coefficients vt_mu = v_mu Delta**(mu+2), solution
coefficients phi_lambda Delta**lambda), which keeps magnitudes bounded
however close the slice sits to a potential singularity.  The public
single-slice operations wrap the same kernels with Delta folded back out.

Accuracy note: when a slice centre lands within ~1e-8 of a classical
turning point the two solutions nearly coincide and the edge matching
loses digits in double precision.  Generic slicings make this a
measure-zero configuration; it is not guarded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSliceError, ParameterError
from .taylor import TaylorSeries


@dataclass(frozen=True)
class SeriesSolutionPair:
    """Coefficients of the two local solutions psi+- on one slice.

    ``phi_plus``/``phi_minus`` are in the raw delta variable; both start
    (1, 0, 0, ...) by construction.
    """

    center: float
    half_width: float
    q: complex
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    order: int


@dataclass(frozen=True)
class SliceSMatrix:
    s11: complex
    s12: complex
    s21: complex
    s22: complex
    xl: float
    xr: float
    k: float


#: |v0 Delta^2| below which the exponent of the local ansatz is shifted off
#: the turning-point branch point (the two solutions would degenerate there)
_SHIFT_THRESHOLD = 1e-6
_SHIFT_SIZE = 2.5e-5


def _phi_batch(vscaled, lambda_order, allow_shift=False):
    """Solution coefficients for a batch of slices, scaled variable.

    vscaled: (B, M+1) array of v_mu Delta**(mu+2).  Returns (qhat, phip,
    phim) with qhat = sqrt(vscaled[:, 0]) on the principal branch and
    phi arrays of shape (B, lambda_order+1).

    With ``allow_shift`` (sweep-internal use), slices centred essentially
    on a classical turning point get their exponent moved to
    qhat = sqrt(v0 Delta^2 + shift) and the constant remainder is folded
    into the polynomial part; the solution pair stays exact and
    independent where the plain recursion would degenerate.  The public
    single-slice path keeps the plain recursion, whose coefficients start
    (1, 0, 0, ...) identically.
    """
    B = vscaled.shape[0]
    lam = lambda_order
    width = max(lam - 1, vscaled.shape[1])
    garr = np.zeros((B, width))
    garr[:, : vscaled.shape[1]] = vscaled
    v0 = garr[:, 0].copy()
    qsq = v0
    if allow_shift:
        qsq = np.where(np.abs(v0) < _SHIFT_THRESHOLD, v0 + _SHIFT_SIZE, v0)
    qhat = np.sqrt(qsq.astype(complex))
    garr[:, 0] = v0 - qsq

    phip = np.zeros((B, lam + 1), dtype=complex)
    phim = np.zeros((B, lam + 1), dtype=complex)
    phip[:, 0] = 1.0
    phim[:, 0] = 1.0
    two_iq = 2j * qhat
    for n in range(2, lam + 1):
        seg_g = garr[:, n - 2 :: -1][:, : n - 1]
        acc_p = np.einsum("bl,bl->b", phip[:, : n - 1], seg_g)
        acc_m = np.einsum("bl,bl->b", phim[:, : n - 1], seg_g)
        inv = 1.0 / (n * (n - 1))
        phip[:, n] = -(two_iq / n) * phip[:, n - 1] - acc_p * inv
        phim[:, n] = +(two_iq / n) * phim[:, n - 1] - acc_m * inv
    return qhat, phip, phim


def _edge_data(qhat, phip, phim, half_widths, k):
    """Values and derivatives of psi+- at both slice edges (tau = -+1)."""
    lam_idx = np.arange(phip.shape[1])
    alt = np.where(lam_idx % 2 == 0, 1.0, -1.0)

    up_r = phip.sum(axis=1)
    up_l = (phip * alt).sum(axis=1)
    um_r = phim.sum(axis=1)
    um_l = (phim * alt).sum(axis=1)
    dup_r = (phip * lam_idx).sum(axis=1)
    dup_l = -(phip * lam_idx * alt).sum(axis=1)
    dum_r = (phim * lam_idx).sum(axis=1)
    dum_l = -(phim * lam_idx * alt).sum(axis=1)

    ep = np.exp(1j * qhat)
    em = np.exp(-1j * qhat)
    inv_d = 1.0 / half_widths

    vp_l = em * up_l
    vp_r = ep * up_r
    vm_l = ep * um_l
    vm_r = em * um_r
    dp_l = em * (1j * qhat * up_l + dup_l) * inv_d
    dp_r = ep * (1j * qhat * up_r + dup_r) * inv_d
    dm_l = ep * (-1j * qhat * um_l + dum_l) * inv_d
    dm_r = em * (-1j * qhat * um_r + dum_r) * inv_d
    return (vp_l, vp_r, vm_l, vm_r, dp_l, dp_r, dm_l, dm_r)


def _smatrix_batch(qhat, phip, phim, half_widths, k):
    """Slice S-matrices for a batch; returns (s11, s12, s21, s22) arrays."""
    vp_l, vp_r, vm_l, vm_r, dp_l, dp_r, dm_l, dm_r = _edge_data(
        qhat, phip, phim, half_widths, k
    )
    ik = 1j * k
    m11 = ik * vp_l + dp_l
    m12 = ik * vm_l + dm_l
    m21 = ik * vp_r - dp_r
    m22 = ik * vm_r - dm_r
    det = m11 * m22 - m12 * m21
    scale = np.abs(m11 * m22) + np.abs(m12 * m21)
    bad = np.abs(det) <= 1e-15 * scale
    if np.any(bad):
        raise DegenerateSliceError(
            "singular edge-matching system (zero-width slice or k = 0)"
        )
    a_p = 2.0 * ik * m22 / det
    a_m = -2.0 * ik * m21 / det
    s11 = a_p * vp_l + a_m * vm_l - 1.0
    s21 = a_p * vp_r + a_m * vm_r
    b_p = -2.0 * ik * m12 / det
    b_m = 2.0 * ik * m11 / det
    s12 = b_p * vp_l + b_m * vm_l
    s22 = b_p * vp_r + b_m * vm_r - 1.0
    return s11, s12, s21, s22


def local_solutions(series: TaylorSeries, lambda_order: int, half_width: float):
    """Solve the slice ODE for the two local solutions.

    ``lambda_order`` must be at least 3 and at least series.order + 2.
    Coefficients are returned in the raw delta variable.
    """
    if lambda_order < 3:
        raise ParameterError("lambda_order must be >= 3")
    if lambda_order < series.order + 2:
        raise ParameterError("lambda_order must be >= series order + 2")
    if not half_width > 0:
        raise ParameterError("half_width must be positive")
    d = float(half_width)
    mu = np.arange(series.order + 1)
    vscaled = (series.coeffs * d**mu * d**2)[None, :]
    qhat, phip, phim = _phi_batch(vscaled, lambda_order)
    lam_idx = np.arange(lambda_order + 1)
    descale = d ** (-lam_idx.astype(float))
    return SeriesSolutionPair(
        center=series.center,
        half_width=d,
        q=complex(qhat[0] / d),
        phi_plus=phip[0] * descale,
        phi_minus=phim[0] * descale,
        order=lambda_order,
    )


def slice_smatrix(solutions: SeriesSolutionPair, k: float) -> SliceSMatrix:
    """Scattering matrix of one slice against exterior wavenumber ``k``."""
    if not k > 0:
        raise ParameterError("k must be positive")
    d = solutions.half_width
    if not d > 0:
        raise ParameterError("half_width must be positive")
    lam_idx = np.arange(len(solutions.phi_plus))
    rescale = d ** lam_idx.astype(float)
    qhat = np.array([solutions.q * d], dtype=complex)
    phip = (solutions.phi_plus * rescale)[None, :]
    phim = (solutions.phi_minus * rescale)[None, :]
    s11, s12, s21, s22 = _smatrix_batch(qhat, phip, phim, np.array([d]), k)
    return SliceSMatrix(
        s11=complex(s11[0]),
        s12=complex(s12[0]),
        s21=complex(s21[0]),
        s22=complex(s22[0]),
        xl=solutions.center - d,
        xr=solutions.center + d,
        k=k,
    )
