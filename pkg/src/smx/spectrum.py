"""Bound-state energy search.

The bound-state condition is that the product of the left and right
half-line phase factors equals one: scan F(E) = S_L * S_R over an energy
grid, bracket the sign changes of Im F that sit on the Re F > 0 branch,
and polish each bracket with a secant iteration that falls back to regula
falsi whenever an iterate escapes the bracket.  For symmetric potentials
anchored at x0 = 0 a single right sweep suffices and the two branches of
Re F classify parity.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import smatrix as _smatrix
from .errors import (
    NonConvergenceError,
    ParameterError,
    ResonanceSingularityError,
)


@dataclass(frozen=True)
class ScanConfig:
    """Everything a spectrum run needs besides the model itself.

    Energies are raw (model units with hbar = m = 1).  ``x0``, ``v0`` and
    ``symmetric`` default from the model when left as None; ``delta`` and
    ``ratio`` select uniform or geometric slicing (exactly one).
    """

    e_min: float
    e_max: float
    n_grid: int
    order_m: int
    lambda_order: int = None
    x0: float = None
    v0: float = None
    delta: float = None
    ratio: float = None
    eps_trunc: float = 1e-40
    eps_tilde: float = 1e-12
    refine_tol: float = 1e-14
    max_iter: int = 60
    symmetric: bool = None
    max_slices: int = 10**6
    threads: int = 1

    def resolve(self, model):
        """Fill model-derived defaults and validate cross-field constraints."""
        x0 = model.x0_default if self.x0 is None else self.x0
        v0 = model.v_asymptotic if self.v0 is None else self.v0
        lam = (self.order_m + 2) if self.lambda_order is None else self.lambda_order
        symmetric = model.symmetric if self.symmetric is None else self.symmetric
        cfg = replace(self, x0=x0, v0=v0, lambda_order=lam, symmetric=symmetric)

        if not cfg.e_min < cfg.e_max:
            raise ParameterError("e_min must be below e_max")
        if not cfg.v0 < cfg.e_min:
            raise ParameterError("v0 must be below e_min")
        if not cfg.e_max < model.bound_ceiling:
            raise ParameterError(
                f"e_max must stay below the confining level {model.bound_ceiling!r}"
            )
        if cfg.n_grid < 2:
            raise ParameterError("n_grid must be at least 2")
        if cfg.order_m < 0:
            raise ParameterError("order_m must be non-negative")
        if cfg.lambda_order < max(3, cfg.order_m + 2):
            raise ParameterError("lambda_order must be >= max(3, order_m + 2)")
        if not model.contains(cfg.x0):
            raise ParameterError(f"x0 = {cfg.x0!r} outside the potential domain")
        if cfg.symmetric:
            if not model.symmetric:
                raise ParameterError("symmetric mode requires a symmetric potential")
            if cfg.x0 != 0.0:
                raise ParameterError("symmetric mode requires x0 = 0")
        if not cfg.eps_trunc > 0:
            raise ParameterError("eps_trunc must be positive")
        if cfg.max_iter < 1:
            raise ParameterError("max_iter must be positive")
        # constructing the Slicing validates the delta/ratio pair
        cfg.slicing()
        return cfg

    def slicing(self):
        return _smatrix.Slicing(delta=self.delta, ratio=self.ratio)


@dataclass(frozen=True)
class EnergyRoot:
    energy: float
    re_f: float
    parity: str
    iterations: int
    residual: float


@dataclass(frozen=True)
class Bracket:
    e_lo: float
    e_hi: float
    f_lo: complex
    f_hi: complex


def eval_condition(model, config, energy):
    """F(E) = S_L * S_R, or the single right phase in symmetric mode.

    Retries at 1-ulp energy perturbations if a composition hits an exact
    standing-wave degeneracy.
    """
    last = None
    for nudge in (0.0, 5e-16, -5e-16):
        e = energy * (1.0 + nudge) if energy != 0.0 else energy + nudge
        try:
            return _eval_once(model, config, e)
        except ResonanceSingularityError as exc:
            last = exc
    raise last


def _eval_once(model, config, energy):
    kw = dict(
        v0=config.v0,
        order_m=config.order_m,
        lambda_order=config.lambda_order,
        max_slices=config.max_slices,
    )
    slicing = config.slicing()
    right, _ = _smatrix.sweep_halfline(
        model, energy, config.x0, "R", slicing, config.eps_trunc, **kw
    )
    if config.symmetric:
        return right.value
    left, _ = _smatrix.sweep_halfline(
        model, energy, config.x0, "L", slicing, config.eps_trunc, **kw
    )
    return left.value * right.value


def scan(model, config):
    """Bracket candidate roots on a uniform energy grid.

    Sign changes of Im F qualify; outside symmetric mode both endpoints
    must also lie on the Re F > 0 branch (the Re F = -1 crossings are not
    bound states).
    """
    config = config.resolve(model)
    grid = np.linspace(config.e_min, config.e_max, config.n_grid)
    values = _evaluate_grid(model, config, grid)
    # a grid point landing exactly on a root still has to produce one
    # sign change; treat its zero as an infinitesimal positive value
    im = np.imag(values)
    im = np.where(im == 0.0, 1e-300, im)
    re = np.real(values)
    brackets = []
    for i in range(len(grid) - 1):
        if im[i] * im[i + 1] < 0.0:
            if config.symmetric or (re[i] > 0.0 and re[i + 1] > 0.0):
                brackets.append(
                    Bracket(grid[i], grid[i + 1], values[i], values[i + 1])
                )
    return brackets


def _evaluate_grid(model, config, grid):
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(lambda e: eval_condition(model, config, e), grid))
    return [eval_condition(model, config, e) for e in grid]


def refine(model, config, bracket, _bracket_log=None):
    """Polish one bracket to an EnergyRoot.

    Secant steps on Im F; any step that leaves the current sign-change
    bracket is replaced by the regula-falsi point, so the root stays
    enclosed.  Stops at |Im F| <= refine_tol or when the bracket collapses
    to a few ulps (double-precision floor); exceeding max_iter without
    either raises NonConvergenceError carrying the best iterate.
    """
    config = config.resolve(model)
    lo, hi = bracket.e_lo, bracket.e_hi
    g_lo, g_hi = bracket.f_lo.imag, bracket.f_hi.imag
    for e, f in ((lo, bracket.f_lo), (hi, bracket.f_hi)):
        if f.imag == 0.0:  # endpoint is already an exact root
            parity = "none"
            if config.symmetric:
                parity = "even" if f.real > 0.0 else "odd"
            return EnergyRoot(energy=e, re_f=f.real, parity=parity,
                              iterations=0, residual=0.0)
    p0, g0 = lo, g_lo
    p1, g1 = hi, g_hi
    best = (abs(g_hi), hi, bracket.f_hi) if abs(g_hi) < abs(g_lo) else (
        abs(g_lo), lo, bracket.f_lo
    )
    if _bracket_log is not None:
        _bracket_log.append((lo, hi))

    iterations = 0
    while iterations < config.max_iter:
        p = None
        if g1 != g0:
            p = p1 - g1 * (p1 - p0) / (g1 - g0)
        if p is None or not (lo < p < hi) or not math.isfinite(p):
            p = (lo * g_hi - hi * g_lo) / (g_hi - g_lo)
            if not (lo < p < hi):
                p = 0.5 * (lo + hi)
        f = eval_condition(model, config, p)
        g = f.imag
        iterations += 1
        if abs(g) < best[0]:
            best = (abs(g), p, f)
        if (g > 0) == (g_lo > 0):
            lo, g_lo = p, g
        else:
            hi, g_hi = p, g
        if _bracket_log is not None:
            _bracket_log.append((lo, hi))
        width_floor = 4.0 * np.spacing(max(abs(lo), abs(hi)))
        if abs(g) <= config.refine_tol or (hi - lo) <= width_floor:
            res, e_root, f_root = best
            parity = "none"
            if config.symmetric:
                parity = "even" if f_root.real > 0.0 else "odd"
            return EnergyRoot(
                energy=e_root,
                re_f=f_root.real,
                parity=parity,
                iterations=iterations,
                residual=res,
            )
        p0, g0 = p1, g1
        p1, g1 = p, g
    res, e_root, f_root = best
    raise NonConvergenceError(
        f"refinement did not reach |Im F| <= {config.refine_tol} in "
        f"{config.max_iter} iterations (best {res:.3e} at E = {e_root!r})",
        best=EnergyRoot(
            energy=e_root,
            re_f=f_root.real,
            parity="none",
            iterations=iterations,
            residual=res,
        ),
    )


def solve_spectrum(model, config, collect_failures=None):
    """Scan plus refine: the sorted, deduplicated bound-state list.

    Refinement failures are appended to ``collect_failures`` (when given)
    instead of aborting the batch.  Outside symmetric mode, refined roots
    on the Re F < 0 branch are discarded.
    """
    config = config.resolve(model)
    brackets = scan(model, config)
    roots = []
    for br in brackets:
        try:
            root = refine(model, config, br)
        except NonConvergenceError as exc:
            if collect_failures is not None:
                collect_failures.append(exc)
                continue
            raise
        if not config.symmetric and root.re_f <= 0.0:
            continue
        roots.append(root)
    roots.sort(key=lambda r: r.energy)
    deduped = []
    for root in roots:
        if deduped:
            prev = deduped[-1]
            scale = max(abs(prev.energy), abs(root.energy), 1e-300)
            if abs(root.energy - prev.energy) <= 1e-12 * scale:
                if root.residual < prev.residual:
                    deduped[-1] = root
                continue
        deduped.append(root)
    return deduped
