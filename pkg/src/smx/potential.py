"""Potential models exposed as on-demand Taylor expansions.

Everything downstream consumes a potential only through the coefficients
of 2m[E - V(x)]/hbar^2 expanded about arbitrary points.  Units are
dimensionless with hbar = m = 1 throughout: the harmonic model uses
omega = 1, the radial models measure length in Bohr radii / sigma.

Built-in models are sums of polynomial terms and pure power laws
c * x**(-p), whose expansion coefficients have closed forms and are exact
to rounding at any order.  Custom models supply a series provider, usually
written with :mod:`smx.taylor`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, SingularityError
from .taylor import TaylorSeries

#: depth of the bundled Lennard-Jones well, 1e4 / 2**(4/3) in hbar^2 / (m sigma^2)
LJ_EPSILON_DEFAULT = 1.0e4 / 2.0 ** (4.0 / 3.0)

#: position of the l = 0 Lennard-Jones minimum in units of sigma
LJ_MINIMUM = 2.0 ** (1.0 / 6.0)


@dataclass(frozen=True)
class Closure:
    """Boundary behaviour at one end of the domain.

    kind "barrier":  hard wall (total reflection with phase -1).
    kind "step":     the potential continues as the constant ``level``;
                     reflecting for energies below it.
    kind "constant": the potential continues at the sweep's flattening
                     level V0, i.e. transparent; the evanescent truncation
                     criterion terminates sweeps on such sides.
    """

    kind: str
    level: float = math.nan

    def __post_init__(self):
        if self.kind not in ("barrier", "step", "constant"):
            raise ParameterError(f"unknown closure kind {self.kind!r}")
        if self.kind == "step" and not math.isfinite(self.level):
            raise ParameterError("step closure requires a finite level")

    @property
    def ceiling(self):
        """Highest energy that this side still confines."""
        return self.level if self.kind == "step" else math.inf


BARRIER = Closure("barrier")
CONSTANT = Closure("constant")


@dataclass(frozen=True)
class PotentialModel:
    """Immutable description of a 1D potential well.

    ``power_terms`` holds (c, p) pairs contributing c * x**(-p) and
    ``poly_coeffs`` a plain polynomial in x; ``provider`` replaces both for
    custom models.  ``v_asymptotic`` is the default flattening level V0 for
    the associated scattering potentials and must stay below every scanned
    energy.
    """

    domain_lo: float
    domain_hi: float
    left_closure: Closure
    right_closure: Closure
    v_asymptotic: float
    params: dict
    kind: str = "custom"
    power_terms: tuple = ()
    poly_coeffs: tuple = ()
    provider: object = None
    symmetric: bool = False
    x0_default: float = 0.0
    unit_name: str = "raw"
    unit_scale: float = 1.0

    def __post_init__(self):
        if not self.domain_lo < self.domain_hi:
            raise ParameterError("domain_lo must be below domain_hi")

    @property
    def bound_ceiling(self):
        """Upper edge of the bound-state window (min of closure ceilings)."""
        return min(self.left_closure.ceiling, self.right_closure.ceiling)

    def contains(self, x):
        return self.domain_lo < x < self.domain_hi

    def value(self, x):
        """V(x) for points strictly inside the domain."""
        if not self.contains(x):
            raise DomainError(f"position {x!r} outside ({self.domain_lo}, {self.domain_hi})")
        if self.provider is not None:
            return float(np.asarray(self.provider(x, 0))[0])
        v = 0.0
        for c, p in self.power_terms:
            v += c * x ** (-p)
        for j, a in enumerate(self.poly_coeffs):
            v += a * x**j
        return v


def expand(model, energy, center, order):
    """Taylor series of 2[E - V(x)] about ``center``, degree ``order``.

    Coefficients are exact to rounding for the built-in models.  Raises
    DomainError for centers outside the domain and SingularityError when a
    coefficient overflows (expansion too close to a pole for raw
    representation in doubles).
    """
    if order < 0:
        raise ParameterError("order must be non-negative")
    if not math.isfinite(energy):
        raise ParameterError("energy must be finite")
    if not model.contains(center):
        raise DomainError(
            f"center {center!r} outside ({model.domain_lo}, {model.domain_hi})"
        )
    vc = _potential_coefficients(model, center, order)
    coeffs = -2.0 * vc
    coeffs[0] += 2.0 * energy
    if not np.all(np.isfinite(coeffs)):
        raise SingularityError(f"expansion at {center!r} overflows double precision")
    return TaylorSeries(center=float(center), coeffs=coeffs)


def _potential_coefficients(model, center, order):
    """Raw Taylor coefficients of V about one center."""
    if model.provider is not None:
        c = np.asarray(model.provider(center, order), dtype=float)
        if len(c) != order + 1:
            raise ParameterError(
                f"series provider returned {len(c)} coefficients, expected {order + 1}"
            )
        if not np.all(np.isfinite(c)):
            raise SingularityError(f"series provider returned non-finite values at {center!r}")
        return c
    out = np.zeros(order + 1)
    # overflow near a pole is deliberate: expand() turns it into a
    # SingularityError after the finiteness check
    with np.errstate(over="ignore", invalid="ignore"):
        for c, p in model.power_terms:
            out += _power_law_series(c, p, center, order)
    if model.poly_coeffs:
        shifted = _shifted_polynomial(model.poly_coeffs, center)
        n = min(len(shifted), order + 1)
        out[:n] += shifted[:n]
    return out


def _power_law_series(c, p, center, order):
    """Coefficients of c * x**(-p) about ``center``: the binomial series.

    mu-th coefficient is c * (-1)**mu * C(p+mu-1, mu) * center**(-p-mu),
    built by the stable term ratio t_{mu+1}/t_mu = -(p+mu)/((mu+1) center).
    """
    t = np.empty(order + 1)
    t[0] = c * center ** float(-p)
    for mu in range(order):
        t[mu + 1] = t[mu] * (-(p + mu)) / ((mu + 1) * center)
    return t


def _shifted_polynomial(coeffs, center):
    """Re-center a polynomial sum_j a_j x**j about ``center``."""
    deg = len(coeffs) - 1
    out = np.zeros(deg + 1)
    for j, a in enumerate(coeffs):
        if a == 0.0:
            continue
        for mu in range(j + 1):
            out[mu] += a * math.comb(j, mu) * center ** (j - mu)
    return out


def scaled_term_batch(model, energy, centers, half_widths, order):
    """Per-slice scaled coefficients vt_mu = v_mu * Delta**(mu+2).

    This is what the slice recursion actually consumes.  Working in the
    scaled variable tau = delta/Delta keeps every magnitude near
    |v0| * Delta**2 and avoids the overflow that raw coefficients hit when
    centers approach a pole (e.g. the radial models near r -> 0).
    Returns an (n, order+1) array.
    """
    centers = np.asarray(centers, dtype=float)
    half_widths = np.asarray(half_widths, dtype=float)
    n = len(centers)
    vc = np.zeros((n, order + 1))
    if model.provider is not None:
        for i, (x, d) in enumerate(zip(centers, half_widths)):
            raw = np.asarray(model.provider(x, order), dtype=float)
            vc[i] = raw * d ** np.arange(order + 1)
    else:
        for c, p in model.power_terms:
            # t[:, mu] = c x^-p * prod_{j<mu} -(p+j)/(j+1) * (Delta/x)^mu
            ratio = half_widths / centers
            g = np.empty(order + 1)
            g[0] = 1.0
            for mu in range(order):
                g[mu + 1] = g[mu] * (-(p + mu)) / (mu + 1)
            pw = np.ones((n, order + 1))
            if order >= 1:
                pw[:, 1:] = np.cumprod(np.tile(ratio[:, None], (1, order)), axis=1)
            vc += (c * centers ** float(-p))[:, None] * g[None, :] * pw
        if model.poly_coeffs:
            for j, a in enumerate(model.poly_coeffs):
                if a == 0.0:
                    continue
                for mu in range(min(j, order) + 1):
                    vc[:, mu] += (
                        a * math.comb(j, mu) * centers ** (j - mu) * half_widths**mu
                    )
    out = (-2.0) * vc
    out[:, 0] += 2.0 * energy
    out *= (half_widths**2)[:, None]
    if not np.all(np.isfinite(out)):
        raise SingularityError("scaled expansion produced non-finite coefficients")
    return out


def make_builtin(name, **params):
    """Construct one of the bundled potential models.

    harmonic:            V(x) = omega^2 x^2 / 2 on the full line.
    hydrogen_effective:  V(r) = l(l+1)/(2 r^2) - 1/r on [h1, h2], hard wall
                         below h1, constant zero above h2.
    lennard_jones:       V(r) = l(l+1)/(2 r^2) + 4 eps (r^-12 - r^-6),
                         same closures as hydrogen.
    """
    if name == "harmonic":
        omega = float(params.pop("omega", 1.0))
        if params:
            raise ParameterError(f"unknown harmonic parameters: {sorted(params)}")
        if not omega > 0:
            raise ParameterError("omega must be positive")
        return PotentialModel(
            domain_lo=-math.inf,
            domain_hi=math.inf,
            left_closure=CONSTANT,
            right_closure=CONSTANT,
            v_asymptotic=0.0,
            params={"omega": omega},
            kind="harmonic",
            poly_coeffs=(0.0, 0.0, 0.5 * omega**2),
            symmetric=True,
            x0_default=0.0,
            unit_name="hbar_omega",
            unit_scale=omega,
        )

    if name == "hydrogen_effective":
        l = params.pop("l", 1)
        h1 = float(params.pop("h1", 9.7844e-11))
        h2 = float(params.pop("h2", 20200.0))
        if params:
            raise ParameterError(f"unknown hydrogen parameters: {sorted(params)}")
        if l != int(l) or l < 0:
            raise ParameterError("l must be a non-negative integer")
        l = int(l)
        if not 0 < h1 < h2:
            raise ParameterError("require 0 < h1 < h2")
        terms = [(-1.0, 1)]
        if l > 0:
            terms.insert(0, (0.5 * l * (l + 1), 2))
        return PotentialModel(
            domain_lo=h1,
            domain_hi=h2,
            left_closure=BARRIER,
            right_closure=Closure("step", 0.0),
            v_asymptotic=-0.6,
            params={"l": l, "h1": h1, "h2": h2},
            kind="hydrogen_effective",
            power_terms=tuple(terms),
            x0_default=float(l * (l + 1)) if l > 0 else 2.0,
            unit_name="abs_E1",
            unit_scale=0.5,
        )

    if name == "lennard_jones":
        l = params.pop("l", 0)
        epsilon = float(params.pop("epsilon", LJ_EPSILON_DEFAULT))
        h1 = float(params.pop("h1", 0.22))
        h2 = float(params.pop("h2", 200.0))
        if params:
            raise ParameterError(f"unknown lennard_jones parameters: {sorted(params)}")
        if l != int(l) or l < 0:
            raise ParameterError("l must be a non-negative integer")
        l = int(l)
        if not epsilon > 0:
            raise ParameterError("epsilon must be positive")
        if not 0 < h1 < h2:
            raise ParameterError("require 0 < h1 < h2")
        terms = [(4.0 * epsilon, 12), (-4.0 * epsilon, 6)]
        if l > 0:
            terms.insert(0, (0.5 * l * (l + 1), 2))
        return PotentialModel(
            domain_lo=h1,
            domain_hi=h2,
            left_closure=BARRIER,
            right_closure=Closure("step", 0.0),
            v_asymptotic=-1.1 * epsilon,
            params={"l": l, "epsilon": epsilon, "h1": h1, "h2": h2},
            kind="lennard_jones",
            power_terms=tuple(terms),
            x0_default=LJ_MINIMUM,
            unit_name="eps_lj",
            unit_scale=epsilon,
        )

    raise ParameterError(f"unknown builtin potential {name!r}")


def make_custom(series_provider, domain, closures, v_asymptotic, *,
                symmetric=False, x0_default=None, params=None):
    """Wrap a user series provider as a model usable everywhere a built-in is.

    ``series_provider(center, order)`` must return the order+1 Taylor
    coefficients of V about center, finite inside ``domain``.
    ``closures`` is a (left, right) pair of :class:`Closure`.
    """
    lo, hi = domain
    left, right = closures
    if x0_default is None:
        x0_default = 0.0 if (lo < 0.0 < hi) else 0.5 * (lo + hi)
    return PotentialModel(
        domain_lo=float(lo),
        domain_hi=float(hi),
        left_closure=left,
        right_closure=right,
        v_asymptotic=float(v_asymptotic),
        params=dict(params or {}),
        kind="custom",
        provider=series_provider,
        symmetric=symmetric,
        x0_default=float(x0_default),
    )
