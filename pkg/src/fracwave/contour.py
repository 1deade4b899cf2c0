"""Holomorphic functional calculus by contour quadrature.

Two integration paths:

* ``Gamma_theta``: the pair of rays r e^{+/- i theta}, used for f(A)x with
  f decaying like 1/(1+|z|) on the rays.  Geometric nodes, trapezoid in
  log space; the integrand vanishes at both ends of the (truncated) rays.
* Hankel path ``Gamma_theta0``: two rays at +/- theta0 in (pi/2, pi) plus
  the circular arc of radius rho joining them, used for the Laplace-type
  propagator representation.  Composite Gauss-Legendre on rays and arc,
  because the integrand does not vanish at the ray/arc junction.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .operator_model import AlmostSectorialModel, resolvent_apply

__all__ = [
    "ContourSpec",
    "HankelSpec",
    "default_contour",
    "calculus_apply",
    "resolvent_of_power_sum",
    "hankel_propagator",
    "integrand_profile",
]


@dataclass(frozen=True)
class ContourSpec:
    """Ray angle and radial truncation of the Gamma_theta path."""

    theta: float
    r_min: float
    r_max: float
    nodes_per_decade: int = 96

    def __post_init__(self) -> None:
        if not (0.0 < self.theta < math.pi):
            raise ValueError(f"theta must lie in (0, pi), got {self.theta}")
        if not (0.0 < self.r_min < self.r_max):
            raise ValueError(
                f"need 0 < r_min < r_max, got ({self.r_min}, {self.r_max})"
            )
        if self.nodes_per_decade < 4:
            raise ValueError("nodes_per_decade must be >= 4")

    def radii(self, refine: int = 1) -> np.ndarray:
        decades = math.log10(self.r_max / self.r_min)
        n = max(8, int(round(self.nodes_per_decade * refine * decades)) + 1)
        return np.geomspace(self.r_min, self.r_max, n)


def default_contour(
    m: AlmostSectorialModel,
    t_alpha_scale: float = 1.0,
    nodes_per_decade: int = 96,
    margin: float = 1e2,
    tail_tol: float = 1e-10,
) -> ContourSpec:
    """Contour covering the model's spectral range with truncation margin.

    ``t_alpha_scale`` is the factor multiplying z inside f (typically
    t^alpha); larger values push the integrand's decay outward, so the
    outer truncation grows accordingly.
    """
    lo, hi = m.spectral_radius_range()
    gamma = m.profile.gamma
    # inner truncation error ~ r_min * |f(0)| * ||A^-1||; decades are cheap,
    # so cut far below the spectral floor (well past the stated margin)
    r_min = min(lo, 1.0) * 1e-12
    r_tail = (tail_tol ** (1.0 / gamma)) / max(t_alpha_scale, 1e-300)
    r_max = max(hi * margin, r_tail, r_min * 1e4)
    return ContourSpec(
        theta=m.profile.theta,
        r_min=r_min,
        r_max=r_max,
        nodes_per_decade=nodes_per_decade,
    )


def _log_trapezoid_weights(r: np.ndarray) -> np.ndarray:
    u = np.log(r)
    w = np.zeros_like(u)
    w[:-1] += 0.5 * np.diff(u)
    w[1:] += 0.5 * np.diff(u)
    return w * r


def _gamma_path_sum(m, f, c, x, refine=1):
    r = c.radii(refine=refine)
    w = _log_trapezoid_weights(r)
    up = cmath.exp(1j * c.theta)
    dn = cmath.exp(-1j * c.theta)
    total = np.zeros(m.dimension, dtype=complex)
    for rj, wj in zip(r, w):
        z_up = rj * up
        z_dn = rj * dn
        total += wj * (
            f(z_dn) * dn * resolvent_apply(m, z_dn, x)
            - f(z_up) * up * resolvent_apply(m, z_up, x)
        )
    return total / (2.0j * math.pi)


def calculus_apply(
    m: AlmostSectorialModel,
    f,
    c: ContourSpec,
    x,
    return_error: bool = False,
):
    """f(A) x = (1/2 pi i) int_{Gamma_theta} f(z) (z-A)^{-1} x dz.

    The path runs in along the upper ray and out along the lower one, so
    the spectral sector lies to the left.  With ``return_error=True`` also
    returns the two-grid difference against half the node density (an
    estimate, not a bound).
    """
    x = np.asarray(x, dtype=complex).ravel()
    lo, hi = m.spectral_radius_range()
    if c.theta <= m.profile.omega:
        raise ValueError("contour angle theta must exceed the sector angle omega")
    _warn_on_slow_decay(f, c)
    val = _gamma_path_sum(m, f, c, x)
    if not return_error:
        return val
    coarse = _gamma_path_sum(m, f, c, x, refine=0.5)
    return val, float(np.linalg.norm(val - coarse))


def _warn_on_slow_decay(f, c: ContourSpec) -> None:
    r_mid = math.sqrt(c.r_min * c.r_max)
    z_mid = r_mid * cmath.exp(1j * c.theta)
    z_out = c.r_max * cmath.exp(1j * c.theta)
    fm = abs(f(z_mid)) * (1.0 + r_mid)
    fo = abs(f(z_out)) * (1.0 + c.r_max)
    if fm > 0 and fo > 100.0 * fm:
        warnings.warn(
            "integrand does not satisfy the |f(z)| <= C/(1+|z|) decay "
            "assumed by the functional calculus; result may diverge",
            RuntimeWarning,
            stacklevel=3,
        )


def resolvent_of_power_sum(
    m: AlmostSectorialModel,
    lam: complex,
    alpha: float,
    c: ContourSpec,
    x,
) -> np.ndarray:
    """(lam^alpha + A)^{-1} x as the calculus applied to 1/(lam^alpha + z)."""
    lam_a = complex(lam) ** alpha
    return calculus_apply(m, lambda z: 1.0 / (lam_a + z), c, x)


@dataclass(frozen=True)
class HankelSpec:
    """Hankel path: rays at +/- theta0 plus an arc of radius rho.

    ``rho`` defaults to 1/t at evaluation time when left as None.
    ``r_max`` of None truncates the rays where the e^{lambda t} factor has
    decayed to 1e-20 of its arc peak.
    """

    theta0: float
    rho: float | None = None
    r_max: float | None = None
    nodes_per_decade: int = 48
    arc_nodes: int = 128

    def __post_init__(self) -> None:
        if not (math.pi / 2.0 < self.theta0 < math.pi):
            raise ValueError(f"theta0 must lie in (pi/2, pi), got {self.theta0}")
        if self.rho is not None and self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.nodes_per_decade < 4 or self.arc_nodes < 4:
            raise ValueError("node counts too small")


def _gauss_panels(a: float, b: float, n_panels: int, order: int = 8):
    """Composite Gauss-Legendre nodes/weights on [a, b]."""
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    wts = (half[:, None] * wg[None, :]).ravel()
    return nodes, wts


def hankel_propagator(
    m: AlmostSectorialModel,
    alpha: float,
    t: float,
    h: HankelSpec,
    x,
) -> np.ndarray:
    """E_alpha(-t^alpha A) x via the Laplace-inversion path integral

        (1/2 pi i) int e^{lambda t} lambda^{alpha-1} (lambda^alpha+A)^{-1} x
    """
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    if not (1.0 < alpha < 2.0):
        raise ValueError(f"alpha must lie in (1, 2), got {alpha}")
    theta_model = m.profile.theta
    if not (math.pi / 2.0 < h.theta0 < (math.pi - theta_model) / alpha):
        raise ValueError(
            f"theta0={h.theta0} outside (pi/2, (pi - theta)/alpha) for "
            f"theta={theta_model}, alpha={alpha}"
        )
    x = np.asarray(x, dtype=complex).ravel()
    rho = h.rho if h.rho is not None else 1.0 / t
    if h.r_max is not None:
        r_max = h.r_max
    else:
        r_max = max(45.0 / (abs(math.cos(h.theta0)) * t), 10.0 * rho)

    def resolvent_power(lam: complex) -> np.ndarray:
        return -resolvent_apply(m, -(lam**alpha), x)

    total = np.zeros(m.dimension, dtype=complex)
    # rays, log-variable composite Gauss-Legendre; the e^{lambda t} factor
    # oscillates with total phase ~ r_max t sin(theta0), so the panel count
    # must track the cycle count, not just the decade count
    decades = math.log10(r_max / rho)
    phase = r_max * t * math.sin(h.theta0)
    n_panels = max(
        4,
        int(math.ceil(h.nodes_per_decade * decades / 8.0)),
        int(math.ceil(phase / 3.0)),
    )
    u, wu = _gauss_panels(math.log(rho), math.log(r_max), n_panels)
    r = np.exp(u)
    for direction in (+1.0, -1.0):
        e = cmath.exp(1j * direction * h.theta0)
        for rj, wj in zip(r, wu):
            lam = rj * e
            total += (
                direction
                * wj
                * rj
                * e
                * cmath.exp(lam * t)
                * lam ** (alpha - 1.0)
                * resolvent_power(lam)
            )
    # arc lambda = rho e^{i phi}, phi from -theta0 to +theta0
    phi, wphi = _gauss_panels(-h.theta0, h.theta0, max(1, h.arc_nodes // 8))
    for pj, wj in zip(phi, wphi):
        lam = rho * cmath.exp(1j * pj)
        total += (
            wj
            * 1j
            * lam
            * cmath.exp(lam * t)
            * lam ** (alpha - 1.0)
            * resolvent_power(lam)
        )
    return total / (2.0j * math.pi)


def integrand_profile(m: AlmostSectorialModel, f, c: ContourSpec):
    """Per-node |f(z) (z-A)^{-1}| magnitudes along the upper ray, for the
    diagnostics CSV of the verify subcommand: rows (r, arg, |integrand|)."""
    from .operator_model import resolvent_norm

    rows = []
    for rj in c.radii():
        z = rj * cmath.exp(1j * c.theta)
        rows.append((rj, c.theta, abs(f(z)) * resolvent_norm(m, z)))
    return rows
