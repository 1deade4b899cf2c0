"""Mild solutions of the Caputo wave-type problem

    d^alpha_t w(t) + A w(t) = f(t, w(t)),   w(0) = w0,  w'(0) = w1,

with 1 < alpha < 2, assembled from propagator snapshots on a graded grid:
homogeneous, linear forced (Duhamel), and semilinear (Picard) variants,
plus regime validation and classical-solution residual verification.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .fractional import Kernel, TimeGrid, Trajectory, caputo_derivative, duhamel_convolve
from .mittag_leffler import MLParams, ml_derivative, ml_eval, reciprocal_gamma
from .operator_model import AlmostSectorialModel, apply as op_apply

__all__ = [
    "ForcingSpec",
    "WaveProblem",
    "RegimeReport",
    "ResidualReport",
    "HoelderEstimate",
    "PicardError",
    "validate_regime",
    "propagator_snapshots",
    "solve_homogeneous",
    "solve_linear",
    "solve_semilinear",
    "verify_classical",
    "hoelder_modulus",
    "residual_report_to_csv",
]

_THEOREMS = ("homogeneous", "linear", "semilinear-mild", "semilinear-classical")


@dataclass(frozen=True)
class ForcingSpec:
    """Forcing term: absent, time-only f(t), or semilinear f(t, w).

    ``nu`` is the declared Hoelder exponent of a time-only forcing;
    ``lipschitz`` the declared Lipschitz constant of a semilinear one.
    """

    kind: str = "none"
    func: object = None
    nu: float | None = None
    lipschitz: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("none", "time", "semilinear"):
            raise ValueError(f"unknown forcing kind {self.kind!r}")
        if self.kind != "none" and not callable(self.func):
            raise ValueError(f"{self.kind} forcing needs a callable")

    @classmethod
    def none(cls) -> "ForcingSpec":
        return cls()

    @classmethod
    def time_dependent(cls, func, nu: float | None = None) -> "ForcingSpec":
        return cls(kind="time", func=func, nu=nu)

    @classmethod
    def semilinear(cls, func, lipschitz: float) -> "ForcingSpec":
        if not (lipschitz >= 0.0 and math.isfinite(lipschitz)):
            raise ValueError(f"lipschitz constant must be finite, got {lipschitz}")
        return cls(kind="semilinear", func=func, lipschitz=lipschitz)


@dataclass(frozen=True)
class WaveProblem:
    model: AlmostSectorialModel
    alpha: float
    w0: np.ndarray = field(repr=False)
    w1: np.ndarray = field(repr=False)
    grid: TimeGrid
    forcing: ForcingSpec = ForcingSpec()

    def __post_init__(self) -> None:
        if not (1.0 < self.alpha < 2.0):
            raise ValueError(f"alpha must lie in (1, 2), got {self.alpha}")
        d = self.model.dimension
        w0 = np.asarray(self.w0, dtype=complex).ravel()
        w1 = np.asarray(self.w1, dtype=complex).ravel()
        if w0.size != d or w1.size != d:
            raise ValueError(f"initial data must have dimension {d}")
        object.__setattr__(self, "w0", w0)
        object.__setattr__(self, "w1", w1)


@dataclass(frozen=True)
class RegimeReport:
    """Which of the classical-solution inequalities hold."""

    cond_alpha_upper: bool  # alpha < 1/(1+gamma)
    cond_alpha_lower: bool  # alpha > 1/(-gamma)
    cond_holder: bool  # nu > alpha*(1+gamma)
    classical_ok: bool


def validate_regime(p: WaveProblem, theorem: str) -> RegimeReport:
    """Evaluate the inequalities assumed by the selected solvability result.

    Solvers do not call this implicitly; runs outside the guaranteed regime
    are permitted but carry experimental status only.
    """
    if theorem not in _THEOREMS:
        raise ValueError(f"unknown theorem {theorem!r}; pick one of {_THEOREMS}")
    gamma = p.model.profile.gamma
    upper = p.alpha * (1.0 + gamma) < 1.0
    lower = p.alpha * (-gamma) > 1.0
    nu = p.forcing.nu
    if nu is None and p.forcing.kind == "time":
        samples = np.array([p.forcing.func(t) for t in p.grid.nodes()], dtype=complex)
        nu = hoelder_modulus(Trajectory(p.grid, np.atleast_2d(samples.T).T)).nu
    holder = True if nu is None else nu > p.alpha * (1.0 + gamma)
    if theorem == "homogeneous":
        ok = upper and lower
    elif theorem == "linear":
        ok = upper and lower and holder
    elif theorem == "semilinear-mild":
        ok = upper
    else:  # semilinear-classical
        ok = upper and lower
    return RegimeReport(
        cond_alpha_upper=upper,
        cond_alpha_lower=lower,
        cond_holder=holder,
        classical_ok=ok,
    )


def propagator_snapshots(
    m: AlmostSectorialModel, alpha: float, delta: float, grid: TimeGrid
) -> np.ndarray:
    """Blockwise snapshots E_{alpha,delta}(-t_i^alpha A), shape (n+1, nb, 2, 2).

    The t = 0 snapshot is the limit (1/Gamma(delta)) I.
    """
    t = grid.nodes()
    params = MLParams(alpha, delta)
    out = np.zeros((t.size, m.n_blocks, 2, 2), dtype=complex)
    out[0, :, 0, 0] = out[0, :, 1, 1] = reciprocal_gamma(delta)
    ta = t[1:, None] ** alpha
    args = -ta * m.lam[None, :]
    fv = np.array([[ml_eval(params, z) for z in row] for row in args])
    fpv = np.array([[ml_derivative(params, z, 1) for z in row] for row in args])
    out[1:, :, 0, 0] = out[1:, :, 1, 1] = fv
    out[1:, :, 0, 1] = m.coupling[None, :] * (-ta) * fpv
    return out


def _apply_snapshots(snaps: np.ndarray, x: np.ndarray) -> np.ndarray:
    xb = x.reshape(-1, 2)
    return np.einsum("ikab,kb->ika", snaps, xb).reshape(snaps.shape[0], -1)


def solve_homogeneous(p: WaveProblem) -> Trajectory:
    """w(t_i) = E_alpha(-t_i^alpha A) w0 + t_i E_{alpha,2}(-t_i^alpha A) w1."""
    if p.forcing.kind != "none":
        raise ValueError("homogeneous solver requires absent forcing")
    return Trajectory(p.grid, _homogeneous_values(p))


def _homogeneous_values(p: WaveProblem) -> np.ndarray:
    t = p.grid.nodes()
    vals = np.zeros((t.size, p.model.dimension), dtype=complex)
    if np.any(p.w0 != 0):
        e1 = propagator_snapshots(p.model, p.alpha, 1.0, p.grid)
        vals += _apply_snapshots(e1, p.w0)
    if np.any(p.w1 != 0):
        e2 = propagator_snapshots(p.model, p.alpha, 2.0, p.grid)
        vals += t[:, None] * _apply_snapshots(e2, p.w1)
    return vals


def _sample_forcing(p: WaveProblem, w_values: np.ndarray | None = None) -> np.ndarray:
    t = p.grid.nodes()
    d = p.model.dimension
    if p.forcing.kind == "none":
        return np.zeros((t.size, d), dtype=complex)
    if p.forcing.kind == "time":
        rows = [p.forcing.func(ti) for ti in t]
    else:
        rows = [p.forcing.func(ti, wi) for ti, wi in zip(t, w_values)]
    out = np.asarray(rows, dtype=complex)
    if out.ndim == 1:  # scalar-valued forcing broadcast over components
        out = np.repeat(out[:, None], d, axis=1)
    if out.shape != (t.size, d):
        raise ValueError(f"forcing samples have shape {out.shape}, want {(t.size, d)}")
    return out


def solve_linear(p: WaveProblem) -> Trajectory:
    """Homogeneous part plus the Duhamel term (g_{alpha-1} * E_alpha * f)(t)."""
    if p.forcing.kind != "time":
        raise ValueError("linear solver requires a time-only forcing")
    vals = _homogeneous_values(p)
    snaps = propagator_snapshots(p.model, p.alpha, 1.0, p.grid)
    fvals = _sample_forcing(p)
    duh = duhamel_convolve(
        Kernel(p.alpha - 1.0), snaps, Trajectory(p.grid, fvals)
    )
    return Trajectory(p.grid, vals + duh.values)


class PicardError(RuntimeError):
    """Fixed-point iteration failed to reach the tolerance; carries the
    increment history for diagnostics."""

    def __init__(self, message: str, history: list):
        super().__init__(message)
        self.history = list(history)


def _graph_sup_norm(m: AlmostSectorialModel, values: np.ndarray) -> float:
    # sup over nodes of the D(A) (graph) norm ||v|| + ||A v||
    av = np.array([op_apply(m, v) for v in values])
    return float(
        np.max(np.linalg.norm(values, axis=1) + np.linalg.norm(av, axis=1))
    )


def solve_semilinear(
    p: WaveProblem,
    tol: float = 1e-10,
    max_iter: int = 60,
    initial: str = "w0",
):
    """Picard iteration w_{k+1} = homogeneous + Duhamel(f(., w_k)).

    Returns (Trajectory, iterations, contraction_history); the history is
    the sup-node graph-norm increment per sweep and should become geometric
    once the horizon T keeps the one-step contraction factor below one.
    """
    if p.forcing.kind != "semilinear":
        raise ValueError("semilinear solver requires a semilinear forcing")
    if tol <= 0 or max_iter < 1:
        raise ValueError("need tol > 0 and max_iter >= 1")
    homog = _homogeneous_values(p)
    snaps = propagator_snapshots(p.model, p.alpha, 1.0, p.grid)
    kernel = Kernel(p.alpha - 1.0)
    if initial == "w0":
        w = np.repeat(p.w0[None, :], p.grid.n_steps + 1, axis=0)
    elif initial == "zero":
        w = np.zeros_like(homog)
    else:
        raise ValueError(f"unknown initialization {initial!r}")
    history: list[float] = []
    for k in range(1, max_iter + 1):
        fvals = _sample_forcing(p, w)
        duh = duhamel_convolve(kernel, snaps, Trajectory(p.grid, fvals))
        w_next = homog + duh.values
        inc = _graph_sup_norm(p.model, w_next - w)
        history.append(inc)
        w = w_next
        if inc <= tol:
            return Trajectory(p.grid, w), k, history
    raise PicardError(
        f"no contraction below tol={tol} within {max_iter} sweeps "
        f"(last increment {history[-1]:.3e})",
        history,
    )


@dataclass(frozen=True)
class ResidualReport:
    """Interior-node residuals of the classical-solution equation."""

    t_values: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    max_residual: float
    initial_value_error: float
    initial_slope_error: float


def verify_classical(p: WaveProblem, w: Trajectory, window: float = 0.02) -> ResidualReport:
    """Normalized residual || d^alpha_t w + A w - f || at interior nodes.

    Nodes with t < window * T are excluded from the maximum: the second
    differences feeding the Caputo derivative carry an O(1) relative error
    in a fixed number of leading nodes on any graded grid, so the early
    window shrinks in t (not in node count) under refinement.
    """
    if w.grid != p.grid:
        raise ValueError("trajectory grid differs from the problem grid")
    t = p.grid.nodes()
    cap = caputo_derivative(p.alpha, w, p.w1).values
    aw = np.array([op_apply(p.model, v) for v in w.values])
    fvals = _sample_forcing(p, w.values)
    resid_vec = cap + aw - fvals
    scale = np.linalg.norm(aw, axis=1) + np.linalg.norm(fvals, axis=1) + 1e-300
    residuals = np.linalg.norm(resid_vec, axis=1) / scale
    lo = int(np.searchsorted(t, window * p.grid.T))
    interior = residuals[max(lo, 1) : -1]
    max_resid = float(np.max(interior)) if interior.size else math.nan
    iv_err = float(np.linalg.norm(w.values[0] - p.w0))
    # one-sided second-order derivative at 0 on the nonuniform grid
    t1, t2 = t[1], t[2]
    fd = (
        t2**2 * (w.values[1] - w.values[0]) - t1**2 * (w.values[2] - w.values[0])
    ) / (t1 * t2 * (t2 - t1))
    slope_err = float(np.linalg.norm(fd - p.w1))
    return ResidualReport(
        t_values=t,
        residuals=residuals,
        max_residual=max_resid,
        initial_value_error=iv_err,
        initial_slope_error=slope_err,
    )


@dataclass(frozen=True)
class HoelderEstimate:
    nu: float
    degenerate: bool


def hoelder_modulus(f: Trajectory, n_bins: int = 24) -> HoelderEstimate:
    """Empirical Hoelder exponent from the worst-case modulus of continuity.

    Node pairs are binned by log gap; the fit runs on the per-bin maximum
    of ||f(t) - f(s)|| (the modulus is a sup, so an all-pairs fit would be
    biased toward the smooth-interior slope 1).
    """
    t = f.grid.nodes()
    if t.size < 8:
        raise ValueError("need at least 8 samples")
    vals = f.values
    scale = float(np.max(np.abs(vals))) + 1e-300
    idx_i, idx_j = np.triu_indices(t.size, k=1)
    gaps = t[idx_j] - t[idx_i]
    diffs = np.linalg.norm(vals[idx_j] - vals[idx_i], axis=1)
    good = (diffs > 1e-13 * scale) & (gaps > 0)
    if np.count_nonzero(good) < idx_i.size // 2:
        return HoelderEstimate(nu=1.0, degenerate=True)
    gaps, diffs = gaps[good], diffs[good]
    edges = np.geomspace(gaps.min(), gaps.max() * (1 + 1e-12), n_bins + 1)
    which = np.clip(np.searchsorted(edges, gaps, side="right") - 1, 0, n_bins - 1)
    xs, ys = [], []
    for b in range(n_bins):
        mask = which == b
        if np.any(mask):
            xs.append(math.log(math.sqrt(edges[b] * edges[b + 1])))
            ys.append(math.log(float(diffs[mask].max())))
    if len(xs) < 4:
        return HoelderEstimate(nu=1.0, degenerate=True)
    slope = float(np.polyfit(xs, ys, 1)[0])
    return HoelderEstimate(nu=slope, degenerate=False)


def residual_report_to_csv(rep: ResidualReport, header_lines=()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    buf.write("t,residual\n")
    for t, r in zip(rep.t_values, rep.residuals):
        buf.write(f"{t:.17g},{r:.17g}\n")
    return buf.getvalue()
