"""Self-consistent resolvent solver for limiting spectral distributions.

On a midpoint grid over [0, 1] the solver finds, for each z in the upper
half-plane, the profile g solving

    g[i] = -(z + (1/N) sum_j b[i, j] g[j])^(-1),      S(z) = (1/N) sum_i g[i],

by damped fixed-point iteration on the self-energy pi = (1/N) b g. The
update pi <- -(1/N) sum_j b[., j]/(z + pi[j]) preserves Im pi >= 0 and hence
|z + pi| >= Im z, so every iterate (and the converged profile) satisfies the
Herglotz bounds Im g > 0 and |g| <= 1/Im z.

The iteration contracts a priori with factor B/(Im z)^2 where B is the grid
mass of the density. For targets with Im z <= sqrt(B) the solver first
converges at a safe height where that factor is <= 1/4, then lowers Im z
geometrically, warm-starting each stage (convergence below sqrt(B) is
empirical, not certified; stage residuals are reported).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kernels
from .errors import InvalidInput, LsdlabError, NoConvergence
from .stieltjes import StieltjesCurve

__all__ = [
    "SolverConfig",
    "ResolventProfile",
    "ScalarSolution",
    "DEFAULT_CONFIG",
    "solve_profile",
    "solve_curve",
    "solve_product_form",
    "semicircle_transform",
    "contraction_certificate",
    "continuity_bound",
    "measured_decay_ratio",
]


@dataclass(frozen=True)
class SolverConfig:
    """Iteration budget and continuation controls.

    ``max_iterations`` is the per-stage budget. ``damping`` applies inside
    the certified region (contraction factor < 1); stages below it use half
    of it. ``continuation_factor`` is the geometric step for lowering Im z;
    ``safe_height_multiplier`` scales the starting height of the ladder.
    """

    tolerance: float = 1e-10
    max_iterations: int = 10_000
    damping: float = 1.0
    continuation_factor: float = 0.7
    safe_height_multiplier: float = 1.0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise InvalidInput("tolerance must be positive")
        if self.max_iterations < 1:
            raise InvalidInput("max_iterations must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise InvalidInput("damping must be in (0, 1]")
        if not 0.0 < self.continuation_factor < 1.0:
            raise InvalidInput("continuation_factor must be in (0, 1)")
        if self.safe_height_multiplier < 1.0:
            raise InvalidInput("safe_height_multiplier must be >= 1")


DEFAULT_CONFIG = SolverConfig()


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ResolventProfile:
    """Converged profile g(., z) with its self-energy, transform and diagnostics.

    ``pi`` is recomputed from the returned g (pi = (1/N) b g), and
    ``residual`` = max_i |g[i] + 1/(z + pi[i])| measures how far g is from
    solving the discretized equation. ``residual_history`` is the residual
    trace of the final continuation stage.
    """

    z: complex
    g: np.ndarray
    pi: np.ndarray
    S: complex = field(init=False)
    iterations: int = 0
    residual: float = 0.0
    residual_history: np.ndarray = None
    stages: int = 1

    def __post_init__(self):
        g = np.asarray(self.g, dtype=complex)
        pi = np.asarray(self.pi, dtype=complex)
        imz = complex(self.z).imag
        slack = 1.0 + 1e-12
        if (g.imag <= 0).any():
            raise LsdlabError("solver postcondition failed: Im g > 0")
        if (np.abs(g) > slack / imz).any():
            raise LsdlabError("solver postcondition failed: |g| <= 1/Im z")
        if (pi.imag < -1e-15 * (1.0 + np.abs(pi).max())).any():
            raise LsdlabError("solver postcondition failed: Im pi >= 0")
        if (np.abs(self.z + pi) < imz / slack).any():
            raise LsdlabError("solver postcondition failed: |z + pi| >= Im z")
        hist = self.residual_history
        if hist is None:
            hist = np.array([self.residual])
        object.__setattr__(self, "g", _readonly(g))
        object.__setattr__(self, "pi", _readonly(pi))
        object.__setattr__(self, "S", complex(g.mean()))
        object.__setattr__(self, "residual_history", _readonly(np.asarray(hist, dtype=float)))


@dataclass(frozen=True)
class ScalarSolution:
    """Solution of the rank-one (product-profile) reduction at one point.

    v solves v = -(1/N) sum_j t[j]/(z + t[j] v); the transform follows as
    S = -(1 + v^2)/z, which holds exactly at the discrete fixed point.
    """

    z: complex
    v: complex
    S: complex
    iterations: int = 0
    residual: float = 0.0


def semicircle_transform(sigma2, z):
    """Closed-form transform of the semicircle law of variance sigma2.

    S = -(z - sqrt(z^2 - 4 sigma2)) / (2 sigma2), taking the square root with
    positive imaginary part.
    """
    z = complex(z)
    if sigma2 <= 0:
        raise InvalidInput("sigma2 must be positive")
    if z.imag <= 0:
        raise InvalidInput("Im z must be positive")
    root = np.sqrt(complex(z * z - 4.0 * sigma2))
    if root.imag < 0:
        root = -root
    return complex(-(z - root) / (2.0 * sigma2))


def contraction_certificate(b, z):
    """A-priori Lipschitz factor B/(Im z)^2 of the self-energy iteration."""
    z = complex(z)
    if z.imag <= 0:
        raise InvalidInput("Im z must be positive")
    return float(b.mass / z.imag**2)


def continuity_bound(b1, b2, z):
    """Bound on |S1 - S2| from the L1 gap of two densities.

    sup_x |pi1 - pi2| <= Im z / ((Im z)^2 - B_max) * ||b1 - b2||_{L1,grid},
    and the transform gap is that over (Im z)^2. Valid only where
    (Im z)^2 > B_max.
    """
    z = complex(z)
    if z.imag <= 0:
        raise InvalidInput("Im z must be positive")
    if b1.n != b2.n:
        raise InvalidInput("density grids must share the same size")
    bmax = max(b1.mass, b2.mass)
    if z.imag**2 <= bmax:
        raise InvalidInput("bound requires (Im z)^2 > max mass")
    l1 = float(np.abs(b1.values - b2.values).mean())
    return float(z.imag * l1 / ((z.imag**2 - bmax) * z.imag**2))


def _effective_damping(cfg, certificate):
    return cfg.damping if certificate < 1.0 else 0.5 * cfg.damping


def _ladder_heights(im_target, mass, cfg):
    h = cfg.safe_height_multiplier * max(im_target, 2.0 * np.sqrt(mass + 1.0))
    heights = [h]
    while heights[-1] * cfg.continuation_factor > im_target:
        heights.append(heights[-1] * cfg.continuation_factor)
    if heights[-1] > im_target:
        heights.append(im_target)
    return heights


def _stage_plan(im_target, mass, cfg):
    if mass == 0.0 or im_target > np.sqrt(mass):
        return [im_target]
    return _ladder_heights(im_target, mass, cfg)


def _run_stages(bvals, re_z, heights, pi0, cfg, mass):
    pi = pi0
    total = 0
    for idx, h in enumerate(heights):
        z = complex(re_z, h)
        cert = mass / (h * h)
        d = _effective_damping(cfg, cert)
        g, pi, res, its, hist, ok = kernels.resolvent_iteration(
            bvals, z, pi, d, cfg.tolerance, cfg.max_iterations
        )
        total += its
        if not ok:
            raise NoConvergence(
                f"stage {idx} at Im z = {h:.6g}: residual {res:.3e} "
                f"after {its} iterations",
                stage=idx,
                height=h,
                residual=res,
            )
    return g, pi, res, total, hist, len(heights)


def solve_profile(b, z, cfg=None, warm_start=None, initial_pi=None):
    """Solve the discretized self-consistent equation at one point.

    ``warm_start`` may carry a profile solved at a nearby point (same grid);
    its self-energy seeds a direct solve at the target, with a cold
    continuation restart as fallback. ``initial_pi`` overrides the starting
    iterate explicitly (it must have Im >= 0).
    """
    cfg = cfg or DEFAULT_CONFIG
    z = complex(z)
    if z.imag <= 0:
        raise InvalidInput("Im z must be positive")
    bvals = np.ascontiguousarray(b.values)
    mass = b.mass
    pi0 = None
    if initial_pi is not None:
        pi0 = np.asarray(initial_pi, dtype=complex).copy()
        if pi0.shape != (b.n,):
            raise InvalidInput("initial_pi must match the grid size")
        if (pi0.imag < 0).any():
            raise InvalidInput("initial_pi must have nonnegative imaginary part")
    elif warm_start is not None:
        if warm_start.g.shape != (b.n,):
            raise InvalidInput("warm-start profile does not match the grid size")
        pi0 = np.asarray(warm_start.pi, dtype=complex).copy()
    if pi0 is not None:
        try:
            out = _run_stages(bvals, z.real, [z.imag], pi0, cfg, mass)
            return _build_profile(z, out)
        except NoConvergence:
            pass
    plan = _stage_plan(z.imag, mass, cfg)
    cold = np.zeros(b.n, dtype=complex)
    try:
        out = _run_stages(bvals, z.real, plan, cold, cfg, mass)
    except NoConvergence:
        if len(plan) > 1:
            raise
        # single certified-region stage stalled: retry through the ladder
        out = _run_stages(bvals, z.real, _ladder_heights(z.imag, mass, cfg), cold, cfg, mass)
    return _build_profile(z, out)


def _build_profile(z, out):
    g, pi, res, total, hist, stages = out
    return ResolventProfile(
        z=z,
        g=g,
        pi=pi,
        iterations=total,
        residual=res,
        residual_history=hist,
        stages=stages,
    )


def measured_decay_ratio(profile, window=10):
    """Geometric-mean residual decay over the last ``window`` iterations."""
    h = np.asarray(profile.residual_history, dtype=float)
    h = h[h > 0]
    if h.size < 2:
        return 0.0
    w = min(window, h.size - 1)
    return float((h[-1] / h[-1 - w]) ** (1.0 / w))


def solve_curve(b, contour, cfg=None, warm_start=True):
    """Solve S(z) along a contour, warm-starting down vertical chains.

    Points are processed in (descending Im z, ascending Re z) order; points
    sharing a real part form a chain in which each solve seeds the next.
    Chains are independent, so results do not depend on their interleaving.
    """
    cfg = cfg or DEFAULT_CONFIG
    pts = [complex(p) for p in np.asarray(contour, dtype=complex).ravel()]
    if not pts:
        raise InvalidInput("contour must contain at least one point")
    if any(p.imag <= 0 for p in pts):
        raise InvalidInput("contour points must have Im z > 0")
    order = sorted(range(len(pts)), key=lambda i: (-pts[i].imag, pts[i].real))
    previous_in_chain = {}
    profiles = [None] * len(pts)
    for i in order:
        zp = pts[i]
        seed = previous_in_chain.get(zp.real) if warm_start else None
        try:
            prof = solve_profile(b, zp, cfg, warm_start=seed)
        except NoConvergence as exc:
            raise NoConvergence(
                f"contour point z = {zp:.6g}: {exc}",
                stage=exc.stage,
                height=exc.height,
                residual=exc.residual,
            ) from exc
        profiles[i] = prof
        previous_in_chain[zp.real] = prof
    ordered = [profiles[i] for i in order]
    return StieltjesCurve(
        z=np.array([p.z for p in ordered]),
        S=np.array([p.S for p in ordered]),
        iterations=np.array([p.iterations for p in ordered], dtype=np.int64),
        residuals=np.array([p.residual for p in ordered]),
        source="solver",
    )


def _scalar_stage(t, z, v, damping, tol, max_iter):
    res = np.inf
    for it in range(max_iter):
        f = complex(-np.mean(t / (z + t * v)))
        res = abs(f - v)
        if res <= tol:
            return f, res, it + 1, True
        v = (1.0 - damping) * v + damping * f
    return v, res, max_iter, False


def _run_scalar_stages(t, re_z, heights, v0, cfg, m2):
    v = v0
    total = 0
    for idx, h in enumerate(heights):
        z = complex(re_z, h)
        d = _effective_damping(cfg, m2 / (h * h))
        v, res, its, ok = _scalar_stage(t, z, v, d, cfg.tolerance, cfg.max_iterations)
        total += its
        if not ok:
            raise NoConvergence(
                f"stage {idx} at Im z = {h:.6g}: residual {res:.3e} after {its} iterations",
                stage=idx,
                height=h,
                residual=res,
            )
    return v, res, total


def solve_product_form(t, z, cfg=None):
    """Solve the scalar reduction for a rank-one density b(x, y) = t(x) t(y).

    Continuation mirrors the full solver with the profile's mean square in
    the role of the contraction mass (it dominates the rank-one grid mass).
    """
    cfg = cfg or DEFAULT_CONFIG
    z = complex(z)
    if z.imag <= 0:
        raise InvalidInput("Im z must be positive")
    tv = np.asarray(t.values, dtype=float)
    m2 = float(np.mean(tv * tv))
    plan = [z.imag] if (m2 == 0.0 or z.imag > np.sqrt(m2)) else _ladder_heights(z.imag, m2, cfg)
    try:
        v, res, total = _run_scalar_stages(tv, z.real, plan, 0j, cfg, m2)
    except NoConvergence:
        if len(plan) > 1:
            raise
        v, res, total = _run_scalar_stages(
            tv, z.real, _ladder_heights(z.imag, m2, cfg), 0j, cfg, m2
        )
    mean_t = float(tv.mean())
    if v.imag < -1e-15 * (1.0 + abs(v)):
        raise LsdlabError("scalar solver postcondition failed: Im v >= 0")
    if tv.max() > 0 and mean_t > 0 and not v.imag > 0:
        raise LsdlabError("scalar solver postcondition failed: Im v > 0")
    if abs(v) > (1.0 + 1e-9) * mean_t / z.imag:
        raise LsdlabError("scalar solver postcondition failed: |v| <= mean(t)/Im z")
    s = -(1.0 + v * v) / z
    return ScalarSolution(z=z, v=v, S=complex(s), iterations=total, residual=res)
