"""Independent verification path: Newton on the primal functional.

multistart_newton enumerates the equilibrium states from deterministic
physics-informed seeds: descent (modified Newton) from bending-type and
buckling-mode seeds finds the minima, a plain stationarity Newton from zero
captures the unbuckled state whatever its index.  Both the solver branches
and this oracle optimize the identical mixed-form functional, so any
disagreement isolates algorithm bugs rather than discretization choices.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels as kern
from . import linalg
from .energy import primal_gradient, primal_hessian, total_potential
from .fem import AssembledSystem
from .model import SolverSettings


class PointKind(Enum):
    MIN = "min"
    MAX = "max"
    SADDLE = "saddle"


@dataclass
class CriticalPoint:
    w: np.ndarray
    pi_p: float
    hess_inertia: tuple
    kind: PointKind


def primal_derivatives(w, sys: AssembledSystem):
    """(gradient, Hessian) of the mixed-form total potential at w."""
    return primal_gradient(w, sys), primal_hessian(w, sys)


def newton_stationary(sys, w0, tol, max_iter=200):
    """Damped Newton on grad Pi_p = 0 (converges to saddles as well as extrema)."""
    w = np.asarray(w0, float).copy()
    fnorm = np.linalg.norm(sys.f_vec)
    for it in range(max_iter):
        g = primal_gradient(w, sys)
        ng = np.linalg.norm(g)
        if ng <= tol * (1.0 + fnorm):
            return w, it, True
        H = primal_hessian(w, sys)
        try:
            d = linalg.solve_sym(H, -g)
        except linalg.SingularMatrixError:
            d = -g
        step = 1.0
        moved = False
        while step > 1e-14:
            wn = w + step * d
            if np.linalg.norm(primal_gradient(wn, sys)) <= (1.0 - 1e-4 * step) * ng:
                moved = True
                break
            step *= 0.5
        if not moved:
            # Levenberg-style fallback on the residual norm
            ridge = 1e-8 * (1.0 + np.max(np.abs(H)))
            improved = False
            for _ in range(40):
                try:
                    d = linalg.solve_sym(H + ridge * np.eye(len(w)), -g)
                except linalg.SingularMatrixError:
                    ridge *= 10.0
                    continue
                wn = w + d
                if np.linalg.norm(primal_gradient(wn, sys)) < ng:
                    improved = True
                    break
                ridge *= 10.0
            if not improved:
                return w, it, False
        w = wn
    g = primal_gradient(w, sys)
    return w, max_iter, bool(np.linalg.norm(g) <= tol * (1.0 + fnorm))


def newton_minimize(sys, w0, tol, max_iter=300):
    """Descent Newton with eigenvalue modification; converges to local minima only.

    Uses a Cholesky fast path while the Hessian is positive definite and falls
    back to an eigenvalue-floored direction on indefinite stretches.
    """
    w = np.asarray(w0, float).copy()
    fnorm = np.linalg.norm(sys.f_vec)
    for it in range(max_iter):
        g = primal_gradient(w, sys)
        if np.linalg.norm(g) <= tol * (1.0 + fnorm):
            H = primal_hessian(w, sys)
            _, pd = kern.chol_lower(H)
            if pd:
                return w, it, True
            ev, V = linalg.eig_sym(H)
            if ev[0] >= -1e-8 * max(1.0, abs(ev[-1])):
                return w, it, True
            # stationary but not a minimum: push off along the negative direction
            w = w + 1e-2 * (1.0 + np.max(np.abs(w))) * V[:, 0]
            continue
        H = primal_hessian(w, sys)
        L, pd = kern.chol_lower(H)
        if pd:
            d = kern.tri_lower_t_solve(L, kern.tri_lower_solve(L, -g.reshape(-1, 1)))[:, 0]
        else:
            ev, V = linalg.eig_sym(H)
            floor = 1e-8 * max(1.0, abs(ev[-1]))
            ev_mod = np.where(ev < floor, np.maximum(floor, np.abs(ev)), ev)
            d = -V @ ((V.T @ g) / ev_mod)
        p0 = total_potential(w, sys)
        gd = float(g @ d)
        step = 1.0
        while step > 1e-14 and total_potential(w + step * d, sys) > p0 + 1e-4 * step * gd:
            step *= 0.5
        if step <= 1e-14:
            return w, it, False
        w = w + step * d
    return w, max_iter, False


def buckling_mode(sys: AssembledSystem):
    """First buckling eigenvector on the reduced space, load-aligned sign."""
    K_bend = sys.G0
    K_geo = sys.props.E * np.einsum("ijk->jk", sys.Hsens)
    L = linalg.cholesky(K_geo)
    X = kern.tri_lower_solve(L, K_bend)
    C = kern.tri_lower_solve(L, np.ascontiguousarray(X.T))
    ev, V = linalg.eig_sym(0.5 * (C + C.T))
    v = kern.tri_lower_t_solve(L, np.ascontiguousarray(V[:, :1]))[:, 0]
    if sys.f_vec @ v < 0:
        v = -v
    nv = np.linalg.norm(v)
    return v / nv if nv > 0 else v


def well_amplitude(sys: AssembledSystem, v):
    """Scale s so that the mean strain of s*v matches the stress-free strain 3 lam / (2 alpha)."""
    lam = sys.load.axial_lambda
    eps0 = 3.0 * lam / (2.0 * sys.props.alpha)
    total = float(np.sum(sys.strain_b(v)))  # = integral of 1/2 w'^2 for w = v
    if total <= 0 or eps0 <= 0:
        return 1.0
    return float(np.sqrt(eps0 * sys.props.L / total))


def default_seeds(sys: AssembledSystem, n_starts):
    """Deterministic seed list: bending +/- and scaled buckling mode +/- (descent),
    plus the zero seed (stationarity).  Extra starts rescale the mode seed."""
    wb = linalg.solve_sym(sys.G0, sys.f_vec)
    v = buckling_mode(sys)
    s = well_amplitude(sys, v)
    seeds = [("min", wb), ("min", -wb), ("min", s * v), ("min", -s * v), ("stat", np.zeros(sys.n_red))]
    extra_scales = (0.5, 2.0, 0.25, 4.0)
    i = 0
    while len(seeds) < n_starts:
        sc = extra_scales[i % len(extra_scales)]
        sign = 1.0 if (i // len(extra_scales)) % 2 == 0 else -1.0
        seeds.append(("min", sign * sc * s * v))
        i += 1
    return seeds[: max(n_starts, 5)]


def multistart_newton(sys: AssembledSystem, settings: SolverSettings, n_starts=5):
    """Distinct critical points of the discrete total potential, sorted by energy."""
    tol = min(settings.outer_tol, 1e-9)
    band = settings.classify_for(sys.g0_max)
    points = []
    for mode, w0 in default_seeds(sys, n_starts):
        if mode == "min":
            w, _, ok = newton_minimize(sys, w0, tol)
        else:
            w, _, ok = newton_stationary(sys, w0, tol)
        if not ok:
            continue
        dup = False
        for cp in points:
            if np.max(np.abs(w - cp.w)) <= 1e-6 * (1.0 + np.max(np.abs(w))):
                dup = True
                break
        if dup:
            continue
        H = primal_hessian(w, sys)
        inert = linalg.eig_inertia(H, band)
        npos, nneg, nzero = inert
        if nneg == 0:
            kind = PointKind.MIN
        elif npos == 0:
            kind = PointKind.MAX
        else:
            kind = PointKind.SADDLE
        points.append(CriticalPoint(w=w, pi_p=total_potential(w, sys), hess_inertia=inert, kind=kind))
    points.sort(key=lambda cp: cp.pi_p)
    return points
