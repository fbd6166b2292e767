"""Primal-dual branch solver and triality classification.

Each branch runs an outer loop alternating a dual stress update with a
proximally damped primal solve, then sharpens the limit with a stationarity
Newton so the canonical equations hold to the requested residual tolerance.
The global branch's stress update is the positive-semidefinite-constrained
SDP with the primal iterate frozen; the equilibrium response through a PSD
gap matrix can only align with the load, which is what keeps the iteration
inside the load-aligned energy well.  The local branches' stress update is
the unconstrained maximizer (the definiteness-constrained SDPs of the local
branches have no fixed point at the corresponding equilibrium states; their
builders remain available and unit-tested in :mod:`cdbeam.sdp`).
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels as kern
from . import linalg
from .buckling import critical_load
from .energy import (
    EnergyReport,
    dual_hessian,
    gap_and_residuals,
    primal_gradient,
    primal_hessian,
    pure_complementary,
    stationary_stress,
    total_complementary,
    total_potential,
)
from .fem import AssembledSystem, assemble
from .linalg import SingularMatrixError
from .model import SolverSettings
from .oracle import buckling_mode, newton_stationary, well_amplitude
from .sdp import BranchKind, LmiStatus, build_branch_sdp, global_branch_start, solve_lmi


class Classification(Enum):
    GLOBAL_MIN = "GlobalMin"
    LOCAL_MAX = "LocalMax"
    LOCAL_MIN = "LocalMin"
    INDETERMINATE = "Indeterminate"


class BranchError(RuntimeError):
    """A branch run failed (SDP failure, singular iterate, divergence)."""


@dataclass
class BranchSolution:
    branch: BranchKind
    w: np.ndarray
    sigma: np.ndarray
    iterations: int
    converged: bool
    energy: EnergyReport
    classification: Classification
    inertia_G: tuple
    min_eig_hess: float
    loop_iterations: int = 0
    polish_iterations: int = 0
    sdp_gap: float = float("nan")  # |Pi_p - Pi_d| at the last SDP-loop pair (global branch)
    sdp_status: str = ""
    message: str = ""


@dataclass
class TrialityReport:
    lambda_cr_rayleigh: float
    lambda_cr_scaled: float
    branches: dict = field(default_factory=dict)  # BranchKind -> BranchSolution
    absent: dict = field(default_factory=dict)  # BranchKind -> reason string
    system: AssembledSystem = None

    def get(self, kind: BranchKind):
        return self.branches.get(kind)


def classify(w, sigma, sys: AssembledSystem, settings: SolverSettings):
    """Triality label of a converged pair from the gap sign and Hessian spectra.

    The scalar gap 1/2 w.G(sigma).w is positive exactly at the load-aligned
    state: a nonnegative gap with a positive-semidefinite primal Hessian is
    the global minimizer; negative gap with PSD primal Hessian is the
    counter-load local minimum; otherwise a negative-semidefinite dual
    Hessian identifies the unbuckled local-max state.
    """
    band = settings.classify_for(sys.g0_max)
    G = sys.gap_matrix(sigma)
    gap_q = float(0.5 * w @ G @ w)
    ev_p, _ = linalg.eig_sym(primal_hessian(w, sys))
    primal_psd = ev_p[0] >= -band
    gap_band = band * (1.0 + float(w @ w))
    if primal_psd:
        return Classification.GLOBAL_MIN if gap_q >= -gap_band else Classification.LOCAL_MIN
    ev_d, _ = linalg.eig_sym(dual_hessian(w, sigma, sys))
    if ev_d[-1] <= band:
        return Classification.LOCAL_MAX
    return Classification.INDETERMINATE


def _prox_step(sys, sigma, w, branch, settings):
    """Damped primal update: w+ = (G(sigma) + rho I)^-1 (f + rho w), rho escalated
    until G + rho I is positive definite and the branch acceptance rule holds.
    Returns (w+, accepted)."""
    G = sys.gap_matrix(sigma)
    rho = 1e-10 * (1.0 + sys.g0_max)
    f = sys.f_vec
    if branch is BranchKind.LOCAL_MAX:
        ref = np.linalg.norm(primal_gradient(w, sys))
    else:
        ref = total_potential(w, sys)
    sign = -1.0 if branch is BranchKind.LOCAL_MIN else 1.0
    eye = np.eye(sys.n_red)
    for _ in range(60):
        L, pd = kern.chol_lower(G + rho * eye)
        if not pd:
            rho *= 8.0
            continue
        rhs = (f + rho * w).reshape(-1, 1)
        wn = kern.tri_lower_t_solve(L, kern.tri_lower_solve(L, rhs))[:, 0]
        if branch is BranchKind.LOCAL_MAX:
            if np.linalg.norm(primal_gradient(wn, sys)) <= ref * (1.0 + 1e-12) + 1e-300:
                return wn, True
        else:
            aligned = sign * float(f @ wn) >= -1e-14 * (1.0 + np.linalg.norm(f))
            if total_potential(wn, sys) <= ref + 1e-14 * (1.0 + abs(ref)) and aligned:
                return wn, True
        rho *= 8.0
    return w, False


def pdsdp_branch(branch: BranchKind, sys: AssembledSystem, settings: SolverSettings, w0=None):
    """Run one triality branch: damped outer loop, then Newton polish.

    Raises BranchError when the stress update fails or the iteration diverges.
    """
    if w0 is None:
        w0 = linalg.solve_sym(sys.G0, sys.f_vec)
    w = np.asarray(w0, float).copy()
    fnorm = np.linalg.norm(sys.f_vec)
    # the outer loop selects the branch basin; when polishing is on, the final
    # residual tolerance is met by the Newton stage, so the loop itself only
    # needs to stabilize loosely
    loop_tol = max(settings.outer_tol, 1e-3 if settings.polish else 1e-10)
    loop_cap = min(settings.outer_max_iter, 12 if settings.polish else settings.outer_max_iter)
    sdp_loop_settings = settings.with_overrides(sdp_tol=max(settings.sdp_tol, 1e-7))
    guard = 1e6 * (1.0 + np.linalg.norm(w0))

    sdp_gap = float("nan")
    sdp_status = ""
    sigma = None
    warm = None
    k = 0
    for k in range(1, loop_cap + 1):
        if branch is BranchKind.GLOBAL_MIN:
            prob = build_branch_sdp(branch, w, sys, settings)
            if warm is None:
                x0 = global_branch_start(sys, w)
            else:
                sig_w = 0.999 * warm
                t_w = _xi_value(sys, w, sig_w) - max(1.0, 1e-2 * abs(_xi_value(sys, w, sig_w)))
                x0 = np.concatenate([sig_w, [t_w]])
            sol = solve_lmi(prob, sdp_loop_settings, x0=x0)
            sdp_status = sol.status.value
            if sol.status in (LmiStatus.INFEASIBLE, LmiStatus.NUMERICAL_FAILURE):
                raise BranchError(f"stress SDP failed with status {sol.status.value}")
            sigma = sol.x[: sys.mesh.m + 1]
            warm = sigma
        else:
            sigma = stationary_stress(w, sys)
        wn, ok = _prox_step(sys, sigma, w, branch, settings)
        if not ok:
            break
        rel = np.linalg.norm(wn - w) / max(np.linalg.norm(wn), 1e-300)
        w = wn
        if np.linalg.norm(w) > guard:
            raise BranchError("primal iterate diverged")
        if rel <= loop_tol:
            break

    if branch is BranchKind.GLOBAL_MIN and sigma is not None:
        try:
            sdp_gap = abs(total_potential(w, sys) - pure_complementary(sigma, sys))
        except SingularMatrixError:
            sdp_gap = float("nan")

    polish_iters = 0
    if settings.polish:
        w, polish_iters, _ = newton_stationary(sys, w, settings.outer_tol, settings.outer_max_iter)
    sig_final = stationary_stress(w, sys)
    energy = gap_and_residuals(w, sig_final, sys)
    converged = bool(
        energy.res_equilibrium <= settings.outer_tol * (1.0 + fnorm)
        and energy.res_constitutive <= settings.outer_tol
    )
    band = settings.classify_for(sys.g0_max)
    inertia_G = linalg.eig_inertia(sys.gap_matrix(sig_final), band)
    ev_h, _ = linalg.eig_sym(primal_hessian(w, sys))
    label = classify(w, sig_final, sys, settings)
    return BranchSolution(
        branch=branch,
        w=w,
        sigma=sig_final,
        iterations=k + polish_iters,
        converged=converged,
        energy=energy,
        classification=label,
        inertia_G=inertia_G,
        min_eig_hess=float(ev_h[0]),
        loop_iterations=k,
        polish_iterations=polish_iters,
        sdp_gap=sdp_gap,
        sdp_status=sdp_status,
    )


def _xi_value(sys, w, sigma):
    return total_complementary(w, sigma, sys)


ALL_BRANCHES = (BranchKind.GLOBAL_MIN, BranchKind.LOCAL_MAX, BranchKind.LOCAL_MIN)


def run_triality(props, load, support, mesh, settings=None, branches=ALL_BRANCHES):
    """Assemble, compute the critical load, and run the requested branches.

    Branch order is global -> localmax -> localmin (the localmin start is the
    negated global deflection, the counter-load buckle).  Local branches whose
    converged deflection coincides with the global one are reported absent
    with a collapse message, which is the expected pre-buckling regime.
    """
    settings = settings or SolverSettings()
    sys = assemble(props, load, support, mesh)
    lam_r, lam_s = critical_load(props, support, mesh)
    report = TrialityReport(lambda_cr_rayleigh=lam_r, lambda_cr_scaled=lam_s, system=sys)

    wanted = list(branches)
    order = [b for b in ALL_BRANCHES if b in wanted]
    w_bend = linalg.solve_sym(sys.G0, sys.f_vec)
    w_global = None

    for kind in order:
        try:
            if kind is BranchKind.LOCAL_MIN:
                if w_global is not None:
                    w0 = -w_global
                else:
                    v = buckling_mode(sys)
                    w0 = -well_amplitude(sys, v) * v
            elif kind is BranchKind.GLOBAL_MIN and np.linalg.norm(sys.f_vec) == 0.0:
                v = buckling_mode(sys)
                w0 = well_amplitude(sys, v) * v
            else:
                w0 = w_bend
            sol = pdsdp_branch(kind, sys, settings, w0=w0)
        except (BranchError, SingularMatrixError) as exc:
            report.absent[kind] = str(exc)
            continue
        if kind is BranchKind.GLOBAL_MIN and sol.converged:
            w_global = sol.w
        if kind is not BranchKind.GLOBAL_MIN and w_global is not None:
            if np.max(np.abs(sol.w - w_global)) <= 1e-6 * (1.0 + np.max(np.abs(sol.w))):
                report.absent[kind] = "collapsed onto the global branch (single-solution regime)"
                continue
        report.branches[kind] = sol
    return report
