"""Discretized energy functionals, canonical relations, residuals, recovery.

The total potential is always evaluated through the mixed form
Pi_p(w) = Xi(w, sigma_hat(w)) so that discrete duality identities hold
exactly; the quartic single-field form exists only as a test oracle.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .fem import AssembledSystem, shape_functions
from .linalg import SingularMatrixError


@dataclass
class EnergyReport:
    """Energies, gap measures and stationarity residuals at one (w, sigma) pair."""

    pi_p: float
    xi: float
    pi_d: float  # nan when G(sigma) is singular
    pi_d_defined: bool
    gap_quadratic: float
    duality_gap: float  # pi_p - pi_d (nan when pi_d undefined)
    res_equilibrium: float
    res_constitutive: float


def canonical_stress(eps, props, axial_lambda):
    """sigma = (2 E alpha / 3) eps - E lambda."""
    return 2.0 * props.E * props.alpha / 3.0 * eps - props.E * axial_lambda


def stationary_stress(w, sys: AssembledSystem):
    """sigma_hat(w): the unique maximizer of Xi(w, .), from K sigma = b(w) - lam_vec."""
    b = sys.strain_b(w)
    return linalg.solve_sym(sys.K, b - sys.lam_vec)


def total_complementary(w, sigma, sys: AssembledSystem):
    """Xi(w, sigma) = 1/2 w.G(sigma).w - 1/2 sigma.K.sigma - lam.sigma - f.w - c."""
    w = np.asarray(w, float)
    sigma = np.asarray(sigma, float)
    quad = 0.5 * w @ sys.G0 @ w + sigma @ sys.strain_b(w)
    return float(
        quad - 0.5 * sigma @ sys.K @ sigma - sys.lam_vec @ sigma - sys.f_vec @ w - sys.c
    )


def total_potential(w, sys: AssembledSystem):
    """Pi_p(w) = max over sigma of Xi(w, sigma) = Xi(w, sigma_hat(w))."""
    return total_complementary(w, stationary_stress(w, sys), sys)


def pure_complementary(sigma, sys: AssembledSystem):
    """Pi_d(sigma) = -1/2 f.G(sigma)^-1.f - 1/2 sigma.K.sigma - lam.sigma - c.

    Raises SingularMatrixError when det G(sigma) = 0 (sigma outside the
    admissible dual set).
    """
    sigma = np.asarray(sigma, float)
    G = sys.gap_matrix(sigma)
    wf = linalg.solve_sym(G, sys.f_vec)
    return float(
        -0.5 * sys.f_vec @ wf
        - 0.5 * sigma @ sys.K @ sigma
        - sys.lam_vec @ sigma
        - sys.c
    )


def reformulated_complementary(sigma, w, sys: AssembledSystem):
    """Linearized dual energy: -1/2 f.G^-1.f - 1/2 w.M(sigma).w - 1/2 lam.sigma - c."""
    sigma = np.asarray(sigma, float)
    w = np.asarray(w, float)
    G = sys.gap_matrix(sigma)
    wf = linalg.solve_sym(G, sys.f_vec)
    wMw = sigma @ sys.strain_b(w)  # w.M(sigma).w = sum_i sigma_i b_i(w)
    return float(-0.5 * sys.f_vec @ wf - 0.5 * wMw - 0.5 * sys.lam_vec @ sigma - sys.c)


def gap_and_residuals(w, sigma, sys: AssembledSystem):
    """Full EnergyReport at an arbitrary (w, sigma) pair."""
    w = np.asarray(w, float)
    sigma = np.asarray(sigma, float)
    G = sys.gap_matrix(sigma)
    gap_q = float(0.5 * w @ G @ w)
    res_eq = float(np.linalg.norm(G @ w - sys.f_vec))
    res_con = float(
        np.linalg.norm(sys.strain_b(w) - sys.K @ sigma - sys.lam_vec)
    )
    pi_p = total_potential(w, sys)
    xi = total_complementary(w, sigma, sys)
    try:
        pi_d = pure_complementary(sigma, sys)
        defined = True
    except SingularMatrixError:
        pi_d = float("nan")
        defined = False
    return EnergyReport(
        pi_p=pi_p,
        xi=xi,
        pi_d=pi_d,
        pi_d_defined=defined,
        gap_quadratic=gap_q,
        duality_gap=pi_p - pi_d if defined else float("nan"),
        res_equilibrium=res_eq,
        res_constitutive=res_con,
    )


def primal_gradient(w, sys: AssembledSystem):
    """grad Pi_p(w) = G(sigma_hat(w)) w - f."""
    sig = stationary_stress(w, sys)
    return sys.gap_matrix(sig) @ np.asarray(w, float) - sys.f_vec


def strain_sensitivity(w, sys: AssembledSystem):
    """B(w) with columns Hsens[i] . w (n_red x (m+1))."""
    return np.einsum("ijk,k->ji", sys.Hsens, np.asarray(w, float))


def primal_hessian(w, sys: AssembledSystem):
    """hess Pi_p(w) = G(sigma_hat(w)) + B(w) K^-1 B(w)^T."""
    w = np.asarray(w, float)
    sig = stationary_stress(w, sys)
    B = strain_sensitivity(w, sys)
    KinvBt = linalg.solve_sym(sys.K, B.T)
    return sys.gap_matrix(sig) + B @ KinvBt


def dual_hessian(w, sigma, sys: AssembledSystem):
    """hess Pi_d(sigma) = -(B^T G(sigma)^-1 B + K) with B evaluated at w = G^-1 f."""
    B = strain_sensitivity(w, sys)
    G = sys.gap_matrix(sigma)
    GinvB = linalg.solve_sym(G, B)
    return -(B.T @ GinvB + sys.K)


def recover_axial(w, sys: AssembledSystem):
    """Axial displacement u at the nodes, anchored at u(0) = 0.

    u'(x) = -1/2 (1+mu) w'(x)^2 - lambda / (2 h (1+mu)); the squared Hermite
    slope is quartic per element, integrated exactly with 3-point Gauss.
    """
    props = sys.props
    mesh = sys.mesh
    lam = sys.load.axial_lambda
    Le = mesh.Le
    wf = sys.inject(w)
    gauss_xi = np.array([-np.sqrt(3.0 / 5.0), 0.0, np.sqrt(3.0 / 5.0)])
    gauss_wt = np.array([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
    const = lam / (2.0 * props.h * (1.0 + props.mu))
    u = np.zeros(mesh.m + 1)
    for e in range(mesh.m):
        we = wf[2 * e : 2 * e + 4]
        acc = 0.0
        for xi, wt in zip(gauss_xi, gauss_wt):
            _, dN, _, _ = shape_functions(xi, Le)
            slope = dN @ we
            acc += wt * (0.5 * (1.0 + props.mu) * slope**2 + const)
        u[e + 1] = u[e] - acc * Le / 2.0
    return u
