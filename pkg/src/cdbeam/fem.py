"""Mixed finite elements: cubic Hermite deflection, linear nodal stress.

Element matrices use the closed forms (no runtime quadrature); the test
suite carries an independent Gauss-quadrature oracle.  Full-system DOF
ordering is (w0, th0, w1, th1, ...); essential boundary conditions are
imposed by row/column elimination so the inertia of the reduced gap matrix
stays meaningful.
"""

from dataclasses import dataclass

import numpy as np

from .model import BeamProperties, LoadCase, LoadKind, Mesh, SupportSpec, validate_load_mesh


def shape_functions(xi, Le):
    """Hermite/linear shape values at xi in [-1, 1] for an element of length Le.

    Returns (Nw, dNw_dx, d2Nw_dx2, Nsig); derivatives are with respect to x,
    i.e. each d/dxi carries a 2/Le factor.
    """
    if not -1.0 <= xi <= 1.0:
        raise ValueError("xi outside the reference element [-1, 1]")
    if Le <= 0:
        raise ValueError("element length must be positive")
    Nw = np.array(
        [
            0.25 * (1 - xi) ** 2 * (2 + xi),
            Le / 8.0 * (1 - xi) ** 2 * (1 + xi),
            0.25 * (1 + xi) ** 2 * (2 - xi),
            Le / 8.0 * (1 + xi) ** 2 * (xi - 1),
        ]
    )
    dNw_dxi = np.array(
        [
            0.25 * (-2 * (1 - xi) * (2 + xi) + (1 - xi) ** 2),
            Le / 8.0 * (-2 * (1 - xi) * (1 + xi) + (1 - xi) ** 2),
            0.25 * (2 * (1 + xi) * (2 - xi) - (1 + xi) ** 2),
            Le / 8.0 * (2 * (1 + xi) * (xi - 1) + (1 + xi) ** 2),
        ]
    )
    d2Nw_dxi2 = np.array(
        [
            0.25 * (6 * xi),
            Le / 8.0 * (6 * xi - 2),
            0.25 * (-6 * xi),
            Le / 8.0 * (6 * xi + 2),
        ]
    )
    Nsig = np.array([0.5 * (1 - xi), 0.5 * (1 + xi)])
    return Nw, dNw_dxi * (2.0 / Le), d2Nw_dxi2 * (4.0 / Le**2), Nsig


def hermite_bending_matrix(Le, EI):
    """Classical 4x4 bending stiffness for one element."""
    return EI * np.array(
        [
            [12 / Le**3, 6 / Le**2, -12 / Le**3, 6 / Le**2],
            [6 / Le**2, 4 / Le, -6 / Le**2, 2 / Le],
            [-12 / Le**3, -6 / Le**2, 12 / Le**3, -6 / Le**2],
            [6 / Le**2, 2 / Le, -6 / Le**2, 4 / Le],
        ]
    )


def element_geometric_matrix(sig_left, sig_right, Le):
    """M^e: the sigma-weighted geometric matrix, int (1/2) sigma(x) Nw' Nw'^T dx."""
    s1, s2 = float(sig_left), float(sig_right)
    M11 = 3 * (s1 + s2) / (10 * Le)
    M12 = s2 / 20
    M14 = s1 / 20
    M22 = Le * (3 * s1 + s2) / 60
    M24 = -Le * (s1 + s2) / 120
    M44 = Le * (s1 + 3 * s2) / 60
    return np.array(
        [
            [M11, M12, -M11, M14],
            [M12, M22, -M12, M24],
            [-M11, -M12, M11, -M14],
            [M14, M24, -M14, M44],
        ]
    )


def element_gap_matrix(sig_left, sig_right, Le, EI):
    """G^e = bending + 2 M^e: the element contribution to the gap-function Hessian."""
    if Le <= 0 or EI <= 0:
        raise ValueError("Le and EI must be positive")
    return hermite_bending_matrix(Le, EI) + 2.0 * element_geometric_matrix(
        sig_left, sig_right, Le
    )


# dG^e/dsigma at the left and right stress node (unit-sigma geometric sensitivities)
def _dG_dsig(Le):
    a = 3 / (5 * Le)
    dL = np.array(
        [
            [a, 0.0, -a, 0.1],
            [0.0, Le / 10, 0.0, -Le / 60],
            [-a, 0.0, a, -0.1],
            [0.1, -Le / 60, -0.1, Le / 30],
        ]
    )
    dR = np.array(
        [
            [a, 0.1, -a, 0.0],
            [0.1, Le / 30, -0.1, -Le / 60],
            [-a, -0.1, a, 0.0],
            [0.0, -Le / 60, 0.0, Le / 10],
        ]
    )
    return dL, dR


def element_static_parts(props: BeamProperties, axial_lambda, Le):
    """(K_e, lambda_e, c_e): stress compliance, axial coupling and constant term."""
    if Le <= 0:
        raise ValueError("element length must be positive")
    Ke = Le / (props.E * props.alpha) * np.array([[0.5, 0.25], [0.25, 0.5]])
    lam_e = axial_lambda * Le / props.alpha * np.array([0.75, 0.75])
    c_e = 3.0 * props.E * Le * axial_lambda**2 / (4.0 * props.alpha)
    return Ke, lam_e, c_e


def element_load(load: LoadCase, Le, e, mesh: Mesh):
    """Element load vector plus an optional (node, force) point contribution."""
    validate_load_mesh(load, mesh)
    if load.kind is LoadKind.UNIFORM:
        f = load.f
        fe = np.array([f * Le / 2, f * Le**2 / 12, f * Le / 2, -(f * Le**2) / 12])
        return fe, None
    fe = np.zeros(4)
    point = (mesh.m // 2, load.f) if e == 0 else None
    return fe, point


@dataclass
class AssembledSystem:
    """Reduced global system for one (beam, load, support, mesh) case.

    G(sigma) = G0 + sum_i sigma_i Hsens[i] on the reduced deflection space;
    K, lam_vec and c live on the stress space (no essential conditions).
    """

    props: BeamProperties
    load: LoadCase
    support: SupportSpec
    mesh: Mesh
    n_full: int
    n_red: int
    G0: np.ndarray
    Hsens: np.ndarray  # (m+1, n_red, n_red)
    K: np.ndarray
    lam_vec: np.ndarray
    f_vec: np.ndarray
    c: float
    free: np.ndarray  # reduced -> full DOF indices
    _elem_idx: np.ndarray = None
    _dGL: np.ndarray = None
    _dGR: np.ndarray = None

    def inject(self, w_red):
        """Reduced deflection vector -> full (fixed DOFs zero)."""
        w = np.zeros(self.n_full)
        w[self.free] = w_red
        return w

    def extract(self, w_full):
        return np.asarray(w_full)[self.free]

    def gap_matrix(self, sigma):
        """G(sigma) on the reduced space."""
        return self.G0 + np.einsum("i,ijk->jk", np.asarray(sigma, float), self.Hsens)

    def geometric_matrix(self, sigma):
        """M(sigma) = (G(sigma) - G0)/2 on the reduced space."""
        return 0.5 * np.einsum("i,ijk->jk", np.asarray(sigma, float), self.Hsens)

    def strain_b(self, w_red):
        """b_i(w) = 1/2 w^T Hsens[i] w, computed element by element."""
        wf = self.inject(w_red)
        We = wf[self._elem_idx]  # (m, 4)
        bL = 0.5 * np.einsum("ei,ij,ej->e", We, self._dGL, We)
        bR = 0.5 * np.einsum("ei,ij,ej->e", We, self._dGR, We)
        b = np.zeros(self.mesh.m + 1)
        np.add.at(b, np.arange(self.mesh.m), bL)
        np.add.at(b, np.arange(1, self.mesh.m + 1), bR)
        return b

    @property
    def g0_max(self):
        return float(np.max(np.abs(self.G0)))


def assemble(props: BeamProperties, load: LoadCase, support: SupportSpec, mesh: Mesh):
    """Assemble the reduced system by standard DOF overlap."""
    if abs(mesh.L - props.L) > 1e-12 * max(1.0, props.L):
        raise ValueError("mesh length does not match the beam length")
    validate_load_mesh(load, mesh)
    m = mesh.m
    Le = mesh.Le
    n_full = 2 * (m + 1)
    EI = props.EI

    G0 = np.zeros((n_full, n_full))
    H = np.zeros((m + 1, n_full, n_full))
    Kmat = np.zeros((m + 1, m + 1))
    lam_vec = np.zeros(m + 1)
    f_full = np.zeros(n_full)
    c = 0.0

    Gb = hermite_bending_matrix(Le, EI)
    dGL, dGR = _dG_dsig(Le)
    Ke, lam_e, c_e = element_static_parts(props, load.axial_lambda, Le)

    for e in range(m):
        idx = slice(2 * e, 2 * e + 4)
        G0[idx, idx] += Gb
        H[e, idx, idx] += dGL
        H[e + 1, idx, idx] += dGR
        Kmat[e : e + 2, e : e + 2] += Ke
        lam_vec[e : e + 2] += lam_e
        c += c_e
        fe, point = element_load(load, Le, e, mesh)
        f_full[idx] += fe
        if point is not None:
            node, force = point
            f_full[2 * node] += force

    fixed = support.fixed_dofs(m)
    free = np.array([i for i in range(n_full) if i not in set(fixed)], dtype=np.int64)

    sys = AssembledSystem(
        props=props,
        load=load,
        support=support,
        mesh=mesh,
        n_full=n_full,
        n_red=len(free),
        G0=G0[np.ix_(free, free)],
        Hsens=np.ascontiguousarray(H[:, free][:, :, free]),
        K=Kmat,
        lam_vec=lam_vec,
        f_vec=f_full[free],
        c=c,
        free=free,
    )
    sys._elem_idx = (2 * np.arange(m))[:, None] + np.arange(4)[None, :]
    sys._dGL, sys._dGR = dGL, dGR
    return sys
