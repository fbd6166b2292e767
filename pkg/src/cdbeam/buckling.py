"""Euler critical load of the discretized beam."""

import numpy as np

from . import linalg
from .fem import assemble
from .model import BeamProperties, LoadCase, Mesh, SupportSpec


def critical_load(props: BeamProperties, support: SupportSpec, mesh: Mesh):
    """(lambda_cr_rayleigh, lambda_cr_scaled).

    lambda_cr_rayleigh is the smallest generalized eigenvalue of
    K_bend v = L K_geo v on the reduced space, with K_bend the Hermite
    bending stiffness (EI Nw'' Nw''^T) and K_geo the axial form
    (E Nw' Nw'^T).  lambda_cr_scaled multiplies it by (1+mu)(1-mu^2),
    the conversion between the axial-load parameter and the physical
    end force; reported reference values use the scaled number.
    """
    sys = assemble(props, LoadCase.uniform(0.0, 0.0), support, mesh)
    K_bend = sys.G0
    K_geo = props.E * np.einsum("ijk->jk", sys.Hsens)
    try:
        lam_r = linalg.gen_eig_sym_min(K_bend, K_geo)
    except linalg.NotPositiveDefiniteError as exc:
        raise linalg.NotPositiveDefiniteError(
            "geometric stiffness is not positive definite on the reduced space"
        ) from exc
    scale = (1.0 + props.mu) * (1.0 - props.mu**2)
    return float(lam_r), float(scale * lam_r)
