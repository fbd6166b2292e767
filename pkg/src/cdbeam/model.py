"""Domain types: beam properties, loads, supports, mesh, solver settings."""

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np


class ModelError(ValueError):
    """Invalid physical or discretization data."""


@dataclass(frozen=True)
class BeamProperties:
    """Material and geometry constants.

    ``h`` is the half-height: a beam of height 0.1 m has h = 0.05 m.
    ``I = 2 h^3 / 3`` and ``alpha = 3 h (1 - mu^2)`` are derived.
    """

    E: float
    mu: float
    L: float
    h: float
    I: float = field(init=False)
    alpha: float = field(init=False)

    def __post_init__(self):
        if not (self.E > 0 and self.L > 0 and self.h > 0):
            raise ModelError("E, L and h must be positive")
        if not (0.0 <= self.mu < 0.5):
            raise ModelError("Poisson ratio must satisfy 0 <= mu < 0.5")
        object.__setattr__(self, "I", 2.0 * self.h**3 / 3.0)
        object.__setattr__(self, "alpha", 3.0 * self.h * (1.0 - self.mu**2))

    @property
    def EI(self):
        return self.E * self.I


def derive_constants(E, mu, L, h):
    """BeamProperties with I and alpha populated; raises ModelError on bad input."""
    return BeamProperties(E=float(E), mu=float(mu), L=float(L), h=float(h))


class LoadKind(Enum):
    UNIFORM = "uniform"
    CENTER_POINT = "center_point"


@dataclass(frozen=True)
class LoadCase:
    """Lateral load (uniform N/m or center point force N) plus axial parameter lambda (m^2)."""

    kind: LoadKind
    f: float
    axial_lambda: float

    def __post_init__(self):
        if self.axial_lambda < 0:
            raise ModelError("axial load parameter lambda must be >= 0")

    @staticmethod
    def uniform(f, axial_lambda):
        return LoadCase(LoadKind.UNIFORM, float(f), float(axial_lambda))

    @staticmethod
    def center_point(f, axial_lambda):
        return LoadCase(LoadKind.CENTER_POINT, float(f), float(axial_lambda))


class SupportKind(Enum):
    SIMPLY_SUPPORTED = "simply_supported"
    CLAMPED = "clamped"
    CUSTOM = "custom"


@dataclass(frozen=True)
class SupportSpec:
    """Essential boundary conditions on the deflection DOFs.

    Simply supported fixes w at both end nodes (rotations free; the moment
    condition is natural in the Hermite discretization).  Clamped fixes w
    and theta at both ends.  Custom takes explicit fixed DOF indices in the
    full (w0, th0, w1, th1, ...) numbering.
    """

    kind: SupportKind
    fixed: tuple = ()

    @staticmethod
    def simply_supported():
        return SupportSpec(SupportKind.SIMPLY_SUPPORTED)

    @staticmethod
    def clamped():
        return SupportSpec(SupportKind.CLAMPED)

    @staticmethod
    def custom(fixed_dofs):
        return SupportSpec(SupportKind.CUSTOM, tuple(int(i) for i in fixed_dofs))

    def fixed_dofs(self, m):
        """Sorted fixed DOF indices for a mesh with m elements."""
        if self.kind is SupportKind.SIMPLY_SUPPORTED:
            out = (0, 2 * m)
        elif self.kind is SupportKind.CLAMPED:
            out = (0, 1, 2 * m, 2 * m + 1)
        else:
            out = self.fixed
        n_full = 2 * (m + 1)
        for i in out:
            if not (0 <= i < n_full):
                raise ModelError(f"fixed DOF {i} out of range for m={m}")
        return tuple(sorted(set(out)))


@dataclass(frozen=True)
class Mesh:
    """Uniform subdivision of [0, L] into m elements."""

    m: int
    L: float

    def __post_init__(self):
        if self.m < 2:
            raise ModelError("mesh needs at least 2 elements")
        if self.L <= 0:
            raise ModelError("mesh length must be positive")

    @property
    def Le(self):
        return self.L / self.m

    @property
    def node_x(self):
        return np.linspace(0.0, self.L, self.m + 1)


def validate_load_mesh(load, mesh):
    if load.kind is LoadKind.CENTER_POINT and mesh.m % 2 != 0:
        raise ModelError(
            "a center point load requires an even element count so the load sits on a node"
        )


@dataclass(frozen=True)
class SolverSettings:
    """Tolerances and iteration caps for the branch solver and the LMI solver."""

    outer_tol: float = 1e-8
    outer_max_iter: int = 100
    sdp_tol: float = 1e-10
    sdp_max_iter: int = 200
    strictness_eps: float | None = None
    classify_tol: float | None = None
    polish: bool = True

    def __post_init__(self):
        if min(self.outer_tol, self.sdp_tol) <= 0:
            raise ModelError("tolerances must be positive")
        if min(self.outer_max_iter, self.sdp_max_iter) < 1:
            raise ModelError("iteration caps must be >= 1")
        for name in ("strictness_eps", "classify_tol"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ModelError(f"{name} must be positive")

    def strictness_for(self, g0_max):
        """Definiteness margin; defaults to 1e-8 * (1 + max |G0|)."""
        if self.strictness_eps is not None:
            return self.strictness_eps
        return 1e-8 * (1.0 + g0_max)

    def classify_for(self, g0_max):
        """Eigenvalue sign band; defaults to 1e-9 * (1 + max |G0|)."""
        if self.classify_tol is not None:
            return self.classify_tol
        return 1e-9 * (1.0 + g0_max)

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})
