"""Dense LMI interior-point solver and the three branch SDP builders.

solve_lmi maximizes a linear objective subject to block-affine positive
semidefinite constraints by log-det barrier path following with damped
Newton centering; infeasible starts go through a feasibility phase with an
auxiliary identity shift variable.  Each affine term is stored with its
support index set so Newton assembly stays cheap for the banded gap-matrix
sensitivities.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels as K
from . import linalg
from .fem import AssembledSystem
from .model import SolverSettings


class BranchKind(Enum):
    GLOBAL_MIN = "global"
    LOCAL_MAX = "localmax"
    LOCAL_MIN = "localmin"


class LmiStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    ITERATION_LIMIT = "iteration_limit"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass
class LmiBlock:
    """A0 + sum_i x_i * embed(small_i) >= 0 with small_i supported on idx_i."""

    A0: np.ndarray
    terms: dict  # var index -> (support (k,), small (k, k))

    @property
    def n(self):
        return self.A0.shape[0]

    def value(self, x):
        F = self.A0.copy()
        for v, (idx, small) in self.terms.items():
            F[np.ix_(idx, idx)] += x[v] * small
        return F

    @staticmethod
    def dense(A0, mats):
        """Block from dense per-variable matrices {var: (n, n) array}."""
        n = A0.shape[0]
        idx = np.arange(n, dtype=np.int64)
        return LmiBlock(np.asarray(A0, float), {v: (idx, np.asarray(M, float)) for v, M in mats.items()})


@dataclass
class LmiProblem:
    p: int
    objective: np.ndarray
    sense: str  # "max" or "min"
    blocks: list

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")
        if len(self.objective) != self.p:
            raise ValueError("objective length does not match variable count")
        for blk in self.blocks:
            for v, (idx, small) in blk.terms.items():
                if not (0 <= v < self.p):
                    raise ValueError(f"term variable {v} out of range")
                if small.shape != (len(idx), len(idx)):
                    raise ValueError("support/core shape mismatch")
                if np.max(np.abs(small - small.T)) > 1e-12 * (1 + np.max(np.abs(small))):
                    raise ValueError("term core matrix is not symmetric")


@dataclass
class LmiSolution:
    status: LmiStatus
    x: np.ndarray
    objective_value: float
    min_block_eigs: list
    newton_steps: int
    mu_final: float = float("nan")


class _Flat:
    """Padded-array form of one block for the jitted barrier kernel."""

    def __init__(self, blk: LmiBlock, scale):
        self.A0 = np.ascontiguousarray(blk.A0 / scale)
        items = sorted(blk.terms.items())
        nt = len(items)
        kmax = max((len(idx) for _, (idx, _) in items), default=1)
        self.tvar = np.array([v for v, _ in items], dtype=np.int64)
        self.tk = np.array([len(idx) for _, (idx, _) in items], dtype=np.int64)
        self.tsupp = np.zeros((max(nt, 1), kmax), dtype=np.int64)
        self.tsmall = np.zeros((max(nt, 1), kmax, kmax))
        for i, (_, (idx, small)) in enumerate(items):
            k = len(idx)
            order = np.argsort(idx)
            self.tsupp[i, :k] = np.asarray(idx)[order]
            self.tsmall[i, :k, :k] = np.asarray(small)[np.ix_(order, order)]
        self.tsmall /= scale
        self.nt = nt
        self.n = blk.n

    def value(self, x):
        return K.affine_block_value(self.A0, self.tvar, self.tk, self.tsupp, self.tsmall, x)

    def psi(self, x):
        return K.affine_block_psi(self.A0, self.tvar, self.tk, self.tsupp, self.tsmall, x)


def _logdet_all(flats, x):
    total = 0.0
    for fl in flats:
        ok, ld = fl.psi(x)
        if not ok:
            return False, 0.0
        total += ld
    return True, total


def _center(flats, c, x, t, dec_target, step_budget):
    """Damped Newton for psi(x) = -t c.x - sum logdet F(x). Returns (x, steps, code).

    code: 0 centered, 1 budget exhausted, 2 stalled (tiny steps), 3 failure.
    """
    p = len(c)
    steps = 0
    while steps < step_budget:
        g = -t * c
        H = np.zeros((p, p))
        logdet = 0.0
        for fl in flats:
            F = fl.value(x)
            L, ok = K.chol_lower(F)
            if not ok:
                return x, steps, 3
            logdet += 2.0 * np.sum(np.log(np.diag(L)))
            gblk = np.zeros(p)
            K.barrier_terms(L, fl.tvar, fl.tk, fl.tsupp, fl.tsmall, gblk, H)
            g -= gblk
        Lh, ok = K.chol_lower(H)
        if not ok:
            Lh, ok = K.chol_lower(H + (1e-12 * np.trace(H) / p + 1e-300) * np.eye(p))
            if not ok:
                return x, steps, 3
        d = K.tri_lower_t_solve(Lh, K.tri_lower_solve(Lh, -g.reshape(-1, 1)))[:, 0]
        dec2 = float(-g @ d)
        if not np.isfinite(dec2):
            return x, steps, 3
        if dec2 <= dec_target**2:
            return x, steps, 0
        psi0 = -t * (c @ x) - logdet
        a = 1.0
        moved = False
        while a > 1e-16:
            xn = x + a * d
            okld, ld = _logdet_all(flats, xn)
            if okld and -t * (c @ xn) - ld <= psi0 - 0.25 * a * dec2:
                x = xn
                moved = True
                break
            a *= 0.5
        steps += 1
        if not moved:
            return x, steps, (0 if dec2 <= max(dec_target**2, 1e-8) else 2)
    return x, steps, 1


def solve_lmi(prob: LmiProblem, settings: SolverSettings, x0=None):
    """Maximize (or minimize) the objective over the LMI feasible set."""
    p = prob.p
    c = np.asarray(prob.objective, float)
    if prob.sense == "min":
        c = -c
    scales = [max(np.max(np.abs(b.A0)), max((np.max(np.abs(s)) for _, (_, s) in b.terms.items()), default=0.0), 1e-300) for b in prob.blocks]
    flats = [_Flat(b, s) for b, s in zip(prob.blocks, scales)]
    nu = sum(fl.n for fl in flats)
    x = np.zeros(p) if x0 is None else np.asarray(x0, float).copy()
    steps_used = 0
    stages = 0
    newton_per_stage = 60  # sdp_max_iter caps the path-following stages

    ok, _ = _logdet_all(flats, x)
    if not ok:
        # feasibility phase: append shift variable s, blocks F + s I >= 0, minimize s
        mineig = 0.0
        for fl in flats:
            w, _, _ = K.jacobi_eigh(fl.value(x), 1e-10, 100)
            mineig = min(mineig, w[0])
        s0 = -mineig + 1.0
        aug = []
        for fl in flats:
            blk = LmiBlock(fl.A0.copy(), {})
            for i in range(fl.nt):
                k = fl.tk[i]
                blk.terms[int(fl.tvar[i])] = (fl.tsupp[i, :k].copy(), fl.tsmall[i, :k, :k].copy())
            blk.terms[p] = (np.arange(fl.n, dtype=np.int64), np.eye(fl.n))
            aug.append(_Flat(blk, 1.0))
        c1 = np.zeros(p + 1)
        c1[p] = -1.0
        xs = np.concatenate([x, [s0]])
        t = 1.0 / max(1.0, s0)
        feasible = False
        while stages < settings.sdp_max_iter:
            stages += 1
            xs, st, code = _center(aug, c1, xs, t, 0.3, newton_per_stage)
            steps_used += st
            if code == 3:
                return LmiSolution(LmiStatus.NUMERICAL_FAILURE, x, float("nan"), [], steps_used)
            if xs[p] < -1e-8:
                feasible = True
                break
            if nu / t <= 1e-12 * (1.0 + abs(xs[p])):
                break
            t *= 5.0
        if not feasible:
            if stages >= settings.sdp_max_iter:
                return LmiSolution(LmiStatus.ITERATION_LIMIT, x, float("nan"), [], steps_used)
            return LmiSolution(LmiStatus.INFEASIBLE, x, float("nan"), [], steps_used)
        x = xs[:p]

    t = max(1.0, nu / max(1.0, abs(c @ x)))
    status = LmiStatus.OPTIMAL
    stalled_stages = 0
    while True:
        if stages >= settings.sdp_max_iter:
            status = LmiStatus.ITERATION_LIMIT
            break
        stages += 1
        gap_ok = nu / t <= settings.sdp_tol * (1.0 + abs(c @ x))
        # once the gap bound holds, a modestly centered point already carries
        # objective error ~ (nu/t)(1 + decrement); tighter targets only fight
        # float cancellation at huge t
        x, st, code = _center(flats, c, x, t, 1e-2 if gap_ok else 0.3, newton_per_stage)
        steps_used += st
        if code == 3:
            status = LmiStatus.NUMERICAL_FAILURE
            break
        if gap_ok:
            # the duality-gap bound already holds; imperfect final centering
            # only inflates the bound by a modest factor
            break
        if code in (1, 2):
            stalled_stages += 1
            if stalled_stages >= 3:
                status = LmiStatus.ITERATION_LIMIT
                break
        else:
            stalled_stages = 0
        if abs(c @ x) > 1e14:
            status = LmiStatus.NUMERICAL_FAILURE
            break
        t *= 5.0

    min_eigs = []
    for fl, s in zip(flats, scales):
        w, _, _ = K.jacobi_eigh(fl.value(x), 1e-12, 100)
        min_eigs.append(float(w[0]) * s)
    return LmiSolution(
        status, x, float(prob.objective @ x), min_eigs, steps_used, mu_final=nu / t
    )


def _gap_supports(sys: AssembledSystem):
    """Support index sets and core matrices of the reduced sensitivities Hsens[i]."""
    out = []
    for i in range(sys.mesh.m + 1):
        Hi = sys.Hsens[i]
        nz = np.where(np.any(Hi != 0.0, axis=0))[0].astype(np.int64)
        if len(nz) == 0:
            nz = np.array([0], dtype=np.int64)
        out.append((nz, np.ascontiguousarray(Hi[np.ix_(nz, nz)])))
    return out


def build_branch_sdp(branch: BranchKind, w_frozen, sys: AssembledSystem, settings: SolverSettings):
    """LmiProblem for one triality branch with the primal iterate frozen.

    Variables are x = (sigma_0..sigma_m, t).  The frozen deflection makes
    phi(sigma; w) = 1/2 w.G(sigma).w - lam.sigma - f.w - c affine in sigma, so
    each outer step is a true SDP.  Strict definiteness is realized as a
    margin of strictness_eps on the gap-matrix block.
    """
    w = np.asarray(w_frozen, float)
    mp1 = sys.mesh.m + 1
    p = mp1 + 1
    tvar = mp1
    eps = settings.strictness_for(sys.g0_max)
    supports = _gap_supports(sys)
    b = sys.strain_b(w)

    if branch is BranchKind.GLOBAL_MIN:
        blk1 = LmiBlock(sys.G0.copy(), {i: (idx, small) for i, (idx, small) in enumerate(supports)})
    else:
        blk1 = LmiBlock(
            -sys.G0 - eps * np.eye(sys.n_red),
            {i: (idx, -small) for i, (idx, small) in enumerate(supports)},
        )

    if branch in (BranchKind.GLOBAL_MIN, BranchKind.LOCAL_MAX):
        Kinv = linalg.solve_sym(sys.K, np.eye(mp1))
        Kinv = 0.5 * (Kinv + Kinv.T)
        n2 = mp1 + 1
        A0 = np.zeros((n2, n2))
        A0[:mp1, :mp1] = 2.0 * Kinv
        A0[mp1, mp1] = 0.5 * w @ sys.G0 @ w - sys.f_vec @ w - sys.c
        terms = {}
        for i in range(mp1):
            idx = np.array([i, mp1], dtype=np.int64)
            small = np.array([[0.0, 1.0], [1.0, b[i] - sys.lam_vec[i]]])
            terms[i] = (idx, small)
        terms[tvar] = (np.array([mp1], dtype=np.int64), np.array([[-1.0]]))
        blk2 = LmiBlock(A0, terms)
        sense = "max"
    else:
        n2 = sys.n_red + 1
        A0 = np.zeros((n2, n2))
        A0[: sys.n_red, : sys.n_red] = -2.0 * sys.G0
        A0[: sys.n_red, sys.n_red] = sys.f_vec
        A0[sys.n_red, : sys.n_red] = sys.f_vec
        A0[sys.n_red, sys.n_red] = sys.c
        terms = {}
        for i, (idx, small) in enumerate(supports):
            k = len(idx)
            idx2 = np.concatenate([idx, [sys.n_red]]).astype(np.int64)
            sm = np.zeros((k + 1, k + 1))
            sm[:k, :k] = -2.0 * small
            sm[k, k] = 0.5 * (b[i] + sys.lam_vec[i])
            terms[i] = (idx2, sm)
        terms[tvar] = (np.array([sys.n_red], dtype=np.int64), np.array([[1.0]]))
        blk2 = LmiBlock(A0, terms)
        sense = "min"

    obj = np.zeros(p)
    obj[tvar] = 1.0
    return LmiProblem(p=p, objective=obj, sense=sense, blocks=[blk1, blk2])


def global_branch_start(sys: AssembledSystem, w_frozen):
    """Strictly feasible start for the global-branch SDP: sigma = 0, t below phi(0)."""
    w = np.asarray(w_frozen, float)
    phi0 = 0.5 * w @ sys.G0 @ w - sys.f_vec @ w - sys.c
    x0 = np.zeros(sys.mesh.m + 2)
    x0[-1] = phi0 - 1.0
    return x0


def write_sdpa(prob: LmiProblem, path):
    """Dump in SDPA sparse format (maximize c.x s.t. sum x_i F_i - F0 >= 0)."""
    c = prob.objective if prob.sense == "max" else -prob.objective
    lines = []
    lines.append(f"{prob.p}")
    lines.append(f"{len(prob.blocks)}")
    lines.append(" ".join(str(b.n) for b in prob.blocks))
    lines.append(" ".join(f"{float(v):.17g}" for v in c))

    def emit(mat_no, blk_no, M, sign=1.0):
        n = M.shape[0]
        for i in range(n):
            for j in range(i, n):
                v = sign * M[i, j]
                if v != 0.0:
                    lines.append(f"{mat_no} {blk_no} {i + 1} {j + 1} {v:.17g}")

    for j, blk in enumerate(prob.blocks, start=1):
        emit(0, j, blk.A0, sign=-1.0)  # F0 = -A0
    for j, blk in enumerate(prob.blocks, start=1):
        for v, (idx, small) in sorted(blk.terms.items()):
            full = np.zeros((blk.n, blk.n))
            full[np.ix_(idx, idx)] = small
            emit(v + 1, j, full)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
