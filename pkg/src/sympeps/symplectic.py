"""Symplectic linear algebra on R^(2n) in interleaved coordinates
(x_1, y_1, ..., x_n, y_n).

The module measures how far a linear map is from being symplectic (the
pullback defect), computes symplectic spectra of ellipsoids and the
orthonormal standard form of a two-form, extracts the lambda/mu conformality
invariants, runs quantitative non-squeezing / non-expanding / capacity
certificates on batches of ellipsoids, evaluates the cubic constants and the
explicit error bound K behind the rigidity estimates, constructs hyperplane
squeezing maps, and provides seeded random (eps-)symplectic generators for
property testing.

Conventions.  The reference complex structure J maps (x, y) |-> (-y, x) on
each coordinate plane, so the reference two-form is omega0(v, w) = <J v, w>.
A linear map Phi pulls omega0 back to the two-form with matrix Phi^T J Phi,
and its defect is the coefficient Euclidean norm of Phi^T J Phi - J, i.e.
sqrt(1/2) times the Frobenius norm.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .exterior import Covector, skew_to_covector

__all__ = [
    "SympContext",
    "TwoForm",
    "StandardForm",
    "LambdaMuReport",
    "SqueezeParams",
    "CertificateReport",
    "standard_J",
    "plane_scaling",
    "split_to_interleaved",
    "interleaved_to_split",
    "omega0_covector",
    "standard_antisymplectic",
    "asymmetric_defect_map",
    "defect",
    "symplectic_spectrum",
    "standard_form",
    "lambda_mu_invariants",
    "defect_decomposition_check",
    "rho",
    "squeezing_params",
    "check_eps_nonsqueezing",
    "check_eps_nonexpanding",
    "ellipsoid_capacity",
    "capacity_preservation_check",
    "cubic_z0",
    "squeeze_eps_threshold",
    "c_rho",
    "rigidity_bound",
    "hyperplane_squeeze",
    "random_symplectic",
    "random_eps_symplectic",
    "parse_matrix_text",
    "format_matrix_text",
    "matrix_to_json_dict",
    "matrix_from_json_dict",
    "load_matrix",
    "save_matrix",
]

SINGULAR_RTOL = 1e-12     # sigma_min below this times sigma_max counts as singular
KERNEL_RTOL = 1e-10       # ||M u|| below this times ||M|| counts as kernel
SKEW_RTOL = 1e-9
CERT_TOL = 1e-10          # additive tolerance on certified inequalities
SIGN_TOL = 1e-12
BALL_RADII = (0.5, 1.0, 2.0)

_EPS_SQRT2 = 1.0 / math.sqrt(2.0)


@lru_cache(maxsize=None)
def _standard_J(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n))
    for j in range(n):
        J[2 * j, 2 * j + 1] = -1.0
        J[2 * j + 1, 2 * j] = 1.0
    J.setflags(write=False)
    return J


def standard_J(n: int) -> np.ndarray:
    """Block-diagonal complex structure, each block mapping (x, y) to (-y, x)."""
    if n < 1:
        raise ValueError("half-dimension n must be >= 1")
    return _standard_J(n).copy()


@dataclass(frozen=True)
class SympContext:
    """Half-dimension and coordinate convention of the ambient R^(2n)."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("half-dimension n must be >= 1")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def J(self) -> np.ndarray:
        return standard_J(self.n)

    def omega_covector(self) -> Covector:
        return omega0_covector(self.n)


def _as_even_matrix(A, what: str = "matrix") -> Tuple[np.ndarray, int]:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{what} must be square, got shape {A.shape}")
    if A.shape[0] % 2:
        raise ValueError(f"{what} must have even dimension, got {A.shape[0]}")
    return A, A.shape[0] // 2


def _resolve_ctx(A, ctx: Optional[SympContext], what: str = "matrix") -> Tuple[np.ndarray, SympContext]:
    A, n = _as_even_matrix(A, what)
    if ctx is not None and ctx.n != n:
        raise ValueError(f"context has n={ctx.n} but {what} has n={n}")
    return A, (ctx or SympContext(n))


def omega0_covector(n: int) -> Covector:
    """The reference two-form sum_j dx_j ^ dy_j as a sparse covector."""
    return skew_to_covector(standard_J(n))


def plane_scaling(values: Sequence[float]) -> np.ndarray:
    """diag(r_1, r_1, ..., r_n, r_n): scaling by r_j on the j-th plane."""
    values = [float(v) for v in values]
    return np.diag(np.repeat(values, 2))


def _split_perm(n: int) -> np.ndarray:
    perm = np.empty(2 * n, dtype=int)
    perm[0::2] = np.arange(n)
    perm[1::2] = np.arange(n) + n
    return perm


def split_to_interleaved(M: np.ndarray) -> np.ndarray:
    """Conjugate a matrix from (x_1..x_n, y_1..y_n) to interleaved coordinates."""
    M, n = _as_even_matrix(M)
    perm = _split_perm(n)
    return M[np.ix_(perm, perm)]


def interleaved_to_split(M: np.ndarray) -> np.ndarray:
    M, n = _as_even_matrix(M)
    perm = np.argsort(_split_perm(n))
    return M[np.ix_(perm, perm)]


def standard_antisymplectic(n: int) -> np.ndarray:
    """Plane-wise swap (x, y) |-> (y, x); pulls omega0 back to -omega0."""
    R = np.zeros((2 * n, 2 * n))
    for j in range(n):
        R[2 * j, 2 * j + 1] = 1.0
        R[2 * j + 1, 2 * j] = 1.0
    return R


def asymmetric_defect_map(eps: float, K: float, n: int = 2) -> np.ndarray:
    """Linear map with defect |eps| whose inverse and transpose have defect |K*eps|.

    Acts on the first two coordinate planes as
    (x1, y1, x2, y2) |-> (x1, y1 + eps*x2, -x2/K, -K*y2) and as the identity
    elsewhere; the standard worked fixture for defect asymmetry.
    """
    if n < 2:
        raise ValueError("needs at least two coordinate planes")
    if K == 0:
        raise ValueError("K must be nonzero")
    Phi = np.eye(2 * n)
    Phi[1, 2] = eps
    Phi[2, 2] = -1.0 / K
    Phi[3, 3] = -float(K)
    return Phi


# ---------------------------------------------------------------------------
# Defect and two-form normal form
# ---------------------------------------------------------------------------


def defect(phi, ctx: Optional[SympContext] = None) -> float:
    """Coefficient Euclidean norm of Phi^T J Phi - J."""
    phi, ctx = _resolve_ctx(phi, ctx)
    J = ctx.J
    M = phi.T @ J @ phi - J
    return float(np.linalg.norm(M, "fro") / math.sqrt(2.0))


@dataclass(frozen=True)
class TwoForm:
    """Two-form on R^dim stored as a skew-symmetric matrix M, w(v, u) = <M v, u>."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        M = np.array(self.matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("two-form matrix must be square")
        scale = np.linalg.norm(M, "fro")
        if np.linalg.norm(M + M.T, "fro") > SKEW_RTOL * max(scale, 1e-300):
            raise ValueError("two-form matrix is not skew-symmetric")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def value(self, v, w) -> float:
        return float(np.asarray(w, float) @ (self.matrix @ np.asarray(v, float)))

    def covector(self) -> Covector:
        return skew_to_covector(self.matrix)

    @classmethod
    def from_covector(cls, c: Covector) -> "TwoForm":
        from .exterior import covector_to_skew

        return cls(covector_to_skew(c))


@dataclass(frozen=True)
class StandardForm:
    """Orthonormal plane decomposition of a two-form.

    Columns of ``u`` and ``v`` pair up into planes on which the form acts with
    spectral coefficient lambda_sq[j] = w(u_j, v_j) > 0 (ascending); ``kernel``
    spans the radical.  v_j is parallel to M u_j.
    """

    lambda_sq: np.ndarray   # (p,) ascending positive
    u: np.ndarray           # (dim, p)
    v: np.ndarray           # (dim, p)
    kernel: np.ndarray      # (dim, dim - 2p)

    @property
    def dim(self) -> int:
        return self.u.shape[0]

    @property
    def rank(self) -> int:
        return 2 * self.u.shape[1]

    @property
    def lambdas(self) -> np.ndarray:
        return np.sqrt(self.lambda_sq)

    def basis_matrix(self) -> np.ndarray:
        """Columns u_1..u_p, v_1..v_p, kernel vectors."""
        return np.hstack([self.u, self.v, self.kernel])

    def reconstruct(self) -> np.ndarray:
        """Skew matrix of sum_j lambda_j^2 alpha_j ^ beta_j."""
        W = np.zeros((self.dim, self.dim))
        for lam2, uj, vj in zip(self.lambda_sq, self.u.T, self.v.T):
            W += lam2 * (np.outer(vj, uj) - np.outer(uj, vj))
        return W


def standard_form(w) -> StandardForm:
    """Orthonormal basis and spectral coefficients of a skew two-form.

    Route: eigendecompose the symmetric PSD matrix -M^2; within each
    eigenvalue cluster repeatedly pick a unit u, set v = M u / ||M u||, and
    deflate the cluster off span(u, v).
    """
    form = w if isinstance(w, TwoForm) else TwoForm(np.asarray(w, dtype=float))
    M = form.matrix
    dim = form.dim
    S = -(M @ M)
    S = (S + S.T) / 2.0
    _, vecs = np.linalg.eigh(S)
    # ||M u|| measured directly is far more accurate near the kernel than the
    # square root of an eigenvalue of -M^2.
    alpha = np.linalg.norm(M @ vecs, axis=0)
    scale = float(alpha.max()) if dim else 0.0
    if scale == 0.0:
        return StandardForm(np.zeros(0), np.zeros((dim, 0)), np.zeros((dim, 0)), vecs)

    kernel_mask = alpha <= KERNEL_RTOL * scale
    kernel = vecs[:, kernel_mask]
    live = [int(i) for i in np.argsort(alpha, kind="stable") if not kernel_mask[i]]

    # Cluster consecutive eigenvalues.  The tolerance balances two error
    # sources: the eigensolver mixes eigenvectors of pairs closer than about
    # sqrt(machine eps) * scale, while deflation inside a merged cluster is
    # accurate to the cluster's spread; sqrt(eps) * scale keeps both at ~1e-8.
    cluster_tol = 1e-8 * scale
    clusters: List[List[int]] = []
    for i in live:
        if clusters and alpha[i] - alpha[clusters[-1][-1]] <= cluster_tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    merged: List[List[int]] = []
    for cl in clusters:
        if merged and len(merged[-1]) % 2:
            merged[-1].extend(cl)
        else:
            merged.append(cl)
    if merged and len(merged[-1]) % 2:
        raise np.linalg.LinAlgError("could not pair the nonzero spectrum of a skew matrix")

    us: List[np.ndarray] = []
    vs: List[np.ndarray] = []
    lam2: List[float] = []
    for cl in merged:
        Q = vecs[:, cl]
        while Q.shape[1] > 0:
            uj = Q[:, 0]
            Mu = M @ uj
            nz = float(np.linalg.norm(Mu))
            vj = Mu / nz
            us.append(uj)
            vs.append(vj)
            lam2.append(float(vj @ Mu))
            rest = Q.shape[1] - 2
            if rest <= 0:
                break
            Q = Q - np.outer(uj, uj @ Q) - np.outer(vj, vj @ Q)
            left, _, _ = np.linalg.svd(Q, full_matrices=False)
            Q = left[:, :rest]

    order = np.argsort(lam2, kind="stable")
    lam2_arr = np.asarray(lam2)[order]
    u_arr = np.column_stack([us[i] for i in order]) if us else np.zeros((dim, 0))
    v_arr = np.column_stack([vs[i] for i in order]) if vs else np.zeros((dim, 0))
    result = StandardForm(lam2_arr, u_arr, v_arr, kernel)

    rel = np.linalg.norm(result.reconstruct() - M, "fro") / max(np.linalg.norm(M, "fro"), 1e-300)
    if rel > 1e-6:
        raise np.linalg.LinAlgError(f"standard form reconstruction failed (relative error {rel:.3e})")
    return result


def _singular_values(A: np.ndarray) -> np.ndarray:
    return np.linalg.svd(A, compute_uv=False)


def _require_nonsingular(A: np.ndarray, what: str = "matrix") -> np.ndarray:
    svals = _singular_values(A)
    if svals[0] == 0.0 or svals[-1] <= SINGULAR_RTOL * svals[0]:
        cond = math.inf if svals[-1] == 0.0 else svals[0] / svals[-1]
        raise ValueError(f"singular {what} (condition number {cond:.3e})")
    return svals


def symplectic_spectrum(A, ctx: Optional[SympContext] = None) -> np.ndarray:
    """Ascending tuple (r_1, ..., r_n) with r_j^2 the absolute eigenvalue pairs
    of A^T J A; r_1 is the linear symplectic width of the ellipsoid A B_1."""
    A, ctx = _resolve_ctx(A, ctx)
    _require_nonsingular(A)
    M = A.T @ ctx.J @ A
    S = -(M @ M)
    S = (S + S.T) / 2.0
    evals = np.linalg.eigvalsh(S)
    alpha = np.sqrt(np.clip(evals, 0.0, None))
    paired = (alpha[0::2] + alpha[1::2]) / 2.0
    return np.sqrt(paired)


def ellipsoid_capacity(A, ctx: Optional[SympContext] = None) -> float:
    """pi times the squared linear symplectic width of the ellipsoid A B_1."""
    r1 = symplectic_spectrum(A, ctx)[0]
    return math.pi * float(r1) ** 2


@dataclass
class LambdaMuReport:
    """Conformality invariants of the pullback two-form of a linear map.

    lambda_j are the spectral values of Phi^* omega0 (equal to the symplectic
    spectrum of the image ellipsoid Phi B_1), mu_j = sqrt(|omega0(u_j, v_j)|)
    measure the failure of the decomposition planes to be complex lines, and
    sign_j records the orientation of each plane against omega0.
    """

    lambdas: np.ndarray
    mus: np.ndarray
    signs: np.ndarray
    classification: str   # symplectic-like | anti-symplectic-like | mixed | singular
    condition: float
    form: Optional[StandardForm] = None


def lambda_mu_invariants(phi, ctx: Optional[SympContext] = None) -> LambdaMuReport:
    phi, ctx = _resolve_ctx(phi, ctx)
    svals = _singular_values(phi)
    cond = math.inf if svals[-1] == 0.0 else float(svals[0] / svals[-1])
    empty = np.zeros(0)
    if svals[0] == 0.0 or svals[-1] <= SINGULAR_RTOL * svals[0]:
        return LambdaMuReport(empty, empty, empty.astype(int), "singular", cond, None)
    J = ctx.J
    sf = standard_form(phi.T @ J @ phi)
    if sf.rank < ctx.dim:
        return LambdaMuReport(empty, empty, empty.astype(int), "singular", cond, sf)
    om = np.einsum("ij,ij->j", J @ sf.u, sf.v)  # omega0(u_j, v_j)
    signs = np.where(np.abs(om) <= SIGN_TOL, 0, np.sign(om)).astype(int)
    if np.all(signs == 1):
        classification = "symplectic-like"
    elif np.all(signs == -1):
        classification = "anti-symplectic-like"
    else:
        classification = "mixed"
    return LambdaMuReport(sf.lambdas, np.sqrt(np.abs(om)), signs, classification, cond, sf)


class DecompositionCheck(NamedTuple):
    lhs: float
    rhs: float
    rel_error: float


def defect_decomposition_check(phi, ctx: Optional[SympContext] = None) -> DecompositionCheck:
    """Compare defect(Phi)^2 with its lambda/mu decomposition
    sum_j (lambda_j^2 - sign_j mu_j^2)^2 + n - sum_j mu_j^4."""
    phi, ctx = _resolve_ctx(phi, ctx)
    rep = lambda_mu_invariants(phi, ctx)
    if rep.classification == "singular":
        raise ValueError(f"singular matrix (condition number {rep.condition:.3e})")
    lhs = defect(phi, ctx) ** 2
    lam2 = rep.lambdas**2
    mu2 = rep.mus**2
    rhs = float(np.sum((lam2 - rep.signs * mu2) ** 2) + ctx.n - np.sum(mu2**2))
    rel = abs(lhs - rhs) / max(lhs, abs(rhs), 1e-12)
    return DecompositionCheck(lhs, rhs, rel)


# ---------------------------------------------------------------------------
# Quantitative non-squeezing certificates
# ---------------------------------------------------------------------------


def rho(eps: float, n: int, linear_case: bool = False) -> float:
    """Radius factor of the symplectifying correction of an eps-symplectic map:
    (1 - sqrt(2) eps)^sqrt(2n), or its square root power sqrt(1 - sqrt(2) eps)
    in the linear case."""
    if not 0.0 <= eps < _EPS_SQRT2:
        raise ValueError(f"eps must lie in [0, 1/sqrt(2)), got {eps}")
    base = 1.0 - math.sqrt(2.0) * eps
    if linear_case:
        return math.sqrt(base)
    if n < 1:
        raise ValueError("half-dimension n must be >= 1")
    return base ** math.sqrt(2 * n)


def _width_rho(eps: float, n: int, linear_case: bool) -> float:
    # Width-inequality parameterization: rho = (1 - eps)^(1/2) in the linear
    # case, (1 - eps)^sqrt(2n) otherwise.  An eps0-symplectic map satisfies
    # the width inequalities with eps = sqrt(2) * eps0.
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"width parameter eps must lie in [0, 1), got {eps}")
    if linear_case:
        return math.sqrt(1.0 - eps)
    return (1.0 - eps) ** math.sqrt(2 * n)


@dataclass(frozen=True)
class SqueezeParams:
    """Per-ellipsoid width-inequality constants.

    r_A is the enclosing-ball radius of the ellipsoid A B_1 (the top singular
    value of A); s_A <= 1 and e_A >= 1 (undefined when the correction can push
    boundary points across the center) bracket the admissible widths.
    """

    r_A: float
    inv_norm: float
    rho: float
    s_A: float
    e_A: Optional[float]


def squeezing_params(
    A,
    eps: float,
    ctx: Optional[SympContext] = None,
    linear_case: bool = True,
) -> SqueezeParams:
    A, ctx = _resolve_ctx(A, ctx, "ellipsoid matrix")
    svals = _require_nonsingular(A, "ellipsoid matrix")
    rho_val = _width_rho(eps, ctx.n, linear_case)
    r_A = float(svals[0])
    inv_norm = float(1.0 / svals[-1])
    q = inv_norm * (1.0 / rho_val - 1.0) * r_A
    s_A = 1.0 / (1.0 + q)
    e_A = 1.0 / (1.0 - q) if q < 1.0 else None
    return SqueezeParams(r_A, inv_norm, rho_val, s_A, e_A)


@dataclass
class CertificateReport:
    """Pass/fail record of a width or capacity inequality over ellipsoid batches."""

    kind: str
    eps: float
    rho: float
    records: List[dict] = field(default_factory=list)
    ball_checks: List[dict] = field(default_factory=list)
    passed: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "eps": self.eps,
            "rho": self.rho,
            "passed": bool(self.passed),
            "note": self.note,
            "records": self.records,
            "ball_checks": self.ball_checks,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _phi_or_singular_report(phi, ctx, eps, kind, linear_case):
    phi, ctx = _resolve_ctx(phi, ctx)
    svals = _singular_values(phi)
    if svals[0] == 0.0 or svals[-1] <= SINGULAR_RTOL * svals[0]:
        report = CertificateReport(
            kind,
            eps,
            _width_rho(eps, ctx.n, linear_case),
            passed=False,
            note="singular map: fails unconditionally (arbitrarily thin image ellipsoids)",
        )
        return phi, ctx, report
    return phi, ctx, None


def check_eps_nonsqueezing(
    phi,
    eps: float,
    ellipsoids: Sequence,
    ctx: Optional[SympContext] = None,
    linear_case: bool = True,
) -> CertificateReport:
    """Check s_A * r_1 <= R_1 for each ellipsoid A, where r_1 and R_1 are the
    linear symplectic widths of A B_1 and of its image under phi."""
    phi, ctx, short = _phi_or_singular_report(phi, ctx, eps, "nonsqueezing", linear_case)
    if short is not None:
        return short
    report = CertificateReport("nonsqueezing", eps, _width_rho(eps, ctx.n, linear_case))
    for i, A in enumerate(ellipsoids):
        A = np.asarray(A, dtype=float)
        params = squeezing_params(A, eps, ctx, linear_case)
        r1 = float(symplectic_spectrum(A, ctx)[0])
        R1 = float(symplectic_spectrum(phi @ A, ctx)[0])
        margin = R1 - params.s_A * r1
        ok = margin >= -CERT_TOL
        report.records.append(
            {
                "index": i,
                "A": A.tolist(),
                "r1": r1,
                "R1": R1,
                "s_A": params.s_A,
                "margin": margin,
                "pass": bool(ok),
            }
        )
        report.passed = report.passed and ok
    return report


def check_eps_nonexpanding(
    phi,
    eps: float,
    ellipsoids: Sequence,
    ctx: Optional[SympContext] = None,
    linear_case: bool = True,
    ball_radii: Sequence[float] = BALL_RADII,
) -> CertificateReport:
    """Check R_1 <= e_A * r_1 on eligible ellipsoids (those with e_A defined;
    the rest are skipped and reported) plus the ball clause: the width of
    phi(B_r) is at most r / rho."""
    phi, ctx, short = _phi_or_singular_report(phi, ctx, eps, "nonexpanding", linear_case)
    if short is not None:
        return short
    rho_val = _width_rho(eps, ctx.n, linear_case)
    report = CertificateReport("nonexpanding", eps, rho_val)
    for i, A in enumerate(ellipsoids):
        A = np.asarray(A, dtype=float)
        params = squeezing_params(A, eps, ctx, linear_case)
        r1 = float(symplectic_spectrum(A, ctx)[0])
        R1 = float(symplectic_spectrum(phi @ A, ctx)[0])
        record = {
            "index": i,
            "A": A.tolist(),
            "r1": r1,
            "R1": R1,
            "e_A": params.e_A,
        }
        if params.e_A is None:
            record.update({"skipped": True, "pass": True, "margin": None})
        else:
            margin = params.e_A * r1 - R1
            ok = margin >= -CERT_TOL
            record.update({"skipped": False, "pass": bool(ok), "margin": margin})
            report.passed = report.passed and ok
        report.records.append(record)
    eye = np.eye(ctx.dim)
    for r in ball_radii:
        width = float(symplectic_spectrum(phi @ (r * eye), ctx)[0])
        margin = r / rho_val - width
        ok = margin >= -CERT_TOL
        report.ball_checks.append(
            {"radius": r, "image_width": width, "bound": r / rho_val, "pass": bool(ok)}
        )
        report.passed = report.passed and ok
    return report


def capacity_preservation_check(
    phi,
    eps: float,
    ellipsoids: Sequence,
    ctx: Optional[SympContext] = None,
    linear_case: bool = True,
) -> CertificateReport:
    """Two-sided check s_A^2 c(E) <= c(phi E) <= e_A^2 c(E) on each ellipsoid,
    with capacity pi * width^2; the upper inequality applies when e_A is defined."""
    phi, ctx, short = _phi_or_singular_report(phi, ctx, eps, "capacity", linear_case)
    if short is not None:
        return short
    report = CertificateReport("capacity", eps, _width_rho(eps, ctx.n, linear_case))
    for i, A in enumerate(ellipsoids):
        A = np.asarray(A, dtype=float)
        params = squeezing_params(A, eps, ctx, linear_case)
        cap = ellipsoid_capacity(A, ctx)
        cap_img = ellipsoid_capacity(phi @ A, ctx)
        lower_margin = cap_img - params.s_A**2 * cap
        lower_ok = lower_margin >= -CERT_TOL
        record = {
            "index": i,
            "A": A.tolist(),
            "capacity": cap,
            "image_capacity": cap_img,
            "s_A": params.s_A,
            "e_A": params.e_A,
            "lower_margin": lower_margin,
            "lower_pass": bool(lower_ok),
        }
        ok = lower_ok
        if params.e_A is not None:
            upper_margin = params.e_A**2 * cap - cap_img
            upper_ok = upper_margin >= -CERT_TOL
            record.update({"upper_margin": upper_margin, "upper_pass": bool(upper_ok)})
            ok = ok and upper_ok
        else:
            record.update({"upper_margin": None, "upper_pass": None})
        record["pass"] = bool(ok)
        report.records.append(record)
        report.passed = report.passed and ok
    return report


# ---------------------------------------------------------------------------
# Rigidity constants
# ---------------------------------------------------------------------------


def cubic_z0() -> Tuple[float, float]:
    """Root of z^3 + (27/4) z = 27/4 in (0, 1): (bisection value, closed form).

    The closed form is (3/2) ((1 + sqrt(2))^(1/3) + (1 - sqrt(2))^(1/3)) with
    the real cube root of the negative term.
    """

    def f(z: float) -> float:
        return z * z * z + 6.75 * z - 6.75

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    s2 = math.sqrt(2.0)
    closed = 1.5 * ((1.0 + s2) ** (1.0 / 3.0) - (s2 - 1.0) ** (1.0 / 3.0))
    return root, closed


def squeeze_eps_threshold() -> float:
    """1 - z0^2: the width-parameter range on which the rigidity bound applies."""
    z0 = cubic_z0()[1]
    return 1.0 - z0 * z0


def c_rho(rho_val: float) -> float:
    """Unique root in (2/3, 1] of c^3 - c^2 + rho^(-3) (1 - rho) = 0.

    Monotone nondecreasing in rho; defined for rho large enough that
    a^(3/2) - rho a + 1 - rho is negative at its minimum a = 4 rho^2 / 9.
    """
    if not 0.0 < rho_val <= 1.0:
        raise ValueError(f"rho must lie in (0, 1], got {rho_val}")
    if rho_val == 1.0:
        return 1.0
    fmin = -(4.0 / 27.0) * rho_val**3 + 1.0 - rho_val
    if fmin >= 0.0:
        raise ValueError(f"rho={rho_val} outside the admissible regime (needs rho > z0 ~ 0.8941)")
    s = (1.0 - rho_val) / rho_val**3

    def g(c: float) -> float:
        return c * c * c - c * c + s

    lo, hi = 2.0 / 3.0, 1.0  # g(lo) = s - 4/27 < 0, g(hi) = s > 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def rigidity_bound(eps: float, n: int) -> float:
    """Explicit error bound K(eps): a map with the quantitative width
    inequalities at parameter eps is K(eps)-symplectic or -anti-symplectic.

    Composes the worst-case spectral bounds lambda_max = min(1/c_rho, rho^-2)
    and mu_min = min(sqrt(1 - 2 lambda_max^2 (1/rho - 1)), sqrt(2 rho - 1))
    into K = sqrt(n [max((lambda_max^2 - mu_min^2)^2, (1 - rho^2)^2)
    + (1 - mu_min^4)]); monotone with K(0) = 0.
    """
    if n < 1:
        raise ValueError("half-dimension n must be >= 1")
    threshold = squeeze_eps_threshold()
    if not 0.0 <= eps < threshold:
        raise ValueError(f"eps must lie in [0, {threshold:.6f}), got {eps}")
    rho_val = math.sqrt(1.0 - eps)
    lam = 1.0 / c_rho(rho_val)
    if eps < 1.0 - 0.5**0.25:
        lam = min(lam, rho_val**-2)
    gap = 1.0 / rho_val - 1.0
    mu_sq = min(1.0 - 2.0 * lam * lam * gap, 2.0 * rho_val - 1.0)
    mu = math.sqrt(min(1.0, max(0.0, mu_sq)))
    spread = max((lam * lam - mu * mu) ** 2, (1.0 - rho_val**2) ** 2)
    return math.sqrt(n * (spread + (1.0 - mu**4)))


# ---------------------------------------------------------------------------
# Hyperplane squeezing
# ---------------------------------------------------------------------------


def hyperplane_squeeze(u, bound: float, R: float, ctx: Optional[SympContext] = None) -> np.ndarray:
    """Symplectic map squeezing a bounded hyperplane slab into B_R^2 x R^(2n-2).

    ``u`` is the hyperplane normal and ``bound`` caps the scalar projection of
    slab points onto J u / ||J u||.  The map sends the symplectic basis built
    from u_1 = (R / bound) u/||u||, v_1 = (bound / R) J u/||u|| to the standard
    basis, so every x with <x, u> = 0 and |<x, J u>| <= bound ||u|| satisfies
    (Psi x)_1^2 + (Psi x)_2^2 <= R^2.
    """
    vec = np.asarray(u, dtype=float)
    if vec.ndim != 1 or vec.size % 2:
        raise ValueError("normal vector must live in an even-dimensional space")
    n = vec.size // 2
    if ctx is not None and ctx.n != n:
        raise ValueError(f"context has n={ctx.n} but vector has n={n}")
    nu = float(np.linalg.norm(vec))
    if nu == 0.0:
        raise ValueError("zero normal vector")
    if bound <= 0 or R <= 0:
        raise ValueError("bound and R must be positive")
    J = standard_J(n)
    uhat = vec / nu
    vhat = J @ uhat
    columns = [(R / bound) * uhat, (bound / R) * vhat]
    ortho = [uhat, vhat]
    if n > 1:
        _, _, vh = np.linalg.svd(np.vstack([uhat, vhat]))
        Q = vh[2:].T  # orthonormal complement of span(uhat, vhat)
        while Q.shape[1] > 0:
            wj = Q[:, 0]
            zj = J @ wj
            for b in ortho:
                zj = zj - (b @ zj) * b
            zj = zj / np.linalg.norm(zj)
            columns.extend([wj, zj])
            ortho.extend([wj, zj])
            rest = Q.shape[1] - 2
            if rest <= 0:
                break
            Q = Q - np.outer(wj, wj @ Q) - np.outer(zj, zj @ Q)
            left, _, _ = np.linalg.svd(Q, full_matrices=False)
            Q = left[:, :rest]
    B = np.column_stack(columns)
    psi = np.linalg.inv(B)
    dev = np.linalg.norm(psi.T @ J @ psi - J, "fro")
    if dev > 1e-9:
        raise np.linalg.LinAlgError(f"constructed map is not symplectic (deviation {dev:.3e})")
    return psi


# ---------------------------------------------------------------------------
# Random generators
# ---------------------------------------------------------------------------


def _embed_unitary(U: np.ndarray) -> np.ndarray:
    n = U.shape[0]
    A = np.zeros((2 * n, 2 * n))
    A[0::2, 0::2] = U.real
    A[0::2, 1::2] = -U.imag
    A[1::2, 0::2] = U.imag
    A[1::2, 1::2] = U.real
    return A


def _random_unitary_factor(n: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, Rm = np.linalg.qr(Z)
    phases = np.diagonal(Rm).copy()
    phases = phases / np.abs(phases)
    return _embed_unitary(Q * phases.conj()[None, :])


def _random_shear_factor(n: int, rng: np.random.Generator, scale: float = 0.3) -> np.ndarray:
    B = rng.standard_normal((n, n)) * scale
    B = (B + B.T) / 2.0
    S = np.eye(2 * n)
    if rng.integers(2):
        S[:n, n:] = B
    else:
        S[n:, :n] = B
    return split_to_interleaved(S)


def _random_plane_diagonal_factor(n: int, rng: np.random.Generator, scale: float = 0.25) -> np.ndarray:
    d = np.exp(rng.normal(0.0, scale, size=n))
    S = np.diag(np.concatenate([d, 1.0 / d]))
    return split_to_interleaved(S)


def random_symplectic(n: int, rng: np.random.Generator, factors: int = 4) -> np.ndarray:
    """Seeded random symplectic matrix: a product of unitary rotations,
    symplectic shears, and plane rescalings with moderate conditioning."""
    A = _random_unitary_factor(n, rng)
    for _ in range(factors):
        kind = rng.integers(3)
        if kind == 0:
            A = A @ _random_unitary_factor(n, rng)
        elif kind == 1:
            A = A @ _random_shear_factor(n, rng)
        else:
            A = A @ _random_plane_diagonal_factor(n, rng)
    return A @ _random_unitary_factor(n, rng)


def random_eps_symplectic(n: int, eps: float, seed: int) -> np.ndarray:
    """Seeded matrix Phi = S (I + t N) with S random symplectic and t tuned by
    bisection so that defect(Phi) equals eps to within 1e-9."""
    if not 0.0 <= eps < _EPS_SQRT2:
        raise ValueError(f"eps must lie in [0, 1/sqrt(2)), got {eps}")
    rng = np.random.default_rng(seed)
    S = random_symplectic(n, rng)
    if eps == 0.0:
        return S
    N = rng.standard_normal((2 * n, 2 * n))
    N = N / np.linalg.norm(N, 2)
    eye = np.eye(2 * n)

    def g(t: float) -> float:
        return defect(S @ (eye + t * N))

    hi = max(eps, 1e-3)
    for _ in range(80):
        if g(hi) >= eps:
            break
        hi *= 2.0
    else:
        raise RuntimeError("could not bracket the requested defect")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if g(mid) < eps:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    phi = S @ (eye + t * N)
    achieved = defect(phi)
    if abs(achieved - eps) > 1e-9:
        raise RuntimeError(f"defect tuning failed: requested {eps}, achieved {achieved}")
    return phi


# ---------------------------------------------------------------------------
# Matrix file formats
# ---------------------------------------------------------------------------


def parse_matrix_text(text: str) -> np.ndarray:
    """Parse the text format: a header line ``n <int>`` followed by 2n rows
    of 2n whitespace-separated floats."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty matrix file")
    head = lines[0].split()
    if len(head) != 2 or head[0].lower() != "n":
        raise ValueError(f"expected header 'n <int>', got {lines[0]!r}")
    try:
        n = int(head[1])
    except ValueError as exc:
        raise ValueError(f"invalid half-dimension in header: {head[1]!r}") from exc
    if n < 1:
        raise ValueError(f"half-dimension must be >= 1, got {n}")
    dim = 2 * n
    if len(lines) - 1 != dim:
        raise ValueError(f"expected {dim} matrix rows, found {len(lines) - 1}")
    rows = []
    for ln in lines[1:]:
        values = [float(tok) for tok in ln.split()]
        if len(values) != dim:
            raise ValueError(f"expected {dim} entries per row, got {len(values)}")
        rows.append(values)
    return np.array(rows)


def format_matrix_text(A) -> str:
    A, n = _as_even_matrix(A)
    lines = [f"n {n}"]
    for row in A:
        lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def matrix_to_json_dict(A) -> dict:
    A, n = _as_even_matrix(A)
    return {"n": n, "rows": A.tolist()}


def matrix_from_json_dict(data) -> np.ndarray:
    if not isinstance(data, dict) or "n" not in data or "rows" not in data:
        raise ValueError("matrix JSON must have keys 'n' and 'rows'")
    n = int(data["n"])
    A = np.array(data["rows"], dtype=float)
    if A.shape != (2 * n, 2 * n):
        raise ValueError(f"rows have shape {A.shape}, expected ({2*n}, {2*n})")
    return A


def load_matrix(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if str(path).endswith(".json") or stripped.startswith("{"):
        return matrix_from_json_dict(json.loads(text))
    return parse_matrix_text(text)


def save_matrix(path, A, fmt: Optional[str] = None) -> None:
    fmt = fmt or ("json" if str(path).endswith(".json") else "text")
    with open(path, "w", encoding="utf-8") as fh:
        if fmt == "json":
            json.dump(matrix_to_json_dict(A), fh, indent=2)
            fh.write("\n")
        else:
            fh.write(format_matrix_text(A))
