"""Moser-flow correction of nearly symplectic maps.

For a linear map phi with pullback defect eps < 1/sqrt(2), the interpolated
two-forms omega_t = omega0 + t (phi^* omega0 - omega0) stay non-degenerate,
and the time-dependent field X_t solving iota_{X_t} omega_t = -sigma (sigma
the exact radial primitive of the defect two-form) flows the identity to a
map psi with (phi o psi)^* omega0 = omega0.  For linear phi the field is
linear, so the whole correction is obtained from one matrix ODE; for
polynomial maps the primitive is computed exactly and trajectories are
integrated pointwise.  Integration uses the classical fixed-step fourth-order
one-step method throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import polyform as pfm
from .polyform import Poly, PolyForm, poly_diff, poly_var
from .symplectic import SympContext, _resolve_ctx, defect, standard_J

EPS_LIMIT = 1.0 / math.sqrt(2.0)
BOUND_TOL = 1e-6


@dataclass(frozen=True)
class FlowConfig:
    """Fixed-step integrator settings for the correction flow."""

    step_size: float = 1e-3
    method: str = "rk4-classical"
    max_defect_tol: float = 1e-6

    def __post_init__(self) -> None:
        if not 0.0 < self.step_size <= 1e-2:
            raise ValueError(f"step size must lie in (0, 1e-2], got {self.step_size}")
        if self.method != "rk4-classical":
            raise ValueError(f"unsupported method {self.method!r}")
        if self.max_defect_tol <= 0:
            raise ValueError("max_defect_tol must be positive")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(1.0 / self.step_size)))


def moser_field_matrix(phi, t: float, ctx: Optional[SympContext] = None) -> np.ndarray:
    """Matrix C(t) of the linear correction field X_t(x) = C(t) x.

    C(t) = -1/2 (J + t M)^-1 M with M = Phi^T J Phi - J; the inverse exists
    whenever the defect is below one.
    """
    phi, ctx = _resolve_ctx(phi, ctx)
    J = ctx.J
    M = phi.T @ J @ phi - J
    Mt = J + t * M
    try:
        return -0.5 * np.linalg.solve(Mt, M)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"interpolated two-form degenerates at t={t}") from exc


def _flow_field_grid(M: np.ndarray, J: np.ndarray, n_steps: int) -> np.ndarray:
    """C(t) on the grid t_0, t_0 + h/2, t_1, ... (2 n_steps + 1 values)."""
    ts = np.linspace(0.0, 1.0, 2 * n_steps + 1)
    stacked = J[None, :, :] + ts[:, None, None] * M[None, :, :]
    rhs = np.broadcast_to(M, stacked.shape).copy()
    try:
        return -0.5 * np.linalg.solve(stacked, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("interpolated two-form degenerates along the flow") from exc


def _integrate_matrix_flow(M: np.ndarray, J: np.ndarray, n_steps: int) -> np.ndarray:
    C = _flow_field_grid(M, J, n_steps)
    h = 1.0 / n_steps
    Y = np.eye(M.shape[0])
    for i in range(n_steps):
        c0, cm, c1 = C[2 * i], C[2 * i + 1], C[2 * i + 2]
        k1 = c0 @ Y
        k2 = cm @ (Y + (0.5 * h) * k1)
        k3 = cm @ (Y + (0.5 * h) * k2)
        k4 = c1 @ (Y + h * k3)
        Y = Y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return Y


@dataclass
class SymplectifyReport:
    """Correction map psi together with every verified bound.

    residual_defect is defect(phi @ psi); the displacement bound compares the
    operator norm of psi - I against 1/rho - 1, and the sandwich confines the
    singular values of psi to [rho, 1/rho], with rho = sqrt(1 - sqrt(2) eps).
    """

    psi: np.ndarray
    eps: float
    rho: float
    input_defect: float
    residual_defect: float
    residual_ok: bool
    displacement: float
    displacement_bound: float
    displacement_margin: float
    displacement_ok: bool
    column_displacements: List[float]
    sv_min: float
    sv_max: float
    sandwich_margin_lower: float
    sandwich_margin_upper: float
    sandwich_ok: bool
    steps: int
    config: FlowConfig

    @property
    def passed(self) -> bool:
        return bool(self.residual_ok and self.displacement_ok and self.sandwich_ok)

    def to_dict(self) -> dict:
        return {
            "psi": self.psi.tolist(),
            "eps": self.eps,
            "rho": self.rho,
            "input_defect": self.input_defect,
            "residual_defect": self.residual_defect,
            "residual_ok": bool(self.residual_ok),
            "displacement": self.displacement,
            "displacement_bound": self.displacement_bound,
            "displacement_margin": self.displacement_margin,
            "displacement_ok": bool(self.displacement_ok),
            "column_displacements": self.column_displacements,
            "sv_min": self.sv_min,
            "sv_max": self.sv_max,
            "sandwich_margin_lower": self.sandwich_margin_lower,
            "sandwich_margin_upper": self.sandwich_margin_upper,
            "sandwich_ok": bool(self.sandwich_ok),
            "steps": self.steps,
            "step_size": self.config.step_size,
            "method": self.config.method,
            "max_defect_tol": self.config.max_defect_tol,
            "passed": self.passed,
        }


def symplectify(
    phi,
    eps: float,
    config: Optional[FlowConfig] = None,
    ctx: Optional[SympContext] = None,
) -> SymplectifyReport:
    """Integrate the correction flow and verify its bounds.

    Requires defect(phi) <= eps < 1/sqrt(2).  Returns psi = Y(1) of the matrix
    ODE Y' = C(t) Y, Y(0) = I, with the residual defect of phi @ psi and the
    displacement / sandwich margins at tolerance 1e-6.
    """
    config = config or FlowConfig()
    phi, ctx = _resolve_ctx(phi, ctx)
    d0 = defect(phi, ctx)
    if not eps < EPS_LIMIT:
        raise ValueError(f"eps must be < 1/sqrt(2), got {eps}")
    if d0 > eps + 1e-12:
        raise ValueError(f"defect {d0:.6e} exceeds eps {eps:.6e}")
    J = ctx.J
    M = phi.T @ J @ phi - J
    psi = _integrate_matrix_flow(M, J, config.n_steps)
    rho_val = math.sqrt(1.0 - math.sqrt(2.0) * eps)
    residual = defect(phi @ psi, ctx)
    svals = np.linalg.svd(psi, compute_uv=False)
    eye = np.eye(ctx.dim)
    displacement = float(np.linalg.norm(psi - eye, 2))
    disp_bound = 1.0 / rho_val - 1.0
    disp_margin = disp_bound - displacement
    lower_margin = float(svals[-1]) - rho_val
    upper_margin = 1.0 / rho_val - float(svals[0])
    return SymplectifyReport(
        psi=psi,
        eps=float(eps),
        rho=rho_val,
        input_defect=d0,
        residual_defect=residual,
        residual_ok=residual <= config.max_defect_tol,
        displacement=displacement,
        displacement_bound=disp_bound,
        displacement_margin=disp_margin,
        displacement_ok=disp_margin >= -BOUND_TOL,
        column_displacements=[float(v) for v in np.linalg.norm(psi - eye, axis=0)],
        sv_min=float(svals[-1]),
        sv_max=float(svals[0]),
        sandwich_margin_lower=lower_margin,
        sandwich_margin_upper=upper_margin,
        sandwich_ok=(lower_margin >= -BOUND_TOL and upper_margin >= -BOUND_TOL),
        steps=config.n_steps,
        config=config,
    )


# ---------------------------------------------------------------------------
# Pointwise flow for polynomial maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolyMap:
    """Polynomial map R^m -> R^m, one exact polynomial per component."""

    m: int
    components: Tuple[Poly, ...]

    def __post_init__(self) -> None:
        if self.m < 2 or self.m % 2:
            raise ValueError("polynomial maps act on even-dimensional spaces here")
        comps = tuple(dict(c) for c in self.components)
        if len(comps) != self.m:
            raise ValueError(f"expected {self.m} components, got {len(comps)}")
        for c in comps:
            for e in c:
                if len(e) != self.m:
                    raise ValueError(f"exponent tuple {e} invalid for m={self.m}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def identity(cls, m: int) -> "PolyMap":
        return cls(m, tuple(poly_var(m, i) for i in range(1, m + 1)))

    @classmethod
    def from_matrix(cls, A) -> "PolyMap":
        """Linear map as a polynomial map; float entries convert exactly."""
        A = np.asarray(A, dtype=float)
        m = A.shape[0]
        comps = []
        for row in A:
            poly: Poly = {}
            for i, value in enumerate(row, start=1):
                if value != 0.0:
                    poly = pfm.poly_add(poly, pfm.poly_scale(poly_var(m, i), Fraction(float(value))))
            comps.append(poly)
        return cls(m, tuple(comps))

    @classmethod
    def plane_scaling(cls, factors: Sequence) -> "PolyMap":
        """Scaling by c_j on the j-th coordinate plane (exact rationals)."""
        m = 2 * len(factors)
        comps = []
        for j, c in enumerate(factors):
            comps.append(pfm.poly_scale(poly_var(m, 2 * j + 1), c))
            comps.append(pfm.poly_scale(poly_var(m, 2 * j + 2), c))
        return cls(m, tuple(comps))

    def component_differential(self, index: int) -> PolyForm:
        """d of the component function (1-based index) as a polynomial 1-form."""
        comp = self.components[index - 1]
        terms = {}
        for i in range(1, self.m + 1):
            dp = poly_diff(comp, i)
            if dp:
                terms[(i,)] = dp
        return PolyForm(self.m, 1, terms)

    def pullback_omega0(self) -> PolyForm:
        """Exact pullback of the reference two-form: sum_j dphi_{x_j} ^ dphi_{y_j}."""
        n = self.m // 2
        total = PolyForm.zero(self.m, 2)
        for j in range(n):
            a = self.component_differential(2 * j + 1)
            b = self.component_differential(2 * j + 2)
            total = total + pfm.pf_wedge(a, b)
        return total


def omega0_polyform(n: int) -> PolyForm:
    m = 2 * n
    terms = {(2 * j + 1, 2 * j + 2): pfm.poly_const(m, 1) for j in range(n)}
    return PolyForm(m, 2, terms)


class _CompiledForm:
    """Monomial table of a polynomial form for fast repeated evaluation."""

    def __init__(self, form: PolyForm):
        self.indices: List[Tuple[int, ...]] = []
        exps: List[Tuple[int, ...]] = []
        coeffs: List[float] = []
        seg: List[int] = []
        for pos, (idx, poly) in enumerate(sorted(form.terms.items())):
            self.indices.append(idx)
            for e, c in poly.items():
                exps.append(e)
                coeffs.append(float(c))
                seg.append(pos)
        self.n_indices = len(self.indices)
        self.exps = np.array(exps, dtype=float) if exps else np.zeros((0, form.m))
        self.coeffs = np.array(coeffs)
        self.seg = np.array(seg, dtype=int)

    def values(self, x: np.ndarray) -> np.ndarray:
        if self.n_indices == 0:
            return np.zeros(0)
        mono = self.coeffs * np.prod(x[None, :] ** self.exps, axis=1)
        return np.bincount(self.seg, weights=mono, minlength=self.n_indices)


class _CompiledTwoForm(_CompiledForm):
    def __init__(self, form: PolyForm, dim: int):
        super().__init__(form)
        self.dim = dim
        self.rows = np.array([idx[0] - 1 for idx in self.indices], dtype=int)
        self.cols = np.array([idx[1] - 1 for idx in self.indices], dtype=int)

    def matrix(self, x: np.ndarray) -> np.ndarray:
        vals = self.values(x)
        W = np.zeros((self.dim, self.dim))
        W[self.cols, self.rows] = vals
        W[self.rows, self.cols] = -vals
        return W

    def coeff_norm(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(self.values(x)))


class _CompiledOneForm(_CompiledForm):
    def __init__(self, form: PolyForm, dim: int):
        super().__init__(form)
        self.dim = dim
        self.slots = np.array([idx[0] - 1 for idx in self.indices], dtype=int)

    def vector(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.slots] = self.values(x)
        return out


@dataclass
class PointwiseFlowReport:
    """Trajectories of the pointwise correction flow with radius/displacement margins."""

    eps: float
    n: int
    points: List[List[float]]
    finals: List[List[float]]
    trajectories: List[np.ndarray]
    point_defects: List[float]
    radius_margins: List[float]
    radius_ok: List[bool]
    displacements: List[float]
    displacement_bounds: List[float]
    displacement_ok: List[bool]
    steps: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "n": self.n,
            "steps": self.steps,
            "passed": bool(self.passed),
            "points": self.points,
            "finals": self.finals,
            "point_defects": self.point_defects,
            "radius_margins": self.radius_margins,
            "radius_ok": [bool(v) for v in self.radius_ok],
            "displacements": self.displacements,
            "displacement_bounds": self.displacement_bounds,
            "displacement_ok": [bool(v) for v in self.displacement_ok],
        }


def symplectify_polynomial_pointwise(
    phi: PolyMap,
    points: Sequence[Sequence[float]],
    eps: float,
    config: Optional[FlowConfig] = None,
    ctx: Optional[SympContext] = None,
) -> PointwiseFlowReport:
    """Integrate the correction flow pointwise for a polynomial map.

    The defect two-form beta = phi^* omega0 - omega0 and its radial primitive
    sigma = h(beta) are computed exactly; at each Runge-Kutta stage the field
    solves the 2n x 2n system (J + t B(x)) X = -sigma(x).  Each trajectory is
    checked against the radius bounds
    ||x(0)|| (1 - sqrt(2) eps t)^sqrt(2n) <= ||x(t)|| <= ||x(0)|| (...)^-sqrt(2n)
    and the final displacement bound.
    """
    config = config or FlowConfig()
    if not 0.0 <= eps < EPS_LIMIT:
        raise ValueError(f"eps must lie in [0, 1/sqrt(2)), got {eps}")
    n = phi.m // 2
    if ctx is not None and ctx.n != n:
        raise ValueError(f"context has n={ctx.n} but map has n={n}")
    J = standard_J(n)
    beta = phi.pullback_omega0() - omega0_polyform(n)
    sigma = pfm.h(beta) if not beta.is_zero() else PolyForm.zero(phi.m, 1)
    beta_c = _CompiledTwoForm(beta, phi.m)
    sigma_c = _CompiledOneForm(sigma, phi.m)

    def vector_field(t: float, x: np.ndarray) -> np.ndarray:
        rhs = -sigma_c.vector(x)
        if not rhs.any():
            return rhs
        try:
            return np.linalg.solve(J + t * beta_c.matrix(x), rhs)
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"interpolated two-form degenerates at t={t}, x={x.tolist()}") from exc

    n_steps = config.n_steps
    hstep = 1.0 / n_steps
    root = math.sqrt(2 * n)
    shrink = 1.0 - math.sqrt(2.0) * eps

    report = PointwiseFlowReport(
        eps=float(eps),
        n=n,
        points=[],
        finals=[],
        trajectories=[],
        point_defects=[],
        radius_margins=[],
        radius_ok=[],
        displacements=[],
        displacement_bounds=[],
        displacement_ok=[],
        steps=n_steps,
        passed=True,
    )
    for point in points:
        x0 = np.asarray(point, dtype=float)
        if x0.shape != (phi.m,):
            raise ValueError(f"point dimension {x0.shape} does not match m={phi.m}")
        local_defect = beta_c.coeff_norm(x0)
        if local_defect > eps + 1e-9:
            raise ValueError(
                f"defect {local_defect:.6e} at point {x0.tolist()} exceeds eps {eps:.6e}"
            )
        traj = np.empty((n_steps + 1, phi.m))
        traj[0] = x0
        x = x0.copy()
        r0 = float(np.linalg.norm(x0))
        worst_margin = math.inf
        for i in range(n_steps):
            t = i * hstep
            k1 = vector_field(t, x)
            k2 = vector_field(t + 0.5 * hstep, x + 0.5 * hstep * k1)
            k3 = vector_field(t + 0.5 * hstep, x + 0.5 * hstep * k2)
            k4 = vector_field(t + hstep, x + hstep * k3)
            x = x + (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            traj[i + 1] = x
            tt = (i + 1) * hstep
            factor = (1.0 - math.sqrt(2.0) * eps * tt) ** root
            radius = float(np.linalg.norm(x))
            worst_margin = min(worst_margin, radius - r0 * factor, r0 / factor - radius)
        displacement = float(np.linalg.norm(x - x0))
        disp_bound = r0 * (shrink**-root - 1.0)
        radius_ok = worst_margin >= -BOUND_TOL
        disp_ok = displacement <= disp_bound + BOUND_TOL
        report.points.append([float(v) for v in x0])
        report.finals.append([float(v) for v in x])
        report.trajectories.append(traj)
        report.point_defects.append(local_defect)
        report.radius_margins.append(worst_margin if worst_margin < math.inf else 0.0)
        report.radius_ok.append(radius_ok)
        report.displacements.append(displacement)
        report.displacement_bounds.append(disp_bound)
        report.displacement_ok.append(disp_ok)
        report.passed = report.passed and radius_ok and disp_ok
    return report
