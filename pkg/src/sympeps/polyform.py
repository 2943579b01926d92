"""Differential forms with exact rational polynomial coefficients on R^m.

Provides the exterior derivative and the explicit radial homotopy operator
h = iota_X o alpha (equivalently alpha o iota_X) that inverts d on star-shaped
domains: h(d f) + d(h f) = f identically.  Here X is the radial vector field
sum_i x_i d/dx_i and alpha rescales each coefficient monomial of total degree
p on a degree-k form by 1/(k + p).

Polynomials are sparse dicts mapping exponent tuples (one entry per variable)
to Fraction coefficients; zero terms are never stored, so dict equality is
exact polynomial identity.  Floats enter only at the evaluation boundary and
in the norm-bound checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .exterior import Covector, check_multi_index, norm2

Exponent = Tuple[int, ...]
Poly = Dict[Exponent, Fraction]
MultiIndex = Tuple[int, ...]


# -- sparse polynomial helpers ----------------------------------------------


def poly_zero() -> Poly:
    return {}


def poly_const(m: int, value) -> Poly:
    coeff = Fraction(value)
    if coeff == 0:
        return {}
    return {(0,) * m: coeff}


def poly_var(m: int, i: int) -> Poly:
    """The variable x_i (1-based)."""
    if not 1 <= i <= m:
        raise ValueError(f"variable index {i} out of range 1..{m}")
    exp = [0] * m
    exp[i - 1] = 1
    return {tuple(exp): Fraction(1)}


def _canonical(p: Poly) -> Poly:
    return {e: c for e, c in p.items() if c != 0}


def poly_add(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, Fraction(0)) + c
    return _canonical(out)


def poly_neg(a: Poly) -> Poly:
    return {e: -c for e, c in a.items()}


def poly_scale(a: Poly, s) -> Poly:
    s = Fraction(s)
    if s == 0:
        return {}
    return {e: c * s for e, c in a.items()}


def poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, Fraction(0)) + ca * cb
    return _canonical(out)


def poly_mul_var(a: Poly, i: int) -> Poly:
    """Multiply by the variable x_i (1-based)."""
    out: Poly = {}
    for e, c in a.items():
        lifted = list(e)
        lifted[i - 1] += 1
        out[tuple(lifted)] = c
    return out


def poly_diff(a: Poly, i: int) -> Poly:
    """Partial derivative with respect to x_i (1-based)."""
    out: Poly = {}
    for e, c in a.items():
        power = e[i - 1]
        if power == 0:
            continue
        lowered = list(e)
        lowered[i - 1] -= 1
        key = tuple(lowered)
        out[key] = out.get(key, Fraction(0)) + c * power
    return _canonical(out)


def poly_total_degree(a: Poly) -> int:
    """Max total degree, or -1 for the zero polynomial."""
    if not a:
        return -1
    return max(sum(e) for e in a)


def poly_dilate(a: Poly, r) -> Poly:
    """Substitute x |-> r x exactly: each monomial of degree p scales by r^p."""
    r = Fraction(r)
    return _canonical({e: c * r ** sum(e) for e, c in a.items()})


def poly_eval(a: Poly, x: Sequence[float]) -> float:
    xv = np.asarray(x, dtype=float)
    total = 0.0
    for e, c in a.items():
        term = float(c)
        for xi, p in zip(xv, e):
            if p:
                term *= xi**p
        total += term
    return total


def poly_eval_many(a: Poly, X: np.ndarray) -> np.ndarray:
    """Evaluate at a stack of points, shape (T, m)."""
    X = np.asarray(X, dtype=float)
    total = np.zeros(X.shape[0])
    for e, c in a.items():
        term = np.full(X.shape[0], float(c))
        for i, p in enumerate(e):
            if p:
                term = term * X[:, i] ** p
        total += term
    return total


# -- polynomial differential forms ------------------------------------------


@dataclass(frozen=True)
class PolyForm:
    """Degree-k form sum_sigma f_sigma dx_sigma with polynomial coefficients."""

    m: int
    k: int
    terms: Mapping[MultiIndex, Poly] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.m < 1 or not 0 <= self.k <= self.m:
            raise ValueError(f"invalid degree k={self.k} for ambient dimension m={self.m}")
        clean: Dict[MultiIndex, Poly] = {}
        for index, poly in self.terms.items():
            idx = check_multi_index(index, self.m, self.k)
            for e in poly:
                if len(e) != self.m or any(p < 0 for p in e):
                    raise ValueError(f"exponent tuple {e} invalid for m={self.m}")
            canon = _canonical({e: Fraction(c) for e, c in poly.items()})
            if canon:
                clean[idx] = canon
        object.__setattr__(self, "terms", clean)

    @classmethod
    def zero(cls, m: int, k: int) -> "PolyForm":
        return cls(m, k, {})

    @classmethod
    def term(cls, m: int, index: Sequence[int], poly: Poly) -> "PolyForm":
        idx = tuple(int(i) for i in index)
        return cls(m, len(idx), {idx: poly})

    @classmethod
    def basis(cls, m: int, index: Sequence[int]) -> "PolyForm":
        """dx_{i_1} ^ ... ^ dx_{i_k} with constant coefficient 1."""
        idx = tuple(int(i) for i in index)
        return cls(m, len(idx), {idx: poly_const(m, 1)})

    @classmethod
    def function(cls, m: int, poly: Poly) -> "PolyForm":
        return cls(m, 0, {(): poly})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "PolyForm") -> "PolyForm":
        if not isinstance(other, PolyForm):
            return NotImplemented
        if (self.m, self.k) != (other.m, other.k):
            raise ValueError("form degree/dimension mismatch in addition")
        out = {idx: dict(p) for idx, p in self.terms.items()}
        for idx, p in other.terms.items():
            out[idx] = poly_add(out.get(idx, {}), p)
        return PolyForm(self.m, self.k, out)

    def __neg__(self) -> "PolyForm":
        return PolyForm(self.m, self.k, {idx: poly_neg(p) for idx, p in self.terms.items()})

    def __sub__(self, other: "PolyForm") -> "PolyForm":
        return self + (-other)

    def scale(self, s) -> "PolyForm":
        return PolyForm(self.m, self.k, {idx: poly_scale(p, s) for idx, p in self.terms.items()})

    def coefficient_degree(self) -> int:
        if not self.terms:
            return -1
        return max(poly_total_degree(p) for p in self.terms.values())

    def has_constant_coefficients(self) -> bool:
        return all(poly_total_degree(p) <= 0 for p in self.terms.values())

    def to_json_dict(self) -> dict:
        terms = []
        for idx in sorted(self.terms):
            poly = self.terms[idx]
            entries = [
                {"exp": list(e), "num": str(c.numerator), "den": str(c.denominator)}
                for e, c in sorted(poly.items())
            ]
            terms.append({"index": list(idx), "poly": entries})
        return {"m": self.m, "k": self.k, "terms": terms}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "PolyForm":
        m = int(data["m"])
        k = int(data["k"])
        terms: Dict[MultiIndex, Poly] = {}
        for term in data.get("terms", []):
            idx = check_multi_index(term["index"], m, k)
            poly: Poly = {}
            for entry in term["poly"]:
                e = tuple(int(p) for p in entry["exp"])
                coeff = Fraction(int(entry["num"]), int(entry["den"]))
                poly[e] = poly.get(e, Fraction(0)) + coeff
            terms[idx] = poly_add(terms.get(idx, {}), poly)
        return cls(m, k, terms)


def pf_wedge(a: PolyForm, b: PolyForm) -> PolyForm:
    if a.m != b.m:
        raise ValueError(f"ambient dimension mismatch: {a.m} vs {b.m}")
    k = a.k + b.k
    if k > a.m:
        raise ValueError(f"degree overflow: {a.k} + {b.k} > {a.m}")
    out: Dict[MultiIndex, Poly] = {}
    for ia, pa in a.terms.items():
        seen = set(ia)
        for ib, pb in b.terms.items():
            if seen.intersection(ib):
                continue
            inversions = sum(1 for x in ia for y in ib if x > y)
            merged = tuple(sorted(ia + ib))
            prod = poly_mul(pa, pb)
            if inversions % 2:
                prod = poly_neg(prod)
            out[merged] = poly_add(out.get(merged, {}), prod)
    return PolyForm(a.m, k, out)


# -- exterior derivative and the radial homotopy operator --------------------


def d(f: PolyForm) -> PolyForm:
    """Exterior derivative with exact coefficients; d(d(f)) = 0."""
    if f.k >= f.m:
        raise ValueError(f"exterior derivative of a top-degree form (k={f.k}, m={f.m})")
    out: Dict[MultiIndex, Poly] = {}
    for index, poly in f.terms.items():
        members = set(index)
        for i in range(1, f.m + 1):
            if i in members:
                continue
            dp = poly_diff(poly, i)
            if not dp:
                continue
            position = sum(1 for j in index if j < i)
            if position % 2:
                dp = poly_neg(dp)
            merged = tuple(sorted(index + (i,)))
            out[merged] = poly_add(out.get(merged, {}), dp)
    return PolyForm(f.m, f.k + 1, out)


def alpha(f: PolyForm) -> PolyForm:
    """Radial averaging: each monomial of total degree p scales by 1/(k + p)."""
    out: Dict[MultiIndex, Poly] = {}
    for index, poly in f.terms.items():
        scaled: Poly = {}
        for e, c in poly.items():
            weight = f.k + sum(e)
            if weight == 0:
                raise ValueError("radial averaging diverges on constants of degree-0 forms")
            scaled[e] = c / weight
        out[index] = scaled
    return PolyForm(f.m, f.k, out)


def iota_radial(f: PolyForm) -> PolyForm:
    """Contraction with the radial field sum_i x_i d/dx_i."""
    if f.k < 1:
        raise ValueError("radial contraction needs degree k >= 1")
    out: Dict[MultiIndex, Poly] = {}
    for index, poly in f.terms.items():
        for j, i in enumerate(index):
            reduced = index[:j] + index[j + 1:]
            lifted = poly_mul_var(poly, i)
            if j % 2:
                lifted = poly_neg(lifted)
            out[reduced] = poly_add(out.get(reduced, {}), lifted)
    return PolyForm(f.m, f.k - 1, out)


def h(f: PolyForm) -> PolyForm:
    """Radial homotopy operator; h(d f) + d(h f) = f for 1 <= k < m.

    Computed as iota_X o alpha; the factorization alpha o iota_X agrees
    exactly (asserted by the test suite).
    """
    if f.k < 1:
        raise ValueError("homotopy operator needs degree k >= 1")
    return iota_radial(alpha(f))


def homotopy_identity_check(f: PolyForm) -> bool:
    """Exact check of h(d f) + d(h f) == f (rational arithmetic, no tolerance)."""
    if not 1 <= f.k < f.m:
        raise ValueError(f"identity check needs 1 <= k < m, got k={f.k}, m={f.m}")
    return (h(d(f)) + d(h(f))) == f


def dilate(f: PolyForm, r) -> PolyForm:
    """Exact pullback by the dilation x |-> r x: coefficients pick up r^(k+p)."""
    r = Fraction(r)
    out = {
        idx: _canonical({e: c * r ** (f.k + sum(e)) for e, c in poly.items()})
        for idx, poly in f.terms.items()
    }
    return PolyForm(f.m, f.k, out)


def evaluate(f: PolyForm, x: Sequence[float]) -> Covector:
    """Floating-point covector of coefficient values at the point x."""
    xv = np.asarray(x, dtype=float)
    if xv.shape != (f.m,):
        raise ValueError(f"point dimension {xv.shape} does not match m={f.m}")
    return Covector(f.m, f.k, {idx: poly_eval(p, xv) for idx, p in f.terms.items()})


def _norm_at_scaled_points(f: PolyForm, x: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """||f(t x)||_2 for each t in ts (vectorized over the ray)."""
    X = ts[:, None] * x[None, :]
    total = np.zeros(ts.shape[0])
    for poly in f.terms.values():
        vals = poly_eval_many(poly, X)
        total += vals * vals
    return np.sqrt(total)


@dataclass
class HBoundReport:
    """Per-point margins of the homotopy-operator norm bounds.

    The general bound compares ||h f (x)|| against
    ||x|| sqrt(k C(m, k-1)) / (k-1) * max_t ||f(t x)|| for k > 1 (and
    ||x|| sqrt(m) * max_t for k = 1); the ray bound ||x|| / sqrt(k) * ||f(x)||
    applies when all coefficients are constant.  The max over the ray is
    estimated by dense sampling, which can only under-estimate the right-hand
    side, so a nonnegative margin is conservative.
    """

    m: int
    k: int
    s: float
    t_samples: int
    rhs_sampled: bool
    ray_constant: bool
    points: List[List[float]] = field(default_factory=list)
    lhs: List[float] = field(default_factory=list)
    rhs: List[float] = field(default_factory=list)
    margins: List[float] = field(default_factory=list)
    ray_rhs: Optional[List[float]] = None
    ray_margins: Optional[List[float]] = None
    passed: bool = True

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "k": self.k,
            "s": self.s,
            "t_samples": self.t_samples,
            "rhs_sampled": self.rhs_sampled,
            "ray_constant": self.ray_constant,
            "passed": bool(self.passed),
            "points": self.points,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margins": self.margins,
            "ray_rhs": self.ray_rhs,
            "ray_margins": self.ray_margins,
        }


def h_bound_check(
    f: PolyForm,
    points: Sequence[Sequence[float]],
    s: float,
    t_samples: int = 1000,
    tol: float = 1e-9,
) -> HBoundReport:
    """Evaluate both sides of the homotopy-operator norm bounds at each point."""
    if f.k < 1:
        raise ValueError("norm bounds apply to degrees k >= 1")
    hf = h(f)
    ray_case = f.has_constant_coefficients()
    report = HBoundReport(
        m=f.m,
        k=f.k,
        s=float(s),
        t_samples=t_samples,
        rhs_sampled=not ray_case,
        ray_constant=ray_case,
        ray_rhs=[] if ray_case else None,
        ray_margins=[] if ray_case else None,
    )
    ts = np.linspace(0.0, 1.0, t_samples)
    if f.k > 1:
        factor = math.sqrt(f.k * math.comb(f.m, f.k - 1)) / (f.k - 1)
    else:
        factor = math.sqrt(f.m)
    for point in points:
        x = np.asarray(point, dtype=float)
        if x.shape != (f.m,):
            raise ValueError(f"point dimension {x.shape} does not match m={f.m}")
        r = float(np.linalg.norm(x))
        if r > s + 1e-12:
            raise ValueError(f"point with norm {r} outside the star-shaped domain of radius {s}")
        lhs = norm2(evaluate(hf, x))
        if ray_case:
            max_beta = norm2(evaluate(f, x))
        else:
            max_beta = float(np.max(_norm_at_scaled_points(f, x, ts)))
        rhs = r * factor * max_beta
        report.points.append([float(v) for v in x])
        report.lhs.append(lhs)
        report.rhs.append(rhs)
        report.margins.append(rhs - lhs)
        if ray_case:
            ray_rhs = r / math.sqrt(f.k) * norm2(evaluate(f, x))
            report.ray_rhs.append(ray_rhs)
            report.ray_margins.append(ray_rhs - lhs)
    worst = min(report.margins, default=0.0)
    if ray_case and report.ray_margins:
        worst = min(worst, min(report.ray_margins))
    report.passed = worst >= -tol
    return report
