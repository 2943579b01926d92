"""Coefficient-level exterior algebra on R^m.

A k-covector is stored sparsely as a map from strictly increasing 1-based
multi-indices (i_1 < ... < i_k) to real coefficients.  Two norms are
provided:

* ``norm2`` -- the Euclidean norm of the coefficient vector, which is
  invariant under orthonormal changes of frame;
* ``comass`` -- the supremum of the covector over unit simple k-vectors.
  It is computed exactly for degrees k in {0, 1, 2, m-1, m} (for k = 2 as
  the top spectral coefficient of the plane decomposition of the associated
  skew matrix) and bracketed otherwise by a randomized lower bound together
  with the ``norm2`` upper bound.

Interior multiplication, the wedge product, pullback by a square matrix
(via k x k minors), and the constant-metric rescaling factors for norms
round out the toolkit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, NamedTuple, Sequence, Tuple

import numpy as np

MultiIndex = Tuple[int, ...]

# Gram-matrix tolerance below which an input basis counts as orthonormal;
# callers typically hand over eigenvector matrices from floating-point solvers.
ORTHONORMAL_TOL = 1e-9

DEFAULT_COMASS_TRIALS = 10_000

_EVAL_BATCH = 2048


def check_multi_index(index: Sequence[int], m: int, k: int | None = None) -> MultiIndex:
    """Validate and canonicalize a strictly increasing 1-based index tuple."""
    idx = tuple(int(i) for i in index)
    if k is not None and len(idx) != k:
        raise ValueError(f"index {idx} does not have degree {k}")
    if any(not 1 <= i <= m for i in idx):
        raise ValueError(f"index {idx} out of range 1..{m}")
    if any(a >= b for a, b in zip(idx, idx[1:])):
        raise ValueError(f"index {idx} is not strictly increasing")
    return idx


@dataclass(frozen=True)
class Covector:
    """Sparse k-covector sum_sigma f_sigma dx_sigma on R^m.

    ``coeffs`` maps strictly increasing 1-based multi-indices of length k to
    nonzero coefficients; exact zeros are dropped on construction.
    """

    m: int
    k: int
    coeffs: Mapping[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.m < 0 or not 0 <= self.k <= self.m:
            raise ValueError(f"invalid degree k={self.k} for ambient dimension m={self.m}")
        clean: Dict[MultiIndex, float] = {}
        for index, coeff in self.coeffs.items():
            idx = check_multi_index(index, self.m, self.k)
            value = float(coeff)
            if value != 0.0:
                clean[idx] = value
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def zero(cls, m: int, k: int) -> "Covector":
        return cls(m, k, {})

    @classmethod
    def basis(cls, m: int, index: Sequence[int]) -> "Covector":
        """dx_{i_1} ^ ... ^ dx_{i_k} for a strictly increasing index."""
        idx = tuple(int(i) for i in index)
        return cls(m, len(idx), {idx: 1.0})

    def __add__(self, other: "Covector") -> "Covector":
        if not isinstance(other, Covector):
            return NotImplemented
        if (self.m, self.k) != (other.m, other.k):
            raise ValueError("covector degree/dimension mismatch in addition")
        out = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            out[idx] = out.get(idx, 0.0) + c
        return Covector(self.m, self.k, out)

    def __neg__(self) -> "Covector":
        return Covector(self.m, self.k, {i: -c for i, c in self.coeffs.items()})

    def __sub__(self, other: "Covector") -> "Covector":
        return self + (-other)

    def __mul__(self, scalar: float) -> "Covector":
        s = float(scalar)
        return Covector(self.m, self.k, {i: s * c for i, c in self.coeffs.items()})

    __rmul__ = __mul__

    def evaluate(self, vectors: Sequence[Sequence[float]]) -> float:
        """Value on k vectors (given as rows)."""
        frame = np.asarray(vectors, dtype=float).reshape(self.k, self.m).T
        return float(_evaluate_frames(self, frame[None, :, :])[0])

    def to_json_dict(self) -> dict:
        terms = [
            {"index": list(idx), "coeff": coeff}
            for idx, coeff in sorted(self.coeffs.items())
        ]
        return {"m": self.m, "k": self.k, "terms": terms}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Covector":
        m = int(data["m"])
        k = int(data["k"])
        coeffs: Dict[MultiIndex, float] = {}
        for term in data.get("terms", []):
            idx = check_multi_index(term["index"], m, k)
            coeffs[idx] = coeffs.get(idx, 0.0) + float(term["coeff"])
        return cls(m, k, coeffs)


def _evaluate_frames(c: Covector, frames: np.ndarray) -> np.ndarray:
    """Values of ``c`` on a stack of frames of shape (T, m, k), columns = vectors."""
    n_frames = frames.shape[0]
    if c.k == 0:
        return np.full(n_frames, c.coeffs.get((), 0.0))
    total = np.zeros(n_frames)
    for index, coeff in c.coeffs.items():
        rows = [i - 1 for i in index]
        total += coeff * np.linalg.det(frames[:, rows, :])
    return total


def wedge(a: Covector, b: Covector) -> Covector:
    """Graded-anticommutative product; the sign comes from the merge permutation."""
    if a.m != b.m:
        raise ValueError(f"ambient dimension mismatch: {a.m} vs {b.m}")
    k = a.k + b.k
    if k > a.m:
        raise ValueError(f"degree overflow: {a.k} + {b.k} > {a.m}")
    out: Dict[MultiIndex, float] = {}
    for ia, ca in a.coeffs.items():
        seen = set(ia)
        for ib, cb in b.coeffs.items():
            if seen.intersection(ib):
                continue
            inversions = sum(1 for x in ia for y in ib if x > y)
            merged = tuple(sorted(ia + ib))
            sign = -1.0 if inversions % 2 else 1.0
            out[merged] = out.get(merged, 0.0) + sign * ca * cb
    return Covector(a.m, k, out)


def norm2(c: Covector) -> float:
    """Euclidean norm of the coefficient vector."""
    return math.sqrt(sum(v * v for v in c.coeffs.values()))


def covector_to_skew(c: Covector) -> np.ndarray:
    """Skew matrix W of a 2-covector, with c(v, w) = <W v, w>."""
    if c.k != 2:
        raise ValueError("only 2-covectors have an associated skew matrix")
    W = np.zeros((c.m, c.m))
    for (i, j), f in c.coeffs.items():
        W[j - 1, i - 1] = f
        W[i - 1, j - 1] = -f
    return W


def skew_to_covector(M: np.ndarray) -> Covector:
    """Inverse of :func:`covector_to_skew`."""
    M = np.asarray(M, dtype=float)
    m = M.shape[0]
    if M.shape != (m, m):
        raise ValueError("skew matrix must be square")
    coeffs = {}
    for i in range(m):
        for j in range(i + 1, m):
            if M[j, i] != 0.0:
                coeffs[(i + 1, j + 1)] = M[j, i]
    return Covector(m, 2, coeffs)


def comass(
    c: Covector,
    mode: str = "sandwich",
    trials: int = DEFAULT_COMASS_TRIALS,
    seed: int = 0,
) -> Tuple[float, float]:
    """Interval [lo, hi] containing the comass of ``c``.

    Exact mode (degrees 0, 1, 2, m-1, m only) returns lo == hi: the absolute
    coefficient for degrees 0 and m, ``norm2`` for degrees 1 and m-1, and the
    largest spectral coefficient of the plane decomposition for degree 2.

    Sandwich mode returns the best of ``trials`` evaluations on random
    orthonormal k-frames as lo and ``norm2`` as hi; the true comass always
    lies in between.
    """
    if mode == "exact":
        if c.k in (0, c.m):
            value = abs(next(iter(c.coeffs.values()), 0.0))
        elif c.k in (1, c.m - 1):
            value = norm2(c)
        elif c.k == 2:
            svals = np.linalg.svd(covector_to_skew(c), compute_uv=False)
            value = float(svals[0]) if svals.size else 0.0
        else:
            raise ValueError(
                f"exact comass is only available for k in {{0, 1, 2, m-1, m}}, got k={c.k}, m={c.m}"
            )
        return value, value
    if mode != "sandwich":
        raise ValueError(f"unknown comass mode {mode!r}")

    hi = norm2(c)
    if hi == 0.0 or trials <= 0:
        return (0.0, hi)
    rng = np.random.default_rng(seed)
    lo = 0.0
    remaining = int(trials)
    while remaining > 0:
        batch = min(remaining, _EVAL_BATCH)
        remaining -= batch
        gauss = rng.standard_normal((batch, c.m, c.k))
        q, _ = np.linalg.qr(gauss)
        values = _evaluate_frames(c, q)
        lo = max(lo, float(np.max(np.abs(values))))
    return (min(lo, hi), hi)


class BasisWitness(NamedTuple):
    """Maximizing basis k-subset; the sign is absorbed into the first vector."""

    vectors: np.ndarray  # shape (k, m), rows are the chosen vectors
    value: float


def comass_basis_witness(c: Covector, basis: Sequence[Sequence[float]]) -> BasisWitness:
    """Best evaluation of ``c`` on k-subsets of an orthonormal basis.

    The returned value is a comass lower bound and is never smaller than
    ``norm2(c) / sqrt(C(m, k))``.
    """
    B = np.asarray(basis, dtype=float)
    if B.shape != (c.m, c.m):
        raise ValueError(f"basis must consist of {c.m} vectors in R^{c.m}")
    gram_dev = np.max(np.abs(B @ B.T - np.eye(c.m)))
    if not gram_dev <= ORTHONORMAL_TOL:
        raise ValueError(f"basis is not orthonormal (Gram deviation {gram_dev:.3e})")
    if c.k == 0:
        return BasisWitness(np.zeros((0, c.m)), abs(next(iter(c.coeffs.values()), 0.0)))
    combos = np.array(list(itertools.combinations(range(c.m), c.k)))
    frames = B[combos].transpose(0, 2, 1)  # (n_combos, m, k)
    values = _evaluate_frames(c, frames)
    best = int(np.argmax(np.abs(values)))
    vectors = B[combos[best]].copy()
    value = float(values[best])
    if value < 0.0:
        vectors[0] = -vectors[0]
        value = -value
    return BasisWitness(vectors, value)


def interior(v: Sequence[float], c: Covector) -> Covector:
    """Contraction c(v, . , ..., . ); degree drops by one."""
    if c.k < 1:
        raise ValueError("interior multiplication needs degree k >= 1")
    vec = np.asarray(v, dtype=float)
    if vec.shape != (c.m,):
        raise ValueError(f"vector dimension {vec.shape} does not match m={c.m}")
    out: Dict[MultiIndex, float] = {}
    for index, coeff in c.coeffs.items():
        for j, i in enumerate(index):
            reduced = index[:j] + index[j + 1:]
            sign = -1.0 if j % 2 else 1.0
            out[reduced] = out.get(reduced, 0.0) + sign * coeff * vec[i - 1]
    return Covector(c.m, c.k - 1, out)


def pullback(L: np.ndarray, c: Covector) -> Covector:
    """(L^* c)(v_1, ..., v_k) = c(L v_1, ..., L v_k), computed via k x k minors."""
    mat = np.asarray(L, dtype=float)
    if mat.shape != (c.m, c.m):
        raise ValueError(f"matrix shape {mat.shape} does not match ambient dimension {c.m}")
    if c.k == 0:
        return c
    combos = list(itertools.combinations(range(c.m), c.k))
    cols = np.array(combos)  # (n_combos, k)
    acc = np.zeros(len(combos))
    for index, coeff in c.coeffs.items():
        rows = [i - 1 for i in index]
        subs = mat[rows][:, cols].transpose(1, 0, 2)  # (n_combos, k, k)
        acc += coeff * np.linalg.det(subs)
    out = {
        tuple(i + 1 for i in combo): val
        for combo, val in zip(combos, acc)
        if val != 0.0
    }
    return Covector(c.m, c.k, out)


def metric_norm_bounds(norm_a: float, norm_a_inv: float, k: int) -> Tuple[float, float]:
    """Factors bracketing the k-covector norm of a constant metric <., A .>
    against the standard one: (||A^-1||^(-k/2), ||A||^(k/2))."""
    if not (norm_a > 0 and norm_a_inv > 0):
        raise ValueError("operator norms must be positive")
    if k < 0:
        raise ValueError("degree must be nonnegative")
    return (norm_a_inv ** (-k / 2), norm_a ** (k / 2))
