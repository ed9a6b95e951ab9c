"""Matrices on labelled tensor factors: partial transposition, norms, relative entropy.

The partial transpose is carried out as a pure index permutation (reshape,
axis swap, reshape back), so it is exact: no arithmetic touches the entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import TOL, ValidationError

__all__ = [
    "SystemLayout",
    "CMatrix",
    "partial_transpose",
    "permute_factors",
    "collect_parties",
    "tensor",
    "trace_norm",
    "op_norm",
    "spectral_norm",
    "psd_sqrt",
    "assert_density",
    "rel_entropy",
    "matrix_to_json",
    "matrix_from_json",
]


@dataclass(frozen=True)
class SystemLayout:
    """Ordered tensor factors, each a (dimension, party) pair.

    Parties are short labels, "A" and "B" for the bipartite operations in
    this package.  A party may own several factors and factors of different
    parties may interleave.
    """

    factors: tuple[tuple[int, str], ...]

    def __post_init__(self):
        if not self.factors:
            raise ValidationError("layout needs at least one factor")
        for d, party in self.factors:
            if not isinstance(d, int) or d < 1:
                raise ValidationError(f"factor dimension must be a positive int, got {d!r}")
            if not party:
                raise ValidationError("factor party label must be non-empty")

    @staticmethod
    def bipartite(dim_a: int, dim_b: int) -> "SystemLayout":
        return SystemLayout(((dim_a, "A"), (dim_b, "B")))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for d, _ in self.factors)

    @property
    def parties(self) -> tuple[str, ...]:
        return tuple(p for _, p in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def axes(self, party: str) -> tuple[int, ...]:
        return tuple(i for i, (_, p) in enumerate(self.factors) if p == party)

    def dim_of(self, party: str) -> int:
        axes = self.axes(party)
        return int(np.prod([self.factors[i][0] for i in axes], dtype=np.int64)) if axes else 1

    def permuted(self, order: Sequence[int]) -> "SystemLayout":
        if sorted(order) != list(range(len(self.factors))):
            raise ValidationError(f"{order!r} is not a permutation of the factors")
        return SystemLayout(tuple(self.factors[i] for i in order))


class CMatrix:
    """A square complex matrix plus an optional factor layout.

    Entries are stored row-major as a numpy complex128 array.  Setting
    ``hermitian=True`` checks max |M_ij - conj(M_ji)| against the structural
    tolerance and remembers the flag so norm routines can pick the cheaper
    eigenvalue path.
    """

    __slots__ = ("mat", "layout", "hermitian")

    def __init__(self, mat, layout: SystemLayout | None = None, hermitian: bool = False):
        arr = np.ascontiguousarray(mat, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError(f"matrix must be square, got shape {arr.shape}")
        if layout is not None and layout.dim != arr.shape[0]:
            raise ValidationError(
                f"layout dimension {layout.dim} does not match matrix dimension {arr.shape[0]}"
            )
        if hermitian:
            dev = float(np.abs(arr - arr.conj().T).max()) if arr.size else 0.0
            if dev > TOL.structural:
                raise ValidationError(f"matrix marked hermitian deviates by {dev:.3e}")
        self.mat = arr
        self.layout = layout
        self.hermitian = bool(hermitian)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def is_hermitian(self, tol: float = TOL.structural) -> bool:
        return bool(np.abs(self.mat - self.mat.conj().T).max() <= tol)

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def __repr__(self):
        lay = "" if self.layout is None else f", factors={self.layout.factors}"
        return f"CMatrix(dim={self.dim}{lay})"


def _as_array(m) -> np.ndarray:
    return m.mat if isinstance(m, CMatrix) else np.asarray(m, dtype=np.complex128)


def _require_layout(m: CMatrix, op: str) -> SystemLayout:
    if not isinstance(m, CMatrix) or m.layout is None:
        raise ValidationError(f"{op} needs a CMatrix with a layout")
    return m.layout


def partial_transpose(m: CMatrix, party: str = "B") -> CMatrix:
    """Transpose the factors of one party, leaving the rest untouched.

    Implemented as an index permutation, hence exact and an involution.
    """
    layout = _require_layout(m, "partial_transpose")
    axes = layout.axes(party)
    if not axes:
        raise ValidationError(f"layout has no factors for party {party!r}")
    dims = layout.dims
    n = len(dims)
    t = m.mat.reshape(dims + dims)
    perm = list(range(2 * n))
    for ax in axes:
        perm[ax], perm[n + ax] = perm[n + ax], perm[ax]
    out = t.transpose(perm).reshape(m.dim, m.dim)
    return CMatrix(out, layout, hermitian=m.hermitian)


def permute_factors(m: CMatrix, order: Sequence[int]) -> CMatrix:
    """Reorder tensor factors; another pure index permutation."""
    layout = _require_layout(m, "permute_factors")
    new_layout = layout.permuted(order)
    dims = layout.dims
    n = len(dims)
    t = m.mat.reshape(dims + dims)
    perm = list(order) + [n + i for i in order]
    out = np.ascontiguousarray(t.transpose(perm).reshape(m.dim, m.dim))
    return CMatrix(out, new_layout, hermitian=m.hermitian)


def collect_parties(m: CMatrix) -> CMatrix:
    """Group all A factors before all B factors and coarsen the layout.

    The result carries the two-factor layout [(dim_A, A), (dim_B, B)], which
    is what the Bell-operator and box routines consume.
    """
    layout = _require_layout(m, "collect_parties")
    extra = set(layout.parties) - {"A", "B"}
    if extra:
        raise ValidationError(f"bipartite operation got extra parties {sorted(extra)}")
    order = list(layout.axes("A")) + list(layout.axes("B"))
    if not order:
        raise ValidationError("layout has no A or B factors")
    grouped = m if order == list(range(len(layout.factors))) else permute_factors(m, order)
    dim_a = layout.dim_of("A")
    dim_b = layout.dim_of("B")
    coarse = SystemLayout(((dim_a, "A"), (dim_b, "B")))
    return CMatrix(grouped.mat, coarse, hermitian=m.hermitian)


def tensor(a: CMatrix, b: CMatrix) -> CMatrix:
    """Kronecker product; layouts concatenate when both sides carry one."""
    layout = None
    if isinstance(a, CMatrix) and isinstance(b, CMatrix) and a.layout and b.layout:
        layout = SystemLayout(a.layout.factors + b.layout.factors)
    herm = getattr(a, "hermitian", False) and getattr(b, "hermitian", False)
    return CMatrix(np.kron(_as_array(a), _as_array(b)), layout, hermitian=herm)


def _hermitian_eigs(arr: np.ndarray, what: str, tol: float = TOL.assertion):
    dev = float(np.abs(arr - arr.conj().T).max())
    if dev > tol:
        raise ValidationError(f"{what} expects a hermitian matrix, deviation {dev:.3e}")
    return np.linalg.eigh(arr)


def trace_norm(m) -> float:
    """Sum of singular values; for hermitian input the sum of |eigenvalues|."""
    arr = _as_array(m)
    if arr.shape[0] != arr.shape[1]:
        raise ValidationError("trace_norm expects a square matrix")
    if np.abs(arr - arr.conj().T).max() <= TOL.assertion:
        return float(np.abs(np.linalg.eigvalsh(arr)).sum())
    return float(np.linalg.svd(arr, compute_uv=False).sum())


def op_norm(m) -> float:
    """Largest |eigenvalue| of a hermitian matrix.  Errors on non-hermitian input."""
    arr = _as_array(m)
    if arr.shape[0] != arr.shape[1]:
        raise ValidationError("op_norm expects a square matrix")
    dev = float(np.abs(arr - arr.conj().T).max())
    if dev > TOL.assertion:
        raise ValidationError(f"op_norm expects a hermitian matrix, deviation {dev:.3e}")
    return float(np.abs(np.linalg.eigvalsh(arr)).max())


def spectral_norm(m) -> float:
    """Largest singular value, valid for arbitrary (e.g. filter) operators."""
    return float(np.linalg.svd(_as_array(m), compute_uv=False).max())


def psd_sqrt(m, floor: float = TOL.eig_floor) -> np.ndarray:
    """Square root of a PSD matrix, flooring eigenvalues <= ``floor`` to zero.

    The floor keeps sqrt from amplifying noise: an eigenvalue that should be
    an exact 0 but comes out of the solver as 1e-17 would otherwise donate
    ~3e-9 to every singular value sum downstream.
    """
    arr = _as_array(m)
    w, v = _hermitian_eigs(arr, "psd_sqrt")
    if float(w.min()) < -TOL.psd:
        raise ValidationError(f"psd_sqrt got a matrix with eigenvalue {w.min():.3e}")
    w = np.where(w <= floor, 0.0, w)
    return (v * np.sqrt(w)) @ v.conj().T


def assert_density(m, what: str, trace_tol: float = TOL.assertion,
                   psd_tol: float = TOL.psd) -> np.ndarray:
    """Check trace one and positivity, returning the underlying array."""
    arr = _as_array(m)
    tr = complex(np.trace(arr))
    if abs(tr - 1.0) > trace_tol:
        raise ValidationError(f"{what} must have unit trace, got {tr}")
    w = _hermitian_eigs(arr, what)[0]
    if float(w.min()) < -psd_tol:
        raise ValidationError(f"{what} must be PSD, minimum eigenvalue {w.min():.3e}")
    return arr


def rel_entropy(rho, sigma, *, support_tol: float = TOL.support,
                floor: float = TOL.eig_floor) -> float:
    """Quantum relative entropy S(rho || sigma) in bits.

    Returns ``math.inf`` when rho has weight outside the support of sigma
    (kernel overlap above ``support_tol``).  Both arguments must be density
    matrices within the validation tolerance.

    Parameters
    ----------
    rho, sigma : CMatrix or array-like
        Density matrices of equal dimension.
    support_tol : float
        Maximum tolerated Tr(rho K) with K the kernel projector of sigma.
    floor : float
        Eigenvalues at or below this count as zero, both for the kernel of
        sigma and inside the logarithms.
    """
    r = assert_density(rho, "rel_entropy rho", trace_tol=TOL.support, psd_tol=TOL.support)
    s = assert_density(sigma, "rel_entropy sigma", trace_tol=TOL.support, psd_tol=TOL.support)
    if r.shape != s.shape:
        raise ValidationError("rel_entropy needs matrices of equal dimension")
    ws, vs = _hermitian_eigs(s, "rel_entropy sigma")
    kernel = vs[:, ws <= floor]
    if kernel.shape[1]:
        overlap = float(np.einsum("ij,jk,ki->", kernel.conj().T, r, kernel).real)
        if overlap > support_tol:
            return math.inf
    wr = np.linalg.eigvalsh(r)
    wr_pos = wr[wr > floor]
    term_rho = float((wr_pos * np.log2(wr_pos)).sum())
    keep = ws > floor
    vpos = vs[:, keep]
    weights = np.einsum("ij,jk,ki->i", vpos.conj().T, r, vpos).real
    term_cross = float((weights * np.log2(ws[keep])).sum())
    value = term_rho - term_cross
    if value < 0.0:
        # mathematically >= 0; only rounding can push it a hair under
        if value < -1e-7:
            raise ValidationError(f"relative entropy came out {value}, check inputs")
        value = 0.0
    return value


def matrix_to_json(m: CMatrix) -> dict:
    """Serialize as {"dims", "parties", "data"} with data = [[re, im], ...] row-major."""
    if m.layout is None:
        dims = [m.dim]
        parties = ["A"]
    else:
        dims = list(m.layout.dims)
        parties = list(m.layout.parties)
    flat = m.mat.reshape(-1)
    return {
        "dims": dims,
        "parties": parties,
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj: dict, expect_hermitian: bool = False) -> CMatrix:
    """Inverse of matrix_to_json, validating shape and optionally hermiticity."""
    try:
        dims = [int(d) for d in obj["dims"]]
        parties = [str(p) for p in obj["parties"]]
        data = obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"matrix JSON is missing a field: {exc}") from exc
    if len(dims) != len(parties):
        raise ValidationError("dims and parties must have equal length")
    dim = int(np.prod(dims, dtype=np.int64))
    if len(data) != dim * dim:
        raise ValidationError(f"matrix JSON has {len(data)} entries, expected {dim * dim}")
    try:
        flat = np.array([complex(re, im) for re, im in data], dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise ValidationError("matrix JSON entries must be [re, im] pairs") from exc
    layout = SystemLayout(tuple((d, p) for d, p in zip(dims, parties)))
    return CMatrix(flat.reshape(dim, dim), layout, hermitian=expect_hermitian)
