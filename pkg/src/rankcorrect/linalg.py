"""Exact and floating-point linear algebra underneath the rank metric.

Two backends live here.  The exact backend works over Gaussian rationals
(complex numbers with rational real and imaginary parts) and computes ranks,
kernels, intersections and orthogonal complements with no rounding at all;
every subspace is kept in a canonical reduced-row-echelon form so that
equality of subspaces is literal equality of representations.  The float
backend wraps numpy arrays and reduces rank decisions to a singular-value
threshold.  Everything upstream that makes a rank-based decision goes through
one of these two.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

try:
    from gmpy2 import mpq
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    from fractions import Fraction as mpq

_ZERO = mpq(0)
_ONE = mpq(1)


class LinalgError(Exception):
    pass


class DimensionError(LinalgError):
    pass


_MPQ = type(mpq(0))
_Q0 = mpq(0)


def _as_mpq(x) -> "mpq":
    if type(x) is _MPQ:
        return x
    return mpq(x)


def _raw_scalar(re, im) -> "Scalar":
    # arithmetic-internal constructor: operands are mpq by invariant
    s = Scalar.__new__(Scalar)
    s.re = re
    s.im = im
    return s


def _bits(q) -> int:
    n, d = q.numerator, q.denominator
    return int(abs(n)).bit_length() + int(d).bit_length()


class Scalar:
    """A Gaussian rational: re + im*i with exact rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _as_mpq(re)
        self.im = _as_mpq(im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def conj(self) -> "Scalar":
        return _raw_scalar(self.re, -self.im)

    def bit_size(self) -> int:
        return _bits(self.re) + _bits(self.im)

    def __add__(self, other: "Scalar") -> "Scalar":
        return _raw_scalar(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "Scalar") -> "Scalar":
        return _raw_scalar(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "Scalar":
        return _raw_scalar(-self.re, -self.im)

    def __mul__(self, other: "Scalar") -> "Scalar":
        # real-only operands are the common case; skip the complex cross terms
        if self.im == 0 and other.im == 0:
            return _raw_scalar(self.re * other.re, _Q0)
        return _raw_scalar(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def inv(self) -> "Scalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero scalar")
        if self.im == 0:
            return _raw_scalar(1 / self.re, _Q0)
        n = self.re * self.re + self.im * self.im
        return _raw_scalar(self.re / n, -self.im / n)

    def __truediv__(self, other: "Scalar") -> "Scalar":
        return self * other.inv()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    @staticmethod
    def from_pair_strings(re_s: str, im_s: str) -> "Scalar":
        return Scalar(mpq(re_s), mpq(im_s))

    def pair_strings(self) -> tuple[str, str]:
        return (str(self.re), str(self.im))

    def __repr__(self):
        if self.im == 0:
            return f"{self.re}"
        return f"({self.re}+{self.im}i)"


S0 = Scalar(0)
S1 = Scalar(1)


def sc(re, im=0) -> Scalar:
    """Shorthand constructor used all over the tests."""
    return Scalar(re, im)


# ---------------------------------------------------------------------------
# vectors: plain lists of Scalar

Vector = list


def vec(entries: Iterable) -> Vector:
    return [e if isinstance(e, Scalar) else Scalar(e) for e in entries]


def vec_zero(d: int) -> Vector:
    return [S0] * d


def basis_vec(d: int, k: int) -> Vector:
    v = [S0] * d
    v[k] = S1
    return v


def vec_add(u: Vector, v: Vector) -> Vector:
    return [a + b for a, b in zip(u, v)]

def vec_sub(u: Vector, v: Vector) -> Vector:
    return [a - b for a, b in zip(u, v)]

def vec_scale(c: Scalar, v: Vector) -> Vector:
    return [c * a for a in v]


def vec_dot(u: Vector, v: Vector) -> Scalar:
    """Sesquilinear form; the first argument is conjugated."""
    acc = S0
    for a, b in zip(u, v):
        acc = acc + a.conj() * b
    return acc


def vec_is_zero(v: Vector) -> bool:
    return all(e.is_zero() for e in v)


# ---------------------------------------------------------------------------
# exact matrices


class MatrixExact:
    """Dense matrix over Gaussian rationals, row-major tuple storage."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data: Sequence[Sequence[Scalar]]):
        self.data = tuple(tuple(row) for row in data)
        self.rows = len(self.data)
        self.cols = len(self.data[0]) if self.data else 0
        for row in self.data:
            if len(row) != self.cols:
                raise DimensionError("ragged rows")

    @staticmethod
    def from_rows(rows: Sequence[Sequence]) -> "MatrixExact":
        return MatrixExact([[e if isinstance(e, Scalar) else Scalar(e) for e in row] for row in rows])

    @staticmethod
    def identity(d: int) -> "MatrixExact":
        return MatrixExact([[S1 if i == j else S0 for j in range(d)] for i in range(d)])

    @staticmethod
    def zero(r: int, c: int | None = None) -> "MatrixExact":
        c = r if c is None else c
        return MatrixExact([[S0] * c for _ in range(r)])

    def __getitem__(self, rc) -> Scalar:
        i, j = rc
        return self.data[i][j]

    def row(self, i: int) -> Vector:
        return list(self.data[i])

    def col(self, j: int) -> Vector:
        return [self.data[i][j] for i in range(self.rows)]

    def __add__(self, other: "MatrixExact") -> "MatrixExact":
        self._same_shape(other)
        return MatrixExact([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.data, other.data)])

    def __sub__(self, other: "MatrixExact") -> "MatrixExact":
        self._same_shape(other)
        return MatrixExact([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.data, other.data)])

    def __neg__(self) -> "MatrixExact":
        return MatrixExact([[-a for a in row] for row in self.data])

    def scale(self, c: Scalar) -> "MatrixExact":
        return MatrixExact([[c * a for a in row] for row in self.data])

    def __matmul__(self, other: "MatrixExact") -> "MatrixExact":
        if self.cols != other.rows:
            raise DimensionError(f"product shape mismatch {self.cols} vs {other.rows}")
        ocols = list(zip(*other.data))
        out = []
        for row in self.data:
            out.append([vec_hdot_plain(row, c) for c in ocols])
        return MatrixExact(out)

    def matvec(self, v: Vector) -> Vector:
        if self.cols != len(v):
            raise DimensionError("matvec shape mismatch")
        return [vec_hdot_plain(row, v) for row in self.data]

    def adjoint(self) -> "MatrixExact":
        return MatrixExact([[self.data[i][j].conj() for i in range(self.rows)] for j in range(self.cols)])

    def transpose(self) -> "MatrixExact":
        return MatrixExact([[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def conj_entries(self) -> "MatrixExact":
        return MatrixExact([[e.conj() for e in row] for row in self.data])

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.data for e in row)

    def is_hermitian(self) -> bool:
        return self.rows == self.cols and self == self.adjoint()

    def is_unitary(self) -> bool:
        if self.rows != self.cols:
            return False
        return (self @ self.adjoint()) == MatrixExact.identity(self.rows)

    def rank(self) -> int:
        rows = [list(r) for r in self.data]
        _, pivots = _rref_in_place(rows, self.cols)
        return len(pivots)

    def inverse(self) -> "MatrixExact":
        if self.rows != self.cols:
            raise DimensionError("inverse of non-square matrix")
        d = self.rows
        aug = [list(self.data[i]) + basis_vec(d, i) for i in range(d)]
        rows, pivots = _rref_in_place(aug, 2 * d)
        if pivots[:d] != list(range(d)) or len(pivots) != d:
            raise LinalgError("matrix is singular")
        return MatrixExact([row[d:] for row in rows[:d]])

    def to_float(self) -> "MatrixFloat":
        arr = np.array([[e.to_complex() for e in row] for row in self.data], dtype=np.complex128)
        return MatrixFloat(arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatrixExact):
            return NotImplemented
        return self.data == other.data

    def __hash__(self):
        return hash(self.data)

    def _same_shape(self, other: "MatrixExact"):
        if self.rows != other.rows or self.cols != other.cols:
            raise DimensionError("shape mismatch")

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [list(e.pair_strings()) for row in self.data for e in row],
        }

    @staticmethod
    def from_json(obj: dict) -> "MatrixExact":
        r, c = obj["rows"], obj["cols"]
        ent = obj["entries"]
        if len(ent) != r * c:
            raise ValueError("entry count does not match shape")
        it = iter(ent)
        return MatrixExact([[Scalar.from_pair_strings(*next(it)) for _ in range(c)] for _ in range(r)])

    def __repr__(self):
        return f"MatrixExact({self.rows}x{self.cols})"


def vec_hdot_plain(u: Vector, v: Vector) -> Scalar:
    """Bilinear dot product, no conjugation (matrix product kernel)."""
    acc = S0
    for a, b in zip(u, v):
        if not a.is_zero() and not b.is_zero():
            acc = acc + a * b
    return acc


def commutator(a: MatrixExact, b: MatrixExact) -> MatrixExact:
    return (a @ b) - (b @ a)


# ---------------------------------------------------------------------------
# reduced row echelon form

def _rref_in_place(rows: list[list[Scalar]], cols: int) -> tuple[list[list[Scalar]], list[int]]:
    """Full RREF with pivots normalized to 1 and cleared above and below.

    Pivot choice: among candidate rows, take the entry with the smallest
    total bit-length.  That keeps intermediate rationals small on the long
    elimination chains the ball construction produces.
    """
    pivots: list[int] = []
    r = 0
    nrows = len(rows)
    for c in range(cols):
        best_i = -1
        best_sz = -1
        for i in range(r, nrows):
            e = rows[i][c]
            if not e.is_zero():
                sz = e.bit_size()
                if best_i < 0 or sz < best_sz:
                    best_i, best_sz = i, sz
        if best_i < 0:
            continue
        rows[r], rows[best_i] = rows[best_i], rows[r]
        inv = rows[r][c].inv()
        rows[r] = [e * inv for e in rows[r]]
        prow = rows[r]
        for j in range(nrows):
            if j != r:
                f = rows[j][c]
                if not f.is_zero():
                    rows[j] = [a - f * b for a, b in zip(rows[j], prow)]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows, pivots


def rref(m: MatrixExact) -> tuple[MatrixExact, list[int]]:
    rows = [list(r) for r in m.data]
    rows, pivots = _rref_in_place(rows, m.cols)
    return MatrixExact(rows), pivots


# ---------------------------------------------------------------------------
# subspaces


class SpanBuilder:
    """Incremental RREF basis; rows stay fully reduced after every insert."""

    def __init__(self, ambient_dim: int):
        self.d = ambient_dim
        self.rows: list[list[Scalar]] = []
        self.pivots: list[int] = []

    def reduce(self, v: Vector) -> Vector:
        w = list(v)
        for row, p in zip(self.rows, self.pivots):
            f = w[p]
            if not f.is_zero():
                w = [a - f * b for a, b in zip(w, row)]
        return w

    def insert(self, v: Vector) -> bool:
        """Add v to the span; True when it carried a new direction."""
        w = self.reduce(v)
        lead = -1
        for j, e in enumerate(w):
            if not e.is_zero():
                lead = j
                break
        if lead < 0:
            return False
        inv = w[lead].inv()
        w = [e * inv for e in w]
        # clear the new pivot column from the existing rows
        for k, row in enumerate(self.rows):
            f = row[lead]
            if not f.is_zero():
                self.rows[k] = [a - f * b for a, b in zip(row, w)]
        at = 0
        while at < len(self.pivots) and self.pivots[at] < lead:
            at += 1
        self.rows.insert(at, w)
        self.pivots.insert(at, lead)
        return True

    def coordinates(self, v: Vector) -> Vector | None:
        """Coefficients of v in the current basis, or None if outside."""
        w = list(v)
        coeffs = [S0] * len(self.rows)
        for k, (row, p) in enumerate(zip(self.rows, self.pivots)):
            f = w[p]
            if not f.is_zero():
                coeffs[k] = f
                w = [a - f * b for a, b in zip(w, row)]
        if not vec_is_zero(w):
            return None
        return coeffs

    @property
    def dim(self) -> int:
        return len(self.rows)

    def subspace(self) -> "Subspace":
        return Subspace._from_rref(self.d, [list(r) for r in self.rows], list(self.pivots))


class TrackedSpan:
    """Incremental span that expresses members over the inserted basis.

    Each internal RREF row carries the combination of inserted vectors that
    produced it, so coordinates() answers in terms of the vectors that
    returned True from insert(), in insertion order.
    """

    __slots__ = ("d", "rows", "pivots", "book")

    def __init__(self, ambient_dim: int):
        self.d = ambient_dim
        self.rows: list[list[Scalar]] = []
        self.pivots: list[int] = []
        self.book: list[list[Scalar]] = []

    @property
    def dim(self) -> int:
        return len(self.rows)

    def _reduce(self, v: Vector, b: list[Scalar]):
        # b may be one entry longer than the stored book rows (the slot for
        # the vector being inserted); reduce by index so that slot survives
        w = list(v)
        b = list(b)
        for row, p, rb in zip(self.rows, self.pivots, self.book):
            f = w[p]
            if not f.is_zero():
                w = [a - f * c for a, c in zip(w, row)]
                for t, c in enumerate(rb):
                    b[t] = b[t] - f * c
        return w, b

    def insert(self, v: Vector) -> bool:
        k = len(self.book[0]) if self.book else 0
        w, b = self._reduce(v, [S0] * k + [S1])
        lead = -1
        for j, e in enumerate(w):
            if not e.is_zero():
                lead = j
                break
        if lead < 0:
            return False
        for rb in self.book:
            rb.append(S0)
        inv = w[lead].inv()
        w = [e * inv for e in w]
        b = [e * inv for e in b]
        for t, row in enumerate(self.rows):
            f = row[lead]
            if not f.is_zero():
                self.rows[t] = [a - f * c for a, c in zip(row, w)]
                self.book[t] = [a - f * c for a, c in zip(self.book[t], b)]
        at = 0
        while at < len(self.pivots) and self.pivots[at] < lead:
            at += 1
        self.rows.insert(at, w)
        self.pivots.insert(at, lead)
        self.book.insert(at, b)
        return True

    def coordinates(self, v: Vector) -> Vector | None:
        """Coefficients over the inserted vectors, or None if v is outside."""
        w = list(v)
        out = [S0] * (len(self.book[0]) if self.book else 0)
        for row, p, rb in zip(self.rows, self.pivots, self.book):
            f = w[p]
            if not f.is_zero():
                w = [a - f * c for a, c in zip(w, row)]
                out = [a + f * c for a, c in zip(out, rb)]
        if not vec_is_zero(w):
            return None
        return out

    def contains(self, v: Vector) -> bool:
        w = list(v)
        for row, p in zip(self.rows, self.pivots):
            f = w[p]
            if not f.is_zero():
                w = [a - f * c for a, c in zip(w, row)]
        return vec_is_zero(w)

    def subspace(self) -> "Subspace":
        return Subspace._from_rref(self.d, [list(r) for r in self.rows], list(self.pivots))


class Subspace:
    """Subspace of C^d in canonical RREF form; equality is representational."""

    __slots__ = ("ambient_dim", "basis", "pivots")

    def __init__(self, ambient_dim: int, vectors: Iterable[Vector] = ()):
        sb = SpanBuilder(ambient_dim)
        for v in vectors:
            if len(v) != ambient_dim:
                raise DimensionError("vector length does not match ambient dimension")
            sb.insert(v)
        self.ambient_dim = ambient_dim
        self.basis = tuple(tuple(r) for r in sb.rows)
        self.pivots = tuple(sb.pivots)

    @classmethod
    def _from_rref(cls, d: int, rows: list[list[Scalar]], pivots: list[int]) -> "Subspace":
        s = cls.__new__(cls)
        s.ambient_dim = d
        s.basis = tuple(tuple(r) for r in rows)
        s.pivots = tuple(pivots)
        return s

    @staticmethod
    def zero(d: int) -> "Subspace":
        return Subspace(d)

    @staticmethod
    def full(d: int) -> "Subspace":
        return Subspace(d, [basis_vec(d, k) for k in range(d)])

    @staticmethod
    def span(vectors: Sequence[Vector]) -> "Subspace":
        if not vectors:
            raise DimensionError("span of empty list has no ambient dimension")
        return Subspace(len(vectors[0]), vectors)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def is_zero(self) -> bool:
        return not self.basis

    def basis_vectors(self) -> list[Vector]:
        return [list(r) for r in self.basis]

    def contains(self, v: Vector) -> bool:
        sb = self._builder()
        return not sb.insert(list(v))

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(list(r)) for r in other.basis)

    def _builder(self) -> SpanBuilder:
        sb = SpanBuilder(self.ambient_dim)
        sb.rows = [list(r) for r in self.basis]
        sb.pivots = list(self.pivots)
        return sb

    def add(self, other: "Subspace") -> "Subspace":
        self._check(other)
        sb = self._builder()
        for r in other.basis:
            sb.insert(list(r))
        return sb.subspace()

    def basis_matrix(self) -> MatrixExact:
        if not self.basis:
            raise LinalgError("zero subspace has no basis matrix")
        return MatrixExact(self.basis)

    def orth_complement(self) -> "Subspace":
        """All v with <b, v> = 0 for every basis vector b."""
        if not self.basis:
            return Subspace.full(self.ambient_dim)
        conj_rows = MatrixExact([[e.conj() for e in row] for row in self.basis])
        return kernel(conj_rows)

    def intersect(self, other: "Subspace") -> "Subspace":
        self._check(other)
        if self.is_zero() or other.is_zero():
            return Subspace.zero(self.ambient_dim)
        return self.orth_complement().add(other.orth_complement()).orth_complement()

    def project(self, v: Vector) -> Vector:
        """Orthogonal projection of v onto the subspace, exactly."""
        if not self.basis:
            return vec_zero(self.ambient_dim)
        b = [list(r) for r in self.basis]
        k = len(b)
        gram = [[vec_dot(b[i], b[j]) for j in range(k)] for i in range(k)]
        rhs = [vec_dot(b[i], v) for i in range(k)]
        coeffs = _solve_hermitian(gram, rhs)
        p = vec_zero(self.ambient_dim)
        for c, row in zip(coeffs, b):
            if not c.is_zero():
                p = vec_add(p, vec_scale(c, row))
        return p

    def projector(self) -> MatrixExact:
        """Matrix of the orthogonal projection onto the subspace."""
        d = self.ambient_dim
        cols = [self.project(basis_vec(d, j)) for j in range(d)]
        return MatrixExact([[cols[j][i] for j in range(d)] for i in range(d)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient_dim, self.basis))

    def _check(self, other: "Subspace"):
        if self.ambient_dim != other.ambient_dim:
            raise DimensionError("ambient dimensions differ")

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def _solve_hermitian(g: list[list[Scalar]], rhs: Vector) -> Vector:
    """Solve g x = rhs for an invertible Gram matrix g."""
    k = len(g)
    aug = [list(g[i]) + [rhs[i]] for i in range(k)]
    rows, pivots = _rref_in_place(aug, k + 1)
    if len(pivots) != k or pivots != list(range(k)):
        raise LinalgError("gram matrix is singular; basis was dependent")
    return [rows[i][k] for i in range(k)]


def kernel(m: MatrixExact) -> Subspace:
    """Null space {v : m v = 0}."""
    rows = [list(r) for r in m.data]
    rows, pivots = _rref_in_place(rows, m.cols)
    rows = rows[: len(pivots)]
    free = [j for j in range(m.cols) if j not in pivots]
    vecs = []
    for f in free:
        v = vec_zero(m.cols)
        v[f] = S1
        for i, p in enumerate(pivots):
            v[p] = -rows[i][f]
        vecs.append(v)
    return Subspace(m.cols, vecs)


def image(m: MatrixExact) -> Subspace:
    """Column space of m."""
    return Subspace(m.rows, [m.col(j) for j in range(m.cols)])


def preimage(m: MatrixExact, s: Subspace) -> Subspace:
    """{v : m v lies in s}."""
    if m.rows != s.ambient_dim:
        raise DimensionError("codomain does not match subspace ambient dimension")
    comp = s.orth_complement()
    if comp.is_zero():
        return Subspace.full(m.cols)
    conj_rows = MatrixExact([[e.conj() for e in row] for row in comp.basis])
    return kernel(conj_rows @ m)


def normalized_rank(m: MatrixExact):
    """rank(m) / d as an exact rational; the rank-metric size of a matrix."""
    if m.rows != m.cols:
        raise DimensionError("normalized rank is defined for square matrices")
    return mpq(m.rank(), m.rows)


# ---------------------------------------------------------------------------
# float backend

DEFAULT_TOL = 1e-10


class MatrixFloat:
    """numpy-backed complex matrix; ranks come from an SVD threshold."""

    __slots__ = ("array",)

    def __init__(self, array):
        a = np.asarray(array, dtype=np.complex128)
        if a.ndim != 2:
            raise DimensionError("expected a 2-d array")
        self.array = a

    @property
    def rows(self) -> int:
        return self.array.shape[0]

    @property
    def cols(self) -> int:
        return self.array.shape[1]

    def __add__(self, other):
        return MatrixFloat(self.array + other.array)

    def __sub__(self, other):
        return MatrixFloat(self.array - other.array)

    def __matmul__(self, other):
        return MatrixFloat(self.array @ other.array)

    def adjoint(self) -> "MatrixFloat":
        return MatrixFloat(self.array.conj().T)

    def is_hermitian(self, tol: float = DEFAULT_TOL) -> bool:
        return bool(np.allclose(self.array, self.array.conj().T, atol=tol))

    def is_unitary(self, tol: float = DEFAULT_TOL) -> bool:
        if self.rows != self.cols:
            return False
        return bool(np.allclose(self.array @ self.array.conj().T, np.eye(self.rows), atol=tol))

    def numerical_rank(self, tol: float = DEFAULT_TOL) -> int:
        return numerical_rank(self, tol)

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[float(e.real), float(e.imag)] for e in self.array.reshape(-1)],
        }

    @staticmethod
    def from_json(obj: dict) -> "MatrixFloat":
        r, c = obj["rows"], obj["cols"]
        flat = [complex(re, im) for re, im in obj["entries"]]
        return MatrixFloat(np.array(flat, dtype=np.complex128).reshape(r, c))

    def __repr__(self):
        return f"MatrixFloat({self.rows}x{self.cols})"


def numerical_rank(m: MatrixFloat, tol: float = DEFAULT_TOL, scale: float | None = None) -> int:
    """Count of singular values above tol times the scale.

    The scale defaults to the largest singular value, the usual rank
    convention.  Differences and commutators should pass the norm of the
    operators they came from instead, so that an input known only to
    rounding accuracy has rank zero rather than full rank.
    """
    s = np.linalg.svd(m.array, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    ref = float(s[0]) if scale is None or scale <= 0.0 else float(scale)
    return int(np.sum(s > tol * ref))


def normalized_rank_float(m: MatrixFloat, tol: float = DEFAULT_TOL, scale: float | None = None) -> float:
    if m.rows != m.cols:
        raise DimensionError("normalized rank is defined for square matrices")
    return numerical_rank(m, tol, scale) / m.rows
