"""Matrix tuples, word evaluation, and commutativity measurements.

A tuple is n operators on C^d, each flagged unitary, selfadjoint, or general.
Flags are verified at construction time.  Words in the tuple are evaluated at
vectors through a memo tree keyed by exponent multisets, so all sorted
(canonical) words share prefixes; r-commutativity of the tuple at a vector
reduces to one-step comparisons against those canonical evaluations.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .linalg import (
    DimensionError,
    MatrixExact,
    MatrixFloat,
    Scalar,
    SpanBuilder,
    Subspace,
    Vector,
    commutator,
    kernel,
    mpq,
    normalized_rank,
    normalized_rank_float,
    vec_is_zero,
)

FLAGS = ("unitary", "selfadjoint", "general")


class FlagError(Exception):
    """A matrix does not satisfy the structure its flag claims."""


class MatrixTuple:
    __slots__ = ("n", "d", "mats", "flags")

    def __init__(self, mats: Sequence, flags: Sequence[str], check: bool = True):
        if len(mats) != len(flags):
            raise DimensionError("one flag per matrix")
        if not mats:
            raise DimensionError("empty tuple")
        self.mats = tuple(mats)
        self.flags = tuple(flags)
        self.n = len(mats)
        d = mats[0].rows
        for m in mats:
            if m.rows != m.cols or m.rows != d:
                raise DimensionError("all matrices must be square of one size")
        self.d = d
        backend = self.backend
        for m in mats:
            if (backend == "exact") != isinstance(m, MatrixExact):
                raise DimensionError("mixed backends in one tuple")
        if check:
            self._verify_flags()

    @property
    def backend(self) -> str:
        return "exact" if isinstance(self.mats[0], MatrixExact) else "float"

    def _verify_flags(self):
        for k, (m, f) in enumerate(zip(self.mats, self.flags)):
            if f not in FLAGS:
                raise FlagError(f"unknown flag {f!r}")
            if f == "general":
                continue
            if f == "selfadjoint":
                ok = m.is_hermitian() if isinstance(m, MatrixExact) else m.is_hermitian()
            else:
                ok = m.is_unitary()
            if not ok:
                raise FlagError(f"matrix {k} is not {f}")

    def to_float(self) -> "MatrixTuple":
        if self.backend == "float":
            return self
        return MatrixTuple([m.to_float() for m in self.mats], self.flags, check=False)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "backend": self.backend,
            "flags": list(self.flags),
            "mats": [m.to_json() for m in self.mats],
        }

    @staticmethod
    def from_json(obj: dict) -> "MatrixTuple":
        cls = MatrixExact if obj.get("backend", "exact") == "exact" else MatrixFloat
        mats = [cls.from_json(mo) for mo in obj["mats"]]
        return MatrixTuple(mats, obj["flags"])

    def __repr__(self):
        return f"MatrixTuple(n={self.n}, d={self.d}, {self.backend})"


class Word:
    """A finite product of tuple members, stored as letter indices."""

    __slots__ = ("letters",)

    def __init__(self, letters: Iterable[int]):
        self.letters = tuple(letters)

    def __len__(self):
        return len(self.letters)

    def sorted(self) -> "Word":
        return Word(sorted(self.letters))

    def exponents(self, n: int) -> tuple[int, ...]:
        e = [0] * n
        for l in self.letters:
            e[l] += 1
        return tuple(e)

    def __eq__(self, other):
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __repr__(self):
        return f"Word{self.letters}"


def evaluate_word(t: MatrixTuple, v: Vector, word: Word) -> Vector:
    """Apply the word's operator product to v; the last letter acts first."""
    out = list(v)
    for l in reversed(word.letters):
        out = t.mats[l].matvec(out)
    return out


def commutator_defect(t: MatrixTuple, tol: float | None = None):
    """Largest normalized rank of a pairwise commutator."""
    if t.backend == "float":
        worst = 0.0
        norms = [float(np.linalg.norm(m.array, 2)) for m in t.mats]
        for i in range(t.n):
            for j in range(i + 1, t.n):
                c = (t.mats[i] @ t.mats[j]) - (t.mats[j] @ t.mats[i])
                worst = max(
                    worst,
                    normalized_rank_float(c, tol if tol is not None else 1e-10, norms[i] * norms[j]),
                )
        return worst
    worst = mpq(0)
    for i in range(t.n):
        for j in range(i + 1, t.n):
            r = normalized_rank(commutator(t.mats[i], t.mats[j]))
            if r > worst:
                worst = r
    return worst


def rank_distance(a: MatrixTuple, b: MatrixTuple, tol: float | None = None):
    """max_i rank(A_i - B_i)/d; both tuples must share shape and backend."""
    if a.n != b.n or a.d != b.d:
        raise DimensionError("tuples must have equal n and d")
    if a.backend != b.backend:
        raise DimensionError("tuples must share a backend")
    if a.backend == "float":
        worst = 0.0
        for x, y in zip(a.mats, b.mats):
            scale = max(float(np.linalg.norm(x.array, 2)), float(np.linalg.norm(y.array, 2)))
            worst = max(worst, normalized_rank_float(x - y, tol if tol is not None else 1e-10, scale))
        return worst
    worst = mpq(0)
    for x, y in zip(a.mats, b.mats):
        r = normalized_rank(x - y)
        if r > worst:
            worst = r
    return worst


def star_close(t: MatrixTuple) -> MatrixTuple:
    """Append missing adjoints.  Idempotent up to the order of the new tail."""
    mats = list(t.mats)
    flags = list(t.flags)
    for m, f in zip(t.mats, t.flags):
        adj = m.adjoint()
        present = any(_same_matrix(adj, x, t.backend) for x in mats)
        if not present:
            mats.append(adj)
            flags.append("unitary" if f == "unitary" else "general")
    return MatrixTuple(mats, flags, check=False)


def _same_matrix(a, b, backend: str) -> bool:
    if backend == "exact":
        return a == b
    return bool(np.array_equal(a.array, b.array))


# ---------------------------------------------------------------------------
# canonical word evaluations


def _min_letter(m: tuple[int, ...]) -> int:
    for i, e in enumerate(m):
        if e:
            return i
    return len(m)


class WordEvaluations:
    """Evaluations of sorted words at a root, memoized on exponent tuples.

    value(m) is M_{i1} ... M_{iq} applied to the root where i1 <= ... <= iq
    runs through the multiset m; the recursion peels the smallest letter,
    so sharing a tail means sharing the computation.
    """

    def __init__(self, t: MatrixTuple, root: Vector):
        if len(root) != t.d:
            raise DimensionError("root has wrong length")
        self.t = t
        self.n = t.n
        self.values: dict[tuple[int, ...], Vector] = {(0,) * t.n: list(root)}

    def value(self, m: tuple[int, ...]) -> Vector:
        got = self.values.get(m)
        if got is not None:
            return got
        # iterative peel to avoid deep recursion on long words
        stack = []
        cur = m
        while cur not in self.values:
            stack.append(cur)
            i = _min_letter(cur)
            cur = cur[:i] + (cur[i] - 1,) + cur[i + 1:]
        v = self.values[cur]
        for mm in reversed(stack):
            i = _min_letter(mm)
            v = self.t.mats[i].matvec(v)
            self.values[mm] = v
        return v


def _extensions(m: tuple[int, ...], limit: int) -> range:
    """Letters that may be prepended to keep the enumeration canonical."""
    return range(min(_min_letter(m), limit - 1) + 1)


def monomial_layers(n: int, up_to: int):
    """Yield (degree, list of exponent tuples) for degrees 0..up_to."""
    layer = [(0,) * n]
    yield 0, layer
    for q in range(1, up_to + 1):
        nxt = []
        for m in layer:
            for i in _extensions(m, n):
                nxt.append(m[:i] + (m[i] + 1,) + m[i + 1:])
        layer = nxt
        yield q, layer


def is_r_commutative_at(t: MatrixTuple, v: Vector, r: int) -> bool:
    """Every word of length <= r applied to v matches its sorted form.

    One-step criterion: for each canonical evaluation value(m) with deg m
    <= r-1 and each letter i, M_i value(m) must equal value(m + e_i).  For
    i at most the smallest letter of m this holds by construction, so only
    the out-of-order letters are tested.
    """
    if r <= 1:
        return True
    ev = WordEvaluations(t, v)
    for q, layer in monomial_layers(t.n, r - 1):
        for m in layer:
            lo = _min_letter(m)
            for i in range(lo + 1, t.n):
                lhs = t.mats[i].matvec(ev.value(m))
                target = m[:i] + (m[i] + 1,) + m[i + 1:]
                if not _vec_equal(lhs, ev.value(target), t.backend):
                    return False
    return True


def _vec_equal(u: Vector, w: Vector, backend: str) -> bool:
    if backend == "exact":
        return all(a == b for a, b in zip(u, w))
    return bool(np.allclose(u, w))


def is_r_commutative_on(t: MatrixTuple, s: Subspace, r: int) -> bool:
    """Basis check; word reordering defects are linear in the vector."""
    return all(is_r_commutative_at(t, list(b), r) for b in s.basis)


def r_commutative_core(t: MatrixTuple, r: int, budget: int | None = None) -> Subspace:
    """A subspace on which the tuple is r-commutative.

    Constraints are accumulated as row functionals: start with the rows of
    every pairwise commutator, then repeatedly multiply the current
    constraint rows by each member on the right (the preimage refinement).
    k refinement rounds force words of length k+2 to commute, so r-2 rounds
    are enough for length r; the budget (default r) caps the rounds.
    """
    if t.backend != "exact":
        raise DimensionError("the commutative core needs the exact backend")
    if r <= 1 or t.n == 1:
        return Subspace.full(t.d)
    rows = SpanBuilder(t.d)
    for i in range(t.n):
        for j in range(i + 1, t.n):
            c = commutator(t.mats[i], t.mats[j])
            for row in c.data:
                rows.insert(list(row))
    cap = max(0, r - 2)
    if budget is not None:
        cap = min(cap, budget)
    for _ in range(cap):
        if rows.dim >= t.d:
            break
        cur = [list(row) for row in rows.rows]
        added = False
        for row in cur:
            for m in t.mats:
                added |= rows.insert(_row_times_mat(row, m))
        if not added:
            break
    if rows.dim == 0:
        return Subspace.full(t.d)
    return kernel(MatrixExact(rows.rows))


def _row_times_mat(row: Vector, m: MatrixExact) -> Vector:
    out = []
    for j in range(m.cols):
        acc = Scalar(0)
        for tt in range(m.rows):
            a = row[tt]
            if not a.is_zero():
                acc = acc + a * m.data[tt][j]
        out.append(acc)
    return out
