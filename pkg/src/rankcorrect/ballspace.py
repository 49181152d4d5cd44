"""Ballspaces: Krylov-style spans of sorted-word evaluations at a root.

B(w, R) is the span of the canonical (sorted-word) evaluations of all
monomials of degree at most R at the root w.  A ball carries a staircase of
pivot monomials chosen greedily by degree then grevlex order, the vanishing
relations of the root give an ideal, and check_regular decides whether the
ball is linearly isomorphic, compatibly with the operator action, to the
degree-filtered quotient by that ideal.

Regularity is decided by direct verification, never by trusting a
commutativity certificate: invariance, restricted commutation, dimension
match, intertwining, and reducedness are each checked exactly, and the
diagnosis names the first one that fails.
"""

from __future__ import annotations

from dataclasses import dataclass

from .linalg import (
    MatrixExact,
    Scalar,
    TrackedSpan,
    Vector,
    kernel,
    vec_is_zero,
)
from .polyring import (
    BudgetError,
    Ideal,
    Monomial,
    Poly,
    mono_var,
    monomials_up_to,
    poly_to_text,
)
from .tuples import MatrixTuple, WordEvaluations, is_r_commutative_at, monomial_layers

S0 = Scalar(0)
S1 = Scalar(1)

DEFAULT_GB_BUDGET = 4000


class BallError(Exception):
    pass


class BallSpace:
    """Monomial-labelled basis of a ball, with coordinates in that basis."""

    __slots__ = ("tup", "root", "radius", "labels", "vectors", "layer_dims", "saturated", "_span", "_evals")

    def __init__(self, tup, root, radius, labels, vectors, layer_dims, saturated, span, evals):
        self.tup = tup
        self.root = root
        self.radius = radius
        self.labels = labels
        self.vectors = vectors
        self.layer_dims = layer_dims
        self.saturated = saturated
        self._span = span
        self._evals = evals

    @property
    def dim(self) -> int:
        return len(self.labels)

    def staircase(self) -> list[Monomial]:
        return list(self.labels)

    def coordinates(self, v: Vector) -> Vector | None:
        return self._span.coordinates(v)

    def contains(self, v: Vector) -> bool:
        return self._span.contains(v)

    def subspace(self):
        return self._span.subspace()

    def restrict(self, radius: int) -> "BallSpace":
        """The sub-ball B(w, radius) reusing the computed evaluations."""
        if radius >= self.radius:
            return self
        labels = [m for m in self.labels if m.degree <= radius]
        vectors = self.vectors[: len(labels)]
        span = TrackedSpan(self.tup.d)
        for v in vectors:
            span.insert(v)
        dims = self.layer_dims[: radius + 1]
        return BallSpace(self.tup, self.root, radius, labels, vectors, dims, False, span, self._evals)

    def __repr__(self):
        return f"BallSpace(radius={self.radius}, dim={self.dim}, saturated={self.saturated})"


def _grow(t: MatrixTuple, root: Vector, limit: int, adaptive: bool, evals=None) -> BallSpace:
    if t.backend != "exact":
        raise BallError("ballspaces are built over the exact backend")
    if vec_is_zero(root):
        raise BallError("zero root")
    evals = evals or WordEvaluations(t, root)
    span = TrackedSpan(t.d)
    labels: list[Monomial] = []
    vectors: list[Vector] = []
    layer_dims: list[int] = []
    saturated = False
    radius = limit
    for deg, layer in monomial_layers(t.n, limit):
        added = 0
        for mono in sorted(Monomial(m) for m in layer):
            v = evals.value(mono.exps)
            if span.insert(v):
                labels.append(mono)
                vectors.append(list(v))
                added += 1
        layer_dims.append(span.dim)
        if span.dim == t.d:
            # The span is everything, so the next layer is empty and the
            # span is invariant; stop without evaluating further words.
            saturated = True
            radius = deg + 1 if adaptive else limit
            while len(layer_dims) < radius + 1:
                layer_dims.append(span.dim)
            break
        if adaptive and deg > 0 and added == 0 and _span_invariant(t, vectors, span):
            saturated = True
            radius = deg
            break
    else:
        if _span_invariant(t, vectors, span):
            saturated = True
    return BallSpace(t, list(root), radius, labels, vectors, layer_dims, saturated, span, evals)


def _span_invariant(t: MatrixTuple, vectors, span: TrackedSpan) -> bool:
    return all(span.contains(m.matvec(v)) for m in t.mats for v in vectors)


def build_ball(t: MatrixTuple, root: Vector, radius: int) -> BallSpace:
    """B(root, radius) with the full canonical monomial enumeration."""
    if radius < 0:
        raise BallError("negative radius")
    return _grow(t, root, radius, adaptive=False)


def grow_ball(t: MatrixTuple, root: Vector, cap: int, from_ball: BallSpace | None = None) -> BallSpace:
    """Grow until a whole degree layer adds nothing and the span is invariant
    under every member (saturation), or until the cap.  The radius reported
    for a saturated ball is the first unproductive degree, so the vanishing
    relations at that radius contain the full border of the staircase and
    the top filtration layer of a saturated ball is empty."""
    evals = from_ball._evals if from_ball is not None else None
    return _grow(t, root, cap, adaptive=True, evals=evals)


def restricted_matrices(t: MatrixTuple, ball: BallSpace) -> list[MatrixExact] | None:
    """Members expressed in the ball basis, or None if the ball is not
    invariant under some member."""
    cols_per_mat = []
    for m in t.mats:
        cols = []
        for v in ball.vectors:
            c = ball.coordinates(m.matvec(v))
            if c is None:
                return None
            cols.append(c)
        cols_per_mat.append(cols)
    dim = ball.dim
    return [MatrixExact([[cols[k][r] for k in range(dim)] for r in range(dim)]) for cols in cols_per_mat]


# ---------------------------------------------------------------------------
# vanishing relations


@dataclass
class VanishingRelations:
    root: Vector
    radius: int
    nvars: int
    relations: list[Poly]

    def ideal(self, budget: int = DEFAULT_GB_BUDGET) -> Ideal:
        return Ideal(self.nvars, self.relations, budget=budget)


def vanishing_relations(t: MatrixTuple, root: Vector, radius: int, strict: bool = False) -> VanishingRelations:
    """Basis of the degree-<=radius polynomials killing the root.

    Kernel of the linear evaluation map from coefficient space to C^d; the
    strict flag additionally demands the root be radius-commutative, which
    is the hypothesis under which the relations behave like an ideal slice.
    """
    if vec_is_zero(root):
        raise BallError("zero root")
    if strict and not is_r_commutative_at(t, root, radius):
        raise BallError("root is not commutative to the requested radius")
    evals = WordEvaluations(t, root)
    rels = _relations_from_evals(evals, t.n, radius, t.d)
    return VanishingRelations(list(root), radius, t.n, rels)


def _relations_from_evals(evals: WordEvaluations, n: int, radius: int, d: int) -> list[Poly]:
    mons = monomials_up_to(n, radius)
    cols = [evals.value(m.exps) for m in mons]
    eval_matrix = MatrixExact([[cols[j][i] for j in range(len(mons))] for i in range(d)])
    ker = kernel(eval_matrix)
    out = []
    for row in ker.basis:
        out.append(Poly(n, {m: c for m, c in zip(mons, row) if not c.is_zero()}))
    return out


# ---------------------------------------------------------------------------
# regularity


@dataclass
class NotRegular:
    """Verdict value naming the first regularity condition that failed."""

    diagnosis: str
    detail: str = ""

    def __bool__(self):
        return False


class RegularBall:
    """A ball together with its relation ideal and the label isomorphism."""

    __slots__ = ("ball", "ideal", "staircase", "restricted")

    def __init__(self, ball: BallSpace, ideal: Ideal, staircase: list[Monomial], restricted):
        self.ball = ball
        self.ideal = ideal
        self.staircase = staircase
        self.restricted = restricted

    def __bool__(self):
        return True

    @property
    def dim(self) -> int:
        return self.ball.dim

    def phi(self, v: Vector) -> Poly | None:
        """Ball vector to its quotient class, written on the staircase."""
        coords = self.ball.coordinates(v)
        if coords is None:
            return None
        return Poly(self.ideal.nvars, {m: c for m, c in zip(self.staircase, coords) if not c.is_zero()})

    def phi_inverse(self, p: Poly) -> Vector:
        nf = self.ideal.normal_form(p)
        index = {m: k for k, m in enumerate(self.staircase)}
        out = [S0] * self.ball.tup.d
        for m, c in nf.terms.items():
            k = index.get(m)
            if k is None:
                raise BallError(f"class of {m!r} lies outside the degree window")
            v = self.ball.vectors[k]
            out = [a + c * b for a, b in zip(out, v)]
        return out

    def multiplication_matrix(self, i: int) -> MatrixExact:
        """Multiplication by X_i on the quotient, in staircase coordinates.

        For an invariant ball this is the restricted member itself; the
        fallback recomputes it through normal forms.
        """
        if self.restricted is not None:
            return self.restricted[i]
        return self.ideal.multiplication_matrix(i)

    def report(self) -> dict:
        ball = self.ball
        return {
            "radius": ball.radius,
            "dim": ball.dim,
            "saturated": ball.saturated,
            "regular": True,
            "diagnosis": None,
            "ideal": [poly_to_text(g) for g in self.ideal.groebner()],
            "filtration_dims": self.ideal.filtration_dims(ball.radius).dims,
        }


def failure_report(ball: BallSpace, verdict: NotRegular) -> dict:
    return {
        "radius": ball.radius,
        "dim": ball.dim,
        "saturated": ball.saturated,
        "regular": False,
        "diagnosis": verdict.diagnosis,
        "detail": verdict.detail,
        "ideal": [],
        "filtration_dims": ball.layer_dims,
    }


def check_regular(
    t: MatrixTuple,
    root: Vector,
    radius: int,
    ball: BallSpace | None = None,
    gb_budget: int = DEFAULT_GB_BUDGET,
) -> RegularBall | NotRegular:
    """Decide regularity of B(root, radius); failures are values.

    Checks, in order: the relation ideal's standard monomials of degree at
    most R number exactly dim B (and are the ball labels), multiplication
    intertwines with the members on the next-lower layer, and no standard
    monomial lies in the radical without lying in the ideal.
    """
    if ball is None:
        ball = build_ball(t, root, radius)
    else:
        radius = ball.radius
    rels = _relations_from_evals(ball._evals, t.n, radius, t.d)

    restricted = restricted_matrices(t, ball)
    ideal = None
    if restricted is not None and _pairwise_commute(restricted) and _is_order_ideal(ball.labels):
        ideal = _border_ideal(ball, restricted, rels)
    if ideal is None:
        restricted_for_model = restricted if restricted is not None and _pairwise_commute(restricted) else None
        try:
            ideal = Ideal(t.n, rels, budget=gb_budget)
            ideal.groebner()
        except BudgetError as e:
            return NotRegular("budget", str(e))
    else:
        restricted_for_model = restricted

    # (a) bijective labelling
    try:
        std = ideal.standard_monomials_up_to(radius)
    except BudgetError as e:
        return NotRegular("budget", str(e))
    if len(std) != ball.dim:
        return NotRegular(
            "dimension",
            f"{len(std)} standard monomials at degree {radius} against ball dimension {ball.dim}",
        )
    if std != ball.labels:
        return NotRegular("dimension", "staircase labels do not match the standard monomials")

    # (b) intertwining on the next-lower layer
    nf_cache = {m: Poly(t.n, {m: S1}) for m in std}
    for k, s in enumerate(ball.labels):
        if s.degree > radius - 1:
            continue
        vs = ball.vectors[k]
        for i in range(t.n):
            u = t.mats[i].matvec(vs)
            coords = ball.coordinates(u)
            if coords is None:
                return NotRegular("intertwining", f"member {i} leaves the ball at label {s!r}")
            lhs = Poly(t.n)
            for c, m in zip(coords, ball.labels):
                if not c.is_zero():
                    lhs = lhs + nf_cache[m].scale(c)
            rhs = ideal.normal_form(Poly(t.n, {s * mono_var(t.n, i): S1}))
            if lhs != rhs:
                return NotRegular("intertwining", f"label {s!r}, variable {i + 1}")

    # (c) reducedness
    verdict = reducedness_failure(ideal, radius, std=std)
    if verdict is not None:
        return verdict
    return RegularBall(ball, ideal, std, restricted_for_model)


def reducedness_failure(ideal: Ideal, radius: int, std: list[Monomial] | None = None) -> NotRegular | None:
    """First standard monomial of degree <= radius lying in the radical but
    not the ideal, as a NotRegular verdict; None when there is none.

    A zero-dimensional ideal with squarefree per-variable minimal
    polynomials is radical outright, which settles every query at once;
    otherwise each standard monomial is tested by radical membership.
    """
    if std is None:
        std = ideal.standard_monomials_up_to(radius)
    if ideal.is_zero_dimensional() and ideal.is_radical():
        return None
    for m in std:
        p = Poly(ideal.nvars, {m: S1})
        if ideal.radical_member(p) and not ideal.member(p):
            return NotRegular("reducedness", f"standard monomial {m!r} lies in the radical, not the ideal")
    return None


def _pairwise_commute(mats: list[MatrixExact]) -> bool:
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if mats[i] @ mats[j] != mats[j] @ mats[i]:
                return False
    return True


def _is_order_ideal(labels: list[Monomial]) -> bool:
    lset = set(labels)
    for m in labels:
        for i, e in enumerate(m.exps):
            if e and Monomial(m.exps[:i] + (e - 1,) + m.exps[i + 1 :]) not in lset:
                return False
    return True


def _border_ideal(ball: BallSpace, restricted: list[MatrixExact], rels: list[Poly]) -> Ideal | None:
    """Reduced basis read off the border of an invariant commuting ball.

    Every product of members applied to the root is order-independent here
    (invariance keeps all partial products inside the ball, commutation of
    the restricted members reorders them), so the coordinates of M_i v_s
    are the coefficients of the class of X_i s on the staircase.  The
    border relations with minimal leading terms form the reduced basis;
    the construction is cross-checked by reducing every border relation
    and every kernel relation against it, and None falls back to the
    honest route.
    """
    n = ball.tup.n
    labels = ball.labels
    lset = set(labels)
    border: dict[Monomial, Poly] = {}
    for k, s in enumerate(labels):
        for i in range(n):
            b = s * mono_var(n, i)
            if b in lset or b in border:
                continue
            tail = {labels[r]: restricted[i][r, k] for r in range(ball.dim) if not restricted[i][r, k].is_zero()}
            poly = Poly(n, {b: S1}) - Poly(n, tail)
            border[b] = poly
    minimal = []
    for b, f in border.items():
        if any(other != b and other.divides(b) for other in border):
            continue
        minimal.append(f)
    minimal.sort(key=lambda f: f.lm())
    ideal = Ideal.from_groebner(n, minimal)
    for f in border.values():
        if not ideal.member(f):
            return None
    for f in rels:
        if not ideal.member(f):
            return None
    return ideal
