"""Greedy packing of orthogonal regular balls and reassembly of the tuple.

The working state is a nested pair of subspaces A inside B: roots are drawn
from A, where the tuple commutes to the scheduled margin, and corrections
may act on B.  Each round packs pairwise orthogonal regular balls rooted in
A at one radius, the pair then shrinks past the packed balls and their
enlargements, and the next round continues at a smaller radius.  Assembly
compresses every member onto the packed balls, where the local models are
simultaneously diagonal, so the corrected tuple commutes exactly and the
rank distance to the input is controlled by the uncovered dimension plus
the top filtration layers.

Orthogonality of the packed balls is arranged by blocking: an accepted ball
of radius R blocks the grown span B(x, 2R), and a saturated ball blocks its
own invariant span.  A saturated ball of radius above every capped radius
seen so far would break the pairing argument between a long word on one
side and a short one on the other, so such balls are cut back to the round
radius and the offending radius is remembered as a cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ballspace import (
    DEFAULT_GB_BUDGET,
    BallSpace,
    RegularBall,
    check_regular,
    grow_ball,
)
from .diagonalize import (
    SeparationError,
    build_local_model,
    find_separating_points,
    verify_local_model,
)
from .linalg import (
    MatrixExact,
    MatrixFloat,
    Scalar,
    Subspace,
    Vector,
    mpq,
    vec_dot,
)
from .polyring import BudgetError
from .tuples import (
    MatrixTuple,
    commutator_defect,
    r_commutative_core,
    rank_distance,
    star_close,
)


class PipelineError(Exception):
    """Failure of a pipeline stage; may carry the partial packing."""

    def __init__(self, message: str, partial=None, ball_index: int | None = None):
        super().__init__(message)
        self.partial = partial
        self.ball_index = ball_index


@dataclass
class Schedule:
    """Round radii (strictly decreasing, each at least 1), an optional
    commutativity margin override, and an optional advisory target."""

    radii: tuple[int, ...] = (8, 4, 2)
    margin: int | None = None
    target: float | None = None

    def __post_init__(self):
        self.radii = tuple(int(r) for r in self.radii)
        if not self.radii:
            raise PipelineError("empty radius schedule")
        if any(r < 1 for r in self.radii):
            raise PipelineError("radii must be at least 1")
        if any(a <= b for a, b in zip(self.radii, self.radii[1:])):
            raise PipelineError("radii must decrease strictly")
        if self.margin is not None and self.margin < 2 * self.radii[0]:
            raise PipelineError("margin must cover twice the first radius")

    @property
    def commutativity_margin(self) -> int:
        if self.margin is not None:
            return self.margin
        return 2 * self.radii[0] + 2


def schedule_check(schedule: Schedule, n: int) -> dict:
    """Advisory budget of a schedule for an n-member tuple; never enforced.

    Each round covers at least an exp(-n) fraction of what is left, so k
    rounds leave a residual fraction at most (1 - exp(-n))^k, quoted here
    with the customary k-fold slack, together with the exact slack budget
    the shrinking steps may consume.
    """
    k = len(schedule.radii)
    residual = k * (1.0 - math.exp(-float(n))) ** k
    slack = mpq(0)
    for radius, gap in zip(schedule.radii, schedule.radii[1:]):
        slack += mpq(n, radius) * (2 ** gap)
    meets = None
    if schedule.target is not None:
        meets = residual + float(slack) <= schedule.target
    return {
        "rounds": k,
        "margin": schedule.commutativity_margin,
        "residual_fraction": residual,
        "slack_budget": float(slack),
        "meets_target": meets,
    }


class CommutativePair:
    """Nested subspaces A inside B with their normalized dimension gap."""

    __slots__ = ("inner", "outer", "slack")

    def __init__(self, inner: Subspace, outer: Subspace, slack):
        self.inner = inner
        self.outer = outer
        self.slack = slack

    @staticmethod
    def make(inner: Subspace, outer: Subspace) -> "CommutativePair":
        if inner.ambient_dim != outer.ambient_dim:
            raise PipelineError("pair subspaces live in different ambient spaces")
        if not outer.contains_subspace(inner):
            raise PipelineError("inner subspace is not contained in the outer one")
        gap = mpq(outer.dim - inner.dim, inner.ambient_dim)
        return CommutativePair(inner, outer, gap)

    def __repr__(self):
        return f"CommutativePair(inner={self.inner.dim}, outer={self.outer.dim}, slack={self.slack})"


def _fresh_records() -> dict:
    return {"rounds": [], "exclusions": [], "assertions": [], "dropped": [], "escalations": 0}


class MultiBallspace:
    """Pairwise orthogonal regular balls with their grown blocking spans."""

    __slots__ = ("d", "balls", "grown", "records", "_span", "_orth")

    def __init__(self, d: int, balls, grown, records: dict | None = None):
        if len(balls) != len(grown):
            raise PipelineError("one grown span per ball")
        self.d = d
        self.balls = list(balls)
        self.grown = list(grown)
        self.records = records if records is not None else _fresh_records()
        self._span = None
        self._orth = None

    @property
    def coverage(self):
        return mpq(sum(rb.dim for rb in self.balls), self.d)

    def span(self) -> Subspace:
        if self._span is None:
            s = Subspace.zero(self.d)
            for rb in self.balls:
                s = s.add(rb.ball.subspace())
            self._span = s
        return self._span

    def verify_orthogonality(self) -> bool:
        """Exact pairwise check of the ball Gram cross blocks."""
        if self._orth is None:
            ok = True
            for j in range(len(self.balls)):
                for k in range(j + 1, len(self.balls)):
                    for u in self.balls[j].ball.vectors:
                        for v in self.balls[k].ball.vectors:
                            if not vec_dot(u, v).is_zero():
                                ok = False
            self._orth = ok
        return self._orth

    def remove(self, index: int):
        del self.balls[index]
        del self.grown[index]
        self._span = None
        self._orth = None

    def report(self) -> dict:
        return {
            "coverage": str(self.coverage),
            "balls": [rb.report() for rb in self.balls],
            "records": self.records,
        }

    def __repr__(self):
        return f"MultiBallspace(balls={len(self.balls)}, coverage={self.coverage})"


# ---------------------------------------------------------------------------
# greedy packing


class _PackState:
    __slots__ = ("blocked", "sat_cap")

    def __init__(self, d: int):
        self.blocked = Subspace.zero(d)
        self.sat_cap: int | None = None


def _probe_root(t: MatrixTuple, root: Vector, radius: int, state: _PackState, gb_budget: int):
    """Grow at the root, cut back when the saturation cap demands it, and
    decide regularity; one escalation enlarges the growth cap and retries."""
    grown = grow_ball(t, root, 2 * radius)
    escalated = 0
    while True:
        if grown.saturated and (state.sat_cap is None or grown.radius <= state.sat_cap):
            ball = grown
        else:
            ball = grown.restrict(radius)
        verdict = check_regular(t, root, ball.radius, ball=ball, gb_budget=gb_budget)
        if verdict or escalated or grown.saturated:
            return ball, grown, verdict, escalated
        escalated = 1
        grown = grow_ball(t, root, 2 * radius + 4, from_ball=grown)


def _pack_round(t: MatrixTuple, space: Subspace, radius: int, state: _PackState,
                gb_budget: int, records: dict):
    accepted: list[RegularBall] = []
    grown_list: list[BallSpace] = []
    avail = space
    free = avail.intersect(state.blocked.orth_complement())
    free_start = free.dim
    exclusions_before = len(records["exclusions"])
    while not free.is_zero():
        root = list(free.basis[0])
        ball, grown, verdict, escalated = _probe_root(t, root, radius, state, gb_budget)
        records["escalations"] += escalated
        if verdict:
            accepted.append(verdict)
            grown_list.append(grown)
            block = grown if ball.saturated else grown.restrict(2 * radius)
            state.blocked = state.blocked.add(block.subspace())
            if not ball.saturated and (state.sat_cap is None or radius < state.sat_cap):
                state.sat_cap = radius
        else:
            records["exclusions"].append(
                {"radius": radius, "diagnosis": verdict.diagnosis, "detail": verdict.detail}
            )
            avail = avail.intersect(Subspace.span([root]).orth_complement())
        free = avail.intersect(state.blocked.orth_complement())
    covered = sum(rb.dim for rb in accepted)
    if free_start and len(records["exclusions"]) == exclusions_before:
        # every grown span costs at most an e^n factor over its ball, so the
        # greedy covers at least an exp(-n) fraction; checked against the
        # slightly stronger rational constant 100000/271828
        ok = mpq(covered) * (271828 ** t.n) >= mpq(free_start) * (100000 ** t.n)
        records["assertions"].append(
            {"name": "bootstrap_coverage", "ok": bool(ok), "radius": radius,
             "covered": covered, "available": free_start}
        )
        if not ok:
            raise PipelineError("greedy packing covered less than the guaranteed fraction")
    return accepted, grown_list


def greedy_pack(t: MatrixTuple, space: Subspace, radius: int,
                gb_budget: int = DEFAULT_GB_BUDGET) -> list[RegularBall]:
    """Pack pairwise orthogonal regular balls of one radius rooted in the
    given subspace until no admissible root is left.

    Roots are the first canonical basis vector of what remains; a root
    whose ball stays irregular after one escalation is excluded and its
    line never retried.  Exclusion-free packings cover at least an
    exp(-n) fraction of the root space.
    """
    if t.backend != "exact":
        raise PipelineError("packing works over the exact backend")
    if space.ambient_dim != t.d:
        raise PipelineError("root space dimension does not match the tuple")
    balls, _ = _pack_round(t, space, radius, _PackState(t.d), gb_budget, _fresh_records())
    return balls


# ---------------------------------------------------------------------------
# shrinking


def shrink_pair(pair: CommutativePair, w: MultiBallspace, r: int,
                gb_budget: int = DEFAULT_GB_BUDGET, records: dict | None = None) -> CommutativePair:
    """Shrink the pair past the packed balls: the outer space drops the ball
    spans, the inner space drops the balls enlarged by the next radius r.

    The slack may grow by at most (n/R) 2^r, with R the smallest ball
    radius; the bound is checked exactly and a violation raises.  Each
    enlarged ball must itself be regular, and a failure there names the
    offending ball so the caller can drop it.
    """
    if r < 0:
        raise PipelineError("negative enlargement gap")
    if not w.balls:
        return CommutativePair(pair.inner, pair.outer, pair.slack)
    d = pair.inner.ambient_dim
    enlarged_span = Subspace.zero(d)
    for k, (rb, gr) in enumerate(zip(w.balls, w.grown)):
        if rb.ball.saturated:
            # invariant span: the enlargement adds nothing and stays regular
            enlarged_span = enlarged_span.add(rb.ball.subspace())
            continue
        tup = rb.ball.tup
        target = rb.ball.radius + r
        if gr.radius >= target or gr.saturated:
            enl = gr.restrict(target)
        else:
            enl = grow_ball(tup, rb.ball.root, target, from_ball=gr)
        verdict = check_regular(tup, rb.ball.root, enl.radius, ball=enl, gb_budget=gb_budget)
        if not verdict:
            raise PipelineError(
                f"enlarging the radius-{rb.ball.radius} ball to {enl.radius} "
                f"loses regularity ({verdict.diagnosis})",
                ball_index=k,
            )
        enlarged_span = enlarged_span.add(enl.subspace())
    outer = pair.outer.intersect(w.span().orth_complement())
    inner = pair.inner.intersect(enlarged_span.orth_complement())
    out = CommutativePair.make(inner, outer)
    n = w.balls[0].ball.tup.n
    rmin = min(rb.ball.radius for rb in w.balls)
    bound = pair.slack + mpq(n, rmin) * (2 ** r)
    ok = out.slack <= bound
    if records is not None:
        records["assertions"].append(
            {"name": "slack_bound", "ok": bool(ok), "slack_in": str(pair.slack),
             "slack_out": str(out.slack), "bound": str(bound)}
        )
    if not ok:
        raise PipelineError(
            f"pair slack {out.slack} exceeded its budget {bound} after shrinking"
        )
    return out


# ---------------------------------------------------------------------------
# the multi-round builder


def build_multiballspace(t: MatrixTuple, schedule: Schedule | None = None,
                         gb_budget: int = DEFAULT_GB_BUDGET) -> MultiBallspace:
    """Run the scheduled rounds against a star-closed exact tuple.

    One commutative core is computed up front at the schedule's margin and
    feeds every round.  A ball whose enlargement fails its regularity check
    during shrinking is dropped (recorded, never fatal); a violated slack
    or coverage bound raises with the partial packing attached.
    """
    if t.backend != "exact":
        raise PipelineError("the pipeline runs over the exact backend")
    schedule = schedule if schedule is not None else Schedule()
    d = t.d
    records = _fresh_records()
    core = r_commutative_core(t, schedule.commutativity_margin)
    records["core_dim"] = core.dim
    pair = CommutativePair.make(core, Subspace.full(d))
    state = _PackState(d)
    balls: list[RegularBall] = []
    grown: list[BallSpace] = []
    for idx, radius in enumerate(schedule.radii):
        try:
            got_balls, got_grown = _pack_round(t, pair.inner, radius, state, gb_budget, records)
        except PipelineError as err:
            err.partial = MultiBallspace(d, balls, grown, records)
            raise
        records["rounds"].append(
            {"radius": radius, "balls": len(got_balls),
             "covered": sum(rb.dim for rb in got_balls)}
        )
        if idx + 1 == len(schedule.radii):
            balls.extend(got_balls)
            grown.extend(got_grown)
            break
        round_w = MultiBallspace(d, got_balls, got_grown)
        gap = schedule.radii[idx + 1]
        while True:
            try:
                pair = shrink_pair(pair, round_w, gap, gb_budget=gb_budget, records=records)
                break
            except PipelineError as err:
                if err.ball_index is None:
                    balls.extend(round_w.balls)
                    grown.extend(round_w.grown)
                    err.partial = MultiBallspace(d, balls, grown, records)
                    raise
                victim = round_w.balls[err.ball_index]
                records["dropped"].append(
                    {"stage": "enlargement", "radius": victim.ball.radius,
                     "dim": victim.dim, "reason": str(err)}
                )
                round_w.remove(err.ball_index)
        balls.extend(round_w.balls)
        grown.extend(round_w.grown)
    w = MultiBallspace(d, balls, grown, records)
    ok = w.verify_orthogonality()
    records["assertions"].append({"name": "orthogonality", "ok": ok})
    if not ok:
        raise PipelineError("packed balls are not pairwise orthogonal", partial=w)
    return w


# ---------------------------------------------------------------------------
# assembly


class CorrectionResult:
    """Corrected tuple in factored and dense form, with the run's metrics.

    The canonical output is the factored one: per ball a local model whose
    diagonal eigenvalue tables commute entrywise, together with the exact
    projection onto the packed span.  The dense members are the compressed
    operators summed over balls; they commute exactly because distinct
    balls are orthogonal and each local pair shares its diagonalization.
    """

    __slots__ = ("corrected", "corrected_closed", "models", "pi", "metrics", "reports")

    def __init__(self, corrected, corrected_closed, models, pi, metrics, reports):
        self.corrected = corrected
        self.corrected_closed = corrected_closed
        self.models = models
        self.pi = pi
        self.metrics = metrics
        self.reports = reports

    @property
    def distance(self):
        return self.metrics["distance"]

    def to_json(self, include_dense: bool = False) -> dict:
        out = {
            "metrics": _jsonable(self.metrics),
            "reports": _jsonable(self.reports),
            "models": [m.to_json() for m in self.models],
        }
        if include_dense:
            out["corrected"] = self.corrected.to_json()
            out["pi"] = self.pi.to_json()
        return out

    def __repr__(self):
        return f"CorrectionResult(distance={float(self.metrics['distance']):.6g}, coverage={self.metrics['coverage']})"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, type(mpq(0))):
        return str(obj)
    if isinstance(obj, Scalar):
        return list(obj.pair_strings())
    return obj


def _embedding(ball: BallSpace) -> MatrixExact:
    return MatrixExact([[ball.vectors[k][i] for k in range(ball.dim)] for i in range(ball.tup.d)])


def _pseudo_inverse(e: MatrixExact) -> MatrixExact:
    if e.rows == e.cols:
        return e.inverse()
    g = e.adjoint() @ e
    if g == MatrixExact.identity(g.rows):
        return e.adjoint()
    return g.inverse() @ e.adjoint()


def _top_layer(ball: BallSpace) -> int:
    dims = ball.layer_dims
    return dims[-1] - (dims[-2] if len(dims) > 1 else 0)


def assemble(t: MatrixTuple, w: MultiBallspace, *, seed: int = 0, tol: float = 1e-8,
             report_n: int | None = None) -> CorrectionResult:
    """Separating points and a local model on every ball, then the members
    compressed onto the packed span.

    A ball whose spectrum cannot be separated, or whose model fails its
    verification, is dropped and recorded; the remaining balls still give
    an exactly commuting output.  Everything is assembled exactly when all
    the variety points were reconstructed exactly, otherwise in floats.
    """
    if t.backend != "exact":
        raise PipelineError("assembly starts from the exact backend")
    d = t.d
    nn = t.n
    report_n = nn if report_n is None else report_n
    if not 1 <= report_n <= nn:
        raise PipelineError("report size must name a prefix of the members")
    models = []
    used: list[RegularBall] = []
    reports = []
    dropped = list(w.records.get("dropped", []))
    for j, rb in enumerate(w.balls):
        mult = None
        if rb.restricted is not None and rb.ideal.is_zero_dimensional() \
                and len(rb.ideal.quotient_basis()) == rb.dim:
            mult = rb.restricted
        try:
            points = find_separating_points(
                rb.ideal, rb.dim, monomials=rb.staircase, seed=seed + j, mult_matrices=mult
            )
            model = build_local_model(rb, points)
        except (SeparationError, BudgetError) as err:
            dropped.append({"ball": j, "stage": "separation", "reason": str(err)})
            continue
        verdict = verify_local_model(model)
        if not verdict["ok"]:
            failed = [k for k, v in verdict.items() if k.endswith("_ok") and not v]
            dropped.append({"ball": j, "stage": "verification", "reason": ",".join(failed)})
            continue
        models.append(model)
        used.append(rb)
        reports.append({"ball": rb.report(), "model": verdict})

    frames = []
    for rb in used:
        e = _embedding(rb.ball)
        frames.append((e, _pseudo_inverse(e)))

    pi = MatrixExact.zero(d)
    for e, pinv in frames:
        pi = pi + (e @ pinv)

    exact_out = all(m.backend == "exact" for m in models)
    if exact_out:
        mats = [MatrixExact.zero(d) for _ in range(nn)]
        for (e, pinv), model in zip(frames, models):
            for i in range(nn):
                mats[i] = mats[i] + (e @ model.assembled(i) @ pinv)
        out_mats = mats
    else:
        arrays = [np.zeros((d, d), dtype=np.complex128) for _ in range(nn)]
        for (e, pinv), model in zip(frames, models):
            ef = e.to_float().array
            pf = pinv.to_float().array
            for i in range(nn):
                a = model.assembled(i)
                af = a.to_float().array if isinstance(a, MatrixExact) else np.asarray(a)
                arrays[i] += ef @ af @ pf
        out_mats = [MatrixFloat(a) for a in arrays]

    corrected_closed = MatrixTuple(out_mats, ["general"] * nn, check=False)
    corrected = MatrixTuple(out_mats[:report_n], ["general"] * report_n, check=False)
    t_report = MatrixTuple(list(t.mats[:report_n]), list(t.flags[:report_n]), check=False)
    if exact_out:
        distance = rank_distance(t_report, corrected)
    else:
        distance = rank_distance(t_report.to_float(), corrected, tol)

    coverage = mpq(sum(rb.dim for rb in used), d)
    top_layer = mpq(sum(_top_layer(rb.ball) for rb in used), d)
    assertions = list(w.records.get("assertions", []))

    macaulay_ok = True
    for rb in used:
        radius = rb.ball.radius
        top = _top_layer(rb.ball)
        if radius >= 1:
            lower = rb.ball.layer_dims[radius - 1]
            if mpq(top) > mpq(t.n, radius) * lower:
                macaulay_ok = False
    assertions.append({"name": "top_layer_growth", "ok": macaulay_ok})

    orthogonal = w.verify_orthogonality()
    factored_zero = orthogonal
    for model in models:
        for i in range(nn):
            for j in range(i + 1, nn):
                for x in model.eigenvalue_commutator(i, j):
                    zero = x.is_zero() if isinstance(x, Scalar) else x == 0
                    if not zero:
                        factored_zero = False

    budget = (1 - coverage) + top_layer
    if exact_out:
        accounting_ok = distance <= budget
    else:
        accounting_ok = distance <= float(budget) + 1e-9
    assertions.append(
        {"name": "top_layer_accounting", "ok": bool(accounting_ok),
         "distance": str(distance), "budget": str(budget)}
    )

    output_defect = commutator_defect(corrected_closed.to_float(), tol)

    metrics = {
        "backend": "exact" if exact_out else "float",
        "coverage": coverage,
        "distance": distance,
        "distance_float": float(distance),
        "top_layer": top_layer,
        "ball_count": len(used),
        "dropped": dropped,
        "exclusions": list(w.records.get("exclusions", [])),
        "factored_commutators_zero": factored_zero,
        "output_defect": output_defect,
        "assertions": assertions,
    }
    return CorrectionResult(corrected, corrected_closed, models, pi, metrics, reports)


# ---------------------------------------------------------------------------
# the full correction


def _lift_exact(t: MatrixTuple) -> MatrixTuple:
    mats = []
    for m in t.mats:
        arr = m.array
        rows = [
            [Scalar(mpq(float(arr[i, j].real)), mpq(float(arr[i, j].imag))) for j in range(t.d)]
            for i in range(t.d)
        ]
        mats.append(MatrixExact(rows))
    return MatrixTuple(mats, t.flags, check=False)


def correct(t: MatrixTuple, schedule: Schedule | None = None, *, tol: float = 1e-8,
            unsafe_general: bool = False, seed: int = 0,
            gb_budget: int = DEFAULT_GB_BUDGET) -> CorrectionResult:
    """Correct an almost commuting tuple to an exactly commuting one.

    The input members must be flagged unitary or self adjoint unless
    unsafe_general consents to skip that guard.  Float inputs are lifted
    exactly to rationals, the tuple is closed under adjoints, the balls
    are packed and shrunk per the schedule, and the result is reported on
    the original members with the adjoined adjoints kept internal.
    """
    schedule = schedule if schedule is not None else Schedule()
    if not unsafe_general:
        bad = [f for f in t.flags if f not in ("unitary", "selfadjoint")]
        if bad:
            raise PipelineError(
                "members must be unitary or self adjoint (pass unsafe_general=True to override)"
            )
    work = t if t.backend == "exact" else _lift_exact(t)
    closed = star_close(work)
    w = build_multiballspace(closed, schedule, gb_budget=gb_budget)
    result = assemble(closed, w, seed=seed, tol=tol, report_n=t.n)
    result.metrics["input_defect"] = commutator_defect(work)
    result.metrics["schedule"] = list(schedule.radii)
    result.metrics["margin"] = schedule.commutativity_margin
    result.metrics["core_dim"] = w.records.get("core_dim")
    result.metrics["closed_n"] = closed.n
    return result
