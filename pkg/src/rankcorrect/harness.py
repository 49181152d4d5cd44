"""Seeded instance generators, the batch experiment runner, and the
verification sweeps driven by the command line interface.

Instances are built over the exact backend so every declared property
(unitarity, self-adjointness, defect bounds) is verified at construction
rather than assumed.  The same spec always reproduces the same tuple
bit for bit; run reports carry named assertion results and render to a
fixed CSV layout for regression diffing.
"""

from __future__ import annotations

import csv
import math
import random
import time
from dataclasses import dataclass

from .ballspace import NotRegular, check_regular, reducedness_failure
from .linalg import MatrixExact, mpq, numerical_rank, sc
from .pipeline import PipelineError, Schedule, build_multiballspace, correct, greedy_pack
from .polyring import (
    BudgetError,
    Ideal,
    Poly,
    macaulay_check,
    membership_by_linear_algebra,
    mono_var,
    monomials_up_to,
)
from .tuples import MatrixTuple, commutator_defect, r_commutative_core, star_close

FAMILIES = ("commuting_plus_noise", "permutation_pair")

CSV_COLUMNS = ("family", "d", "n", "delta_in", "dist_out", "coverage",
               "runtime_ms", "assertions_failed")


class HarnessError(Exception):
    pass


# ---------------------------------------------------------------------------
# generators


def _diag(values) -> MatrixExact:
    d = len(values)
    return MatrixExact.from_rows(
        [[values[i] if i == j else 0 for j in range(d)] for i in range(d)]
    )


def _shift(d: int) -> MatrixExact:
    return MatrixExact.from_rows(
        [[1 if i == (j + 1) % d else 0 for j in range(d)] for i in range(d)]
    )


def _transposition(d: int, i: int, j: int) -> MatrixExact:
    rows = [[1 if a == b else 0 for b in range(d)] for a in range(d)]
    rows[i][i] = rows[j][j] = 0
    rows[i][j] = rows[j][i] = 1
    return MatrixExact.from_rows(rows)


def kron(a: MatrixExact, b: MatrixExact) -> MatrixExact:
    rows = []
    for i in range(a.rows):
        for k in range(b.rows):
            rows.append([a[i, j] * b[k, l] for j in range(a.cols) for l in range(b.cols)])
    return MatrixExact(rows)


def random_orthogonal(d: int, rng: random.Random) -> MatrixExact:
    """Exactly orthogonal rational matrix: the Cayley transform of a sparse
    random integer antisymmetric matrix."""
    s = [[0] * d for _ in range(d)]
    for _ in range(d):
        i, j = rng.randrange(d), rng.randrange(d)
        if i != j:
            v = rng.randrange(-2, 3)
            s[i][j] += v
            s[j][i] -= v
    m = MatrixExact.from_rows(s)
    eye = MatrixExact.identity(d)
    return (eye - m) @ (eye + m).inverse()


def gen_commuting_plus_noise(d: int, n: int = 2, noise_rank: int = 0,
                             seed: int = 0) -> MatrixTuple:
    """Commuting self-adjoint tuple in a random rational orthogonal
    eigenbasis, plus a self-adjoint rank-bounded perturbation on the first
    member.

    The noise directions are sums of two eigenbasis columns, so the
    commutator of the perturbed tuple has rank at most 2*noise_rank and
    the defect is at most 2*noise_rank/d.
    """
    if not 0 <= noise_rank < d:
        raise HarnessError("noise rank must lie in [0, d)")
    if n < 1:
        raise HarnessError("need at least one member")
    rng = random.Random(f"commuting_plus_noise:{d}:{n}:{noise_rank}:{seed}")
    q = random_orthogonal(d, rng)
    mats = []
    for _ in range(n):
        values = [mpq(rng.randrange(1, d + 1), d + 1) for _ in range(d)]
        mats.append(q @ _diag(values) @ q.adjoint())
    if noise_rank:
        if 2 * noise_rank <= d:
            picks = rng.sample(range(d), 2 * noise_rank)
        else:
            picks = [rng.randrange(d) for _ in range(2 * noise_rank)]
        noise = MatrixExact.zero(d)
        for k in range(noise_rank):
            a, b = picks[2 * k], picks[2 * k + 1]
            u = [q[i, a] + q[i, b] for i in range(d)]
            weight = sc(mpq(rng.choice([-1, 1]), rng.randrange(5, 12)))
            bump = MatrixExact(
                [[u[i] * u[j].conj() * weight for j in range(d)] for i in range(d)]
            )
            noise = noise + bump
        mats[0] = mats[0] + noise
    return MatrixTuple(mats, ["selfadjoint"] * n)


def gen_permutation_pair(side: int, defects: int = 0, seed: int = 0) -> MatrixTuple:
    """Commuting torus shifts on a side-by-side grid, with transposition
    defects composed into the first shift.

    Each transposition changes at most two columns, so the commutator
    defect stays at most 4*defects/side^2; both matrices remain exact
    permutation matrices, hence unitary.
    """
    if side < 2:
        raise HarnessError("grid side must be at least 2")
    d = side * side
    if not 0 <= defects < d:
        raise HarnessError("defect count must lie in [0, side^2)")
    rng = random.Random(f"permutation_pair:{side}:{defects}:{seed}")
    p = _shift(side)
    eye = MatrixExact.identity(side)
    u1 = kron(p, eye)
    u2 = kron(eye, p)
    for _ in range(defects):
        i, j = rng.sample(range(d), 2)
        u1 = u1 @ _transposition(d, i, j)
    return MatrixTuple([u1, u2], ["unitary", "unitary"])


# ---------------------------------------------------------------------------
# specs and reports


@dataclass
class InstanceSpec:
    """Deterministic description of one test instance; the same spec
    always builds the same tuple."""

    family: str
    d: int
    n: int = 2
    noise_rank: int = 0
    seed: int = 0
    backend: str = "exact"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise HarnessError(f"unknown family {self.family!r}")
        if self.backend not in ("exact", "float"):
            raise HarnessError("backend must be exact or float")
        if self.family == "permutation_pair":
            side = math.isqrt(self.d)
            if side * side != self.d:
                raise HarnessError("permutation pairs need a square dimension")
            if self.n != 2:
                raise HarnessError("permutation pairs have exactly two members")

    @property
    def declared_defect_bound(self):
        if self.family == "commuting_plus_noise":
            return mpq(2 * self.noise_rank, self.d)
        return mpq(4 * self.noise_rank, self.d)

    def build(self) -> MatrixTuple:
        if self.family == "commuting_plus_noise":
            t = gen_commuting_plus_noise(self.d, self.n, self.noise_rank, self.seed)
        else:
            t = gen_permutation_pair(math.isqrt(self.d), self.noise_rank, self.seed)
        return t.to_float() if self.backend == "float" else t

    def sort_key(self):
        return (self.family, self.d, self.n, self.noise_rank, self.seed, self.backend)

    def to_json(self) -> dict:
        return {"family": self.family, "d": self.d, "n": self.n,
                "noise_rank": self.noise_rank, "seed": self.seed,
                "backend": self.backend}

    @staticmethod
    def from_json(obj: dict) -> "InstanceSpec":
        return InstanceSpec(**obj)


class Report:
    """Outcome of one corrected instance: defect in, distance out,
    coverage, and every named assertion the run checked."""

    __slots__ = ("spec", "delta_in", "distance", "coverage", "assertions",
                 "runtime_ms", "detail", "error")

    def __init__(self, spec, delta_in=None, distance=None, coverage=None,
                 assertions=None, runtime_ms=0, detail=None, error=None):
        self.spec = spec
        self.delta_in = delta_in
        self.distance = distance
        self.coverage = coverage
        self.assertions = assertions if assertions is not None else []
        self.runtime_ms = runtime_ms
        self.detail = detail if detail is not None else {}
        self.error = error

    @property
    def assertions_failed(self) -> int:
        return sum(1 for a in self.assertions if not a.get("ok", True))

    def row(self, stable: bool = False) -> list[str]:
        return [
            self.spec.family,
            str(self.spec.d),
            str(self.spec.n),
            "" if self.delta_in is None else str(self.delta_in),
            "" if self.distance is None else str(self.distance),
            "" if self.coverage is None else str(self.coverage),
            "0" if stable else str(self.runtime_ms),
            str(self.assertions_failed),
        ]

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "delta_in": None if self.delta_in is None else str(self.delta_in),
            "distance": None if self.distance is None else str(self.distance),
            "coverage": None if self.coverage is None else str(self.coverage),
            "assertions": self.assertions,
            "assertions_failed": self.assertions_failed,
            "runtime_ms": self.runtime_ms,
            "detail": self.detail,
            "error": self.error,
        }

    @staticmethod
    def from_json(obj: dict) -> "Report":
        def num(s):
            return None if s is None else mpq(s)

        return Report(
            InstanceSpec.from_json(obj["spec"]),
            num(obj.get("delta_in")),
            num(obj.get("distance")),
            num(obj.get("coverage")),
            obj.get("assertions", []),
            obj.get("runtime_ms", 0),
            obj.get("detail", {}),
            obj.get("error"),
        )


# ---------------------------------------------------------------------------
# the experiment runner


def expand_config(config: dict) -> list[InstanceSpec]:
    specs = [InstanceSpec.from_json(s) for s in config.get("instances", [])]
    grid = config.get("grid")
    if grid:
        for family in grid.get("families", ["commuting_plus_noise"]):
            for d in grid.get("d", [16]):
                for noise in grid.get("noise_rank", [0]):
                    for seed in grid.get("seeds", [0]):
                        specs.append(InstanceSpec(
                            family=family, d=d, n=grid.get("n", 2),
                            noise_rank=noise, seed=seed,
                            backend=grid.get("backend", "exact"),
                        ))
    specs.sort(key=InstanceSpec.sort_key)
    return specs


def run_instance(spec: InstanceSpec, schedule: Schedule | None = None,
                 tol: float = 1e-8) -> Report:
    start = time.monotonic()
    try:
        t = spec.build()
        exact = t if t.backend == "exact" else None
        assertions = []
        if exact is not None:
            delta_in = commutator_defect(exact)
            assertions.append({
                "name": "generator_defect_bound",
                "ok": bool(delta_in <= spec.declared_defect_bound),
                "measured": str(delta_in),
                "bound": str(spec.declared_defect_bound),
            })
            closed_defect = commutator_defect(star_close(exact))
            assertions.append({
                "name": "star_closure_defect",
                "ok": bool(closed_defect <= delta_in),
                "closed": str(closed_defect),
                "open": str(delta_in),
            })
        else:
            delta_in = commutator_defect(t, tol)
        res = correct(t, schedule, tol=tol, seed=spec.seed)
        assertions.extend(res.metrics["assertions"])
        assertions.append({
            "name": "factored_commutators_zero",
            "ok": bool(res.metrics["factored_commutators_zero"]),
        })
        detail = {
            "backend": res.metrics["backend"],
            "ball_count": res.metrics["ball_count"],
            "output_defect": str(res.metrics["output_defect"]),
            "top_layer": str(res.metrics["top_layer"]),
            "dropped": len(res.metrics["dropped"]),
            "exclusions": len(res.metrics["exclusions"]),
        }
        ms = int((time.monotonic() - start) * 1000)
        return Report(spec, delta_in, res.metrics["distance"],
                      res.metrics["coverage"], assertions, ms, detail)
    except (HarnessError, PipelineError, BudgetError) as err:
        ms = int((time.monotonic() - start) * 1000)
        return Report(spec, runtime_ms=ms, error=str(err))


def run_experiment(config: dict) -> list[Report]:
    """Correct every instance of the config grid; a failing instance is
    recorded in its own report and never aborts the batch."""
    schedule = None
    if config.get("schedule"):
        schedule = Schedule(radii=tuple(config["schedule"]))
    tol = float(config.get("tol", 1e-8))
    return [run_instance(spec, schedule, tol) for spec in expand_config(config)]


def write_csv(reports: list[Report], path: str, stable: bool = False):
    """Fixed-layout CSV; stable mode zeroes the timing column so seeded
    reruns diff byte for byte."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in reports:
            writer.writerow(r.row(stable=stable))


def write_plot(reports: list[Report], path: str):
    """Defect-in against distance-out scatter, one marker set per family."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    markers = {"commuting_plus_noise": "o", "permutation_pair": "s"}
    for family in FAMILIES:
        xs, ys = [], []
        for r in reports:
            if r.spec.family == family and r.error is None:
                xs.append(float(r.delta_in))
                ys.append(float(r.distance))
        if xs:
            ax.scatter(xs, ys, marker=markers[family], label=family, alpha=0.75)
    ax.set_xlabel("input commutator defect")
    ax.set_ylabel("output rank distance")
    ax.legend(loc="best")
    ax.grid(True, linewidth=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# ---------------------------------------------------------------------------
# verification sweeps


def _random_poly(rng: random.Random, nvars: int, max_degree: int,
                 max_terms: int = 4) -> Poly | None:
    mons = monomials_up_to(nvars, max_degree)
    terms = {}
    for _ in range(rng.randrange(1, max_terms + 1)):
        m = rng.choice(mons)
        c = rng.randrange(-3, 4)
        if c:
            cur = terms.get(m, sc(0)) + sc(c)
            terms[m] = cur
    terms = {m: c for m, c in terms.items() if not c.is_zero()}
    if not terms:
        return None
    return Poly(nvars, terms)


def _random_ideal(rng: random.Random, max_vars: int = 3, max_gens: int = 4,
                  max_degree: int = 3) -> Ideal | None:
    nvars = rng.randrange(1, max_vars + 1)
    gens = []
    for _ in range(rng.randrange(1, max_gens + 1)):
        p = _random_poly(rng, nvars, max_degree)
        if p is not None:
            gens.append(p)
    if not gens:
        return None
    return Ideal(nvars, gens)


def check_macaulay_growth(count: int = 60, seed: int = 0) -> dict:
    """Random ideals never violate the layerwise quotient growth bound."""
    rng = random.Random(f"macaulay:{seed}")
    trials = violations = 0
    while trials < count:
        ideal = _random_ideal(rng)
        if ideal is None:
            continue
        trials += 1
        try:
            ok, _ = macaulay_check(ideal, 8)
        except BudgetError:
            violations += 1
            continue
        if not ok:
            violations += 1
    return {"name": "macaulay_growth", "ok": violations == 0,
            "trials": trials, "violations": violations}


def check_star_closure(count: int = 40, seed: int = 0) -> dict:
    """Adjoining adjoints never increases the commutator defect."""
    rng = random.Random(f"starclose:{seed}")
    trials = violations = 0
    for _ in range(count):
        if rng.random() < 0.5:
            d = rng.choice([4, 8, 12, 16, 24, 32])
            t = gen_commuting_plus_noise(d, 2, rng.randrange(0, 3), rng.randrange(10 ** 6))
        else:
            side = rng.choice([2, 3, 4, 5])
            t = gen_permutation_pair(side, rng.randrange(0, 3), rng.randrange(10 ** 6))
        trials += 1
        if commutator_defect(star_close(t)) > commutator_defect(t):
            violations += 1
    return {"name": "star_closure_defect", "ok": violations == 0,
            "trials": trials, "violations": violations}


def check_bootstrap(count: int = 20, seed: int = 0) -> dict:
    """Exclusion-free greedy packings cover an exp(-n) fraction of the
    commutative core they pack."""
    rng = random.Random(f"bootstrap:{seed}")
    trials = violations = 0
    for _ in range(count):
        d = rng.choice([6, 8, 10, 12, 16])
        radius = rng.choice([1, 2])
        t = star_close(gen_commuting_plus_noise(
            d, 2, rng.randrange(0, 2), rng.randrange(10 ** 6)))
        core = r_commutative_core(t, 2 * radius + 2)
        trials += 1
        if core.is_zero():
            continue
        try:
            balls = greedy_pack(t, core, radius)
        except PipelineError:
            violations += 1
            continue
        covered = sum(rb.dim for rb in balls)
        if covered < math.exp(-t.n) * core.dim - 1e-12:
            violations += 1
    return {"name": "bootstrap_coverage", "ok": violations == 0,
            "trials": trials, "violations": violations}


def check_slack_bounds(count: int = 10, seed: int = 0) -> dict:
    """Every shrink of the working pair respects its exact slack budget."""
    rng = random.Random(f"slack:{seed}")
    trials = violations = invocations = 0
    for _ in range(count):
        d = rng.choice([8, 12, 16])
        t = gen_commuting_plus_noise(d, 2, rng.randrange(0, 2), rng.randrange(10 ** 6))
        trials += 1
        try:
            w = build_multiballspace(t, Schedule(radii=(4, 2)))
        except PipelineError:
            violations += 1
            continue
        entries = [a for a in w.records["assertions"] if a["name"] == "slack_bound"]
        invocations += len(entries)
        violations += sum(1 for a in entries if not a["ok"])
    return {"name": "slack_bound", "ok": violations == 0, "trials": trials,
            "invocations": invocations, "violations": violations}


def check_rank_oracle(count: int = 200, seed: int = 0) -> dict:
    """Exact rank and the float numerical rank agree on rational matrices."""
    rng = random.Random(f"rank:{seed}")
    trials = disagreements = 0
    for _ in range(count):
        d = rng.randrange(2, 25)
        if rng.random() < 0.5:
            m = MatrixExact.from_rows(
                [[rng.randrange(-9, 10) for _ in range(d)] for _ in range(d)])
        else:
            k = rng.randrange(0, d)
            if k == 0:
                m = MatrixExact.zero(d)
            else:
                b = MatrixExact.from_rows(
                    [[rng.randrange(-9, 10) for _ in range(k)] for _ in range(d)])
                c = MatrixExact.from_rows(
                    [[rng.randrange(-9, 10) for _ in range(d)] for _ in range(k)])
                m = b @ c
        trials += 1
        if m.rank() != numerical_rank(m.to_float(), 1e-10):
            disagreements += 1
    return {"name": "rank_oracle", "ok": disagreements == 0,
            "trials": trials, "violations": disagreements}


def check_membership_oracle(count: int = 25, seed: int = 0) -> dict:
    """Groebner membership agrees with degree-bounded linear algebra.

    Constructed members carry a known representation degree; candidates the
    basis rejects must stay unrepresentable at every degree the oracle can
    afford."""
    rng = random.Random(f"membership:{seed}")
    trials = disagreements = 0
    while trials < count:
        nvars = rng.randrange(1, 4)
        gens = []
        for _ in range(rng.randrange(1, 4)):
            p = _random_poly(rng, nvars, 2, max_terms=3)
            if p is not None:
                gens.append(p)
        if not gens:
            continue
        ideal = Ideal(nvars, gens)
        trials += 1
        try:
            member = Poly.zero(nvars)
            bound = 0
            for g in gens:
                qpoly = _random_poly(rng, nvars, 2, max_terms=2)
                if qpoly is None:
                    continue
                member = member + qpoly * g
                bound = max(bound, qpoly.degree() + g.degree())
            if not member.is_zero():
                if not ideal.member(member):
                    disagreements += 1
                elif not membership_by_linear_algebra(member, gens, bound):
                    disagreements += 1
            probe = _random_poly(rng, nvars, 2, max_terms=3)
            if probe is not None:
                degree = probe.degree() + max(g.degree() for g in gens) + 4
                by_gb = ideal.member(probe)
                by_la = membership_by_linear_algebra(probe, gens, degree)
                if by_gb != by_la:
                    by_la = membership_by_linear_algebra(probe, gens, degree + 4)
                if by_gb != by_la:
                    disagreements += 1
        except BudgetError:
            disagreements += 1
    return {"name": "membership_oracle", "ok": disagreements == 0,
            "trials": trials, "violations": disagreements}


def check_regularity_detector(seed: int = 0) -> dict:
    """The synthetic non-reduced ideal is diagnosed, joint eigenvector
    balls are certified regular, and both verdicts repeat deterministically."""
    square = Ideal(1, [Poly(1, {mono_var(1, 0, 2): sc(1)})])
    first = reducedness_failure(square, 1)
    second = reducedness_failure(square, 1)
    nonreduced_ok = (
        isinstance(first, NotRegular)
        and first.diagnosis == "reducedness"
        and second == first
    )
    rng = random.Random(f"regularity:{seed}")
    eigen_ok = True
    for _ in range(4):
        d = rng.choice([4, 6, 8])
        q = random_orthogonal(d, rng)
        mats = []
        for _ in range(2):
            values = [mpq(v, d + 1) for v in rng.sample(range(1, d + 1), d)]
            mats.append(q @ _diag(values) @ q.adjoint())
        t = star_close(MatrixTuple(mats, ["selfadjoint", "selfadjoint"]))
        root = [q[i, 0] for i in range(d)]
        verdict_a = check_regular(t, root, 2)
        verdict_b = check_regular(t, root, 2)
        if not (bool(verdict_a) and bool(verdict_b)
                and verdict_a.staircase == verdict_b.staircase):
            eigen_ok = False
    ok = nonreduced_ok and eigen_ok
    return {"name": "regularity_detector", "ok": ok,
            "nonreduced": nonreduced_ok, "eigenvector": eigen_ok}


VERIFY_CHECKS = {
    "macaulay_growth": check_macaulay_growth,
    "star_closure_defect": check_star_closure,
    "bootstrap_coverage": check_bootstrap,
    "slack_bound": check_slack_bounds,
    "rank_oracle": check_rank_oracle,
    "membership_oracle": check_membership_oracle,
}


def verify_suite(config: dict | None = None) -> dict:
    """Run every property sweep; the summary says which checks failed."""
    cfg = config or {}
    seed = int(cfg.get("seed", 0))
    counts = cfg.get("counts", {})
    checks = []
    for name, fn in VERIFY_CHECKS.items():
        kwargs = {"seed": seed}
        if name in counts:
            kwargs["count"] = int(counts[name])
        checks.append(fn(**kwargs))
    checks.append(check_regularity_detector(seed))
    return {"passed": all(c["ok"] for c in checks), "checks": checks}
