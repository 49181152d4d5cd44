"""Separating points on a relation variety and diagonal local models.

A regular ball hands over a zero- or positive-dimensional ideal and a
staircase of standard monomials.  This module finds points of the variety
whose evaluation matrix on that staircase is invertible, then builds the
evaluation map sigma, its inverse tau, and the local operators
M_i = tau Lambda_i sigma, which are simultaneously diagonal in the basis
tau(e_j) and therefore commute exactly in factored form.

Points with rational coordinates are kept exact; irrational ones are
carried as floats certified by a residual bound on every generator.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ballspace import RegularBall
from .linalg import LinalgError, MatrixExact, Scalar, mpq
from .polyring import Ideal, Monomial, Poly

S0 = Scalar(0)
S1 = Scalar(1)

RESIDUAL_BOUND = 1e-9
SUBSET_SAMPLES = 16
SECTION_RETRIES = 8
RECONSTRUCT_DENOM = 10**12


class SeparationError(Exception):
    """Not enough variety points with an invertible evaluation matrix."""


@dataclass
class VarietyPoint:
    """A point of the variety; exact Gaussian-rational coordinates when
    possible, otherwise floats with a certified generator residual."""

    coordinates: list
    exact: bool
    residual: float

    def as_complex(self) -> list[complex]:
        if self.exact:
            return [c.to_complex() for c in self.coordinates]
        return [complex(c) for c in self.coordinates]

    def to_json(self) -> dict:
        if self.exact:
            coords = [list(c.pair_strings()) for c in self.coordinates]
        else:
            coords = [[c.real, c.imag] for c in self.as_complex()]
        return {"exact": self.exact, "coordinates": coords, "residual": self.residual}


def eval_at_exact(f: Poly, coords: list[Scalar]) -> Scalar:
    deg = f.degree()
    powers = []
    for c in coords:
        row = [S1]
        for _ in range(deg):
            row.append(row[-1] * c)
        powers.append(row)
    total = S0
    for m, coeff in f.terms.items():
        v = coeff
        for i, e in enumerate(m.exps):
            if e:
                v = v * powers[i][e]
        total = total + v
    return total


def eval_at_complex(f: Poly, coords: list[complex]) -> complex:
    total = 0j
    for m, coeff in f.terms.items():
        v = coeff.to_complex()
        for i, e in enumerate(m.exps):
            if e:
                v *= coords[i] ** e
        total += v
    return total


def _mono_at_complex(m: Monomial, coords: list[complex]) -> complex:
    v = 1 + 0j
    for i, e in enumerate(m.exps):
        if e:
            v *= coords[i] ** e
    return v


def _mono_at_exact(m: Monomial, coords: list[Scalar]) -> Scalar:
    v = S1
    for i, e in enumerate(m.exps):
        for _ in range(e):
            v = v * coords[i]
    return v


def _reconstruct_scalar(z: complex, limit: int = RECONSTRUCT_DENOM) -> Scalar:
    re = Fraction(z.real).limit_denominator(limit)
    im = Fraction(z.imag).limit_denominator(limit)
    return Scalar(mpq(re.numerator, re.denominator), mpq(im.numerator, im.denominator))


def _certify_point(gens: list[Poly], coords_c: list[complex], bound: float) -> VarietyPoint | None:
    """Exact point if some rational rounding kills every generator exactly,
    else a float point when the residual passes the bound, else None.

    Small denominators are tried first: a coordinate like 5/17 known only
    to eigensolver accuracy has closer continued-fraction convergents with
    huge denominators, and those never certify.  Recovering q at stage L
    needs the coordinate error below 1/(2qL), hence the wide ladder.
    """
    for limit in (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 6, RECONSTRUCT_DENOM):
        exact_coords = [_reconstruct_scalar(z, limit) for z in coords_c]
        if all(eval_at_exact(g, exact_coords).is_zero() for g in gens):
            return VarietyPoint(exact_coords, True, 0.0)
    residual = max((abs(eval_at_complex(g, coords_c)) for g in gens), default=0.0)
    if residual <= bound:
        return VarietyPoint(list(coords_c), False, residual)
    return None


def _joint_points(ideal: Ideal, rng: random.Random, bound: float, mult_matrices=None) -> list[VarietyPoint]:
    """All points of a zero-dimensional variety via eigenvalues of a random
    combination of the commuting multiplication operators.  Left
    eigenvectors are evaluation functionals, so Rayleigh quotients against
    each operator read off the coordinates."""
    n = ideal.nvars
    if mult_matrices is None:
        mult_matrices = [ideal.multiplication_matrix(i) for i in range(n)]
    q = mult_matrices[0].rows if mult_matrices else 0
    gens = ideal.gens
    if q == 0:
        return []
    if q == 1:
        coords = [mult_matrices[i][0, 0] for i in range(n)]
        if not all(eval_at_exact(g, coords).is_zero() for g in gens):
            raise SeparationError("single quotient class is not a variety point")
        return [VarietyPoint(coords, True, 0.0)]
    ops = [m.to_float().array for m in mult_matrices]
    for _ in range(SECTION_RETRIES):
        weights = [rng.randrange(1, 997) for _ in range(n)]
        combo = sum(w * op for w, op in zip(weights, ops))
        theta, vecs = np.linalg.eig(combo.T)
        order = np.argsort(theta.real * 1e6 + theta.imag)
        theta = theta[order]
        vecs = vecs[:, order]
        scale = max(1.0, float(np.max(np.abs(theta))))
        gap = min(
            (abs(theta[i] - theta[j]) for i in range(q) for j in range(i + 1, q)),
            default=scale,
        )
        if gap <= 1e-7 * scale:
            continue
        points = []
        for j in range(q):
            w = vecs[:, j]
            w = w / np.linalg.norm(w)
            coords_c = [complex(np.conj(w) @ (op.T @ w)) for op in ops]
            p = _certify_point(gens, coords_c, bound)
            if p is None:
                break
            points.append(p)
        if len(points) == q:
            return points
    raise SeparationError("no separating combination of multiplication operators")


def _random_hyperplane(nvars: int, rng: random.Random) -> Poly:
    while True:
        coeffs = [rng.randrange(-4, 5) for _ in range(nvars)]
        if any(coeffs):
            break
    b = rng.randrange(-4, 5)
    terms = {Monomial(tuple(1 if j == i else 0 for j in range(nvars))): Scalar(c)
             for i, c in enumerate(coeffs) if c}
    terms[Monomial((0,) * nvars)] = Scalar(-b)
    return Poly(nvars, terms)


def _cut_to_zero_dimensional(ideal: Ideal, rng: random.Random) -> Ideal | None:
    cut = ideal
    for _ in range(ideal.nvars):
        if cut.is_zero_dimensional():
            return cut
        cut = Ideal(ideal.nvars, list(cut.gens) + [_random_hyperplane(ideal.nvars, rng)],
                    budget=ideal.budget)
    return cut if cut.is_zero_dimensional() else None


def _default_monomials(ideal: Ideal, count: int) -> list[Monomial]:
    if ideal.is_zero_dimensional():
        basis = ideal.quotient_basis()
        if len(basis) < count:
            raise SeparationError(f"quotient has only {len(basis)} classes, {count} wanted")
        return basis[:count]
    deg = 0
    while True:
        std = ideal.standard_monomials_up_to(deg)
        if len(std) >= count:
            return std[:count]
        deg += 1


def _distinct_from(pool: list[VarietyPoint], candidate: VarietyPoint) -> bool:
    cc = candidate.as_complex()
    for p in pool:
        if max(abs(a - b) for a, b in zip(p.as_complex(), cc)) < 1e-7:
            return False
    return True


def _best_subset(pool, mons, count, rng):
    if len(pool) < count:
        return None
    total = math.comb(len(pool), count)
    if total <= SUBSET_SAMPLES:
        candidates = list(itertools.combinations(range(len(pool)), count))
    else:
        candidates = [tuple(sorted(rng.sample(range(len(pool)), count))) for _ in range(SUBSET_SAMPLES)]
    best = None
    best_score = 0.0
    for sel in candidates:
        rows = [[_mono_at_complex(m, pool[j].as_complex()) for m in mons] for j in sel]
        svals = np.linalg.svd(np.array(rows, dtype=np.complex128), compute_uv=False)
        smin = float(svals[-1])
        if smin > 1e-9 * max(1.0, float(svals[0])) and smin > best_score:
            best_score = smin
            best = sel
    if best is None:
        return None
    return [pool[j] for j in best]


def find_separating_points(
    ideal: Ideal,
    count: int,
    monomials: list[Monomial] | None = None,
    seed: int = 0,
    residual_bound: float = RESIDUAL_BOUND,
    retries: int = SECTION_RETRIES,
    mult_matrices=None,
) -> list[VarietyPoint]:
    """`count` distinct variety points whose evaluation matrix on the given
    monomials (default: the first `count` standard monomials) is invertible.

    Zero-dimensional ideals hand out their whole joint spectrum; positive
    dimension is reduced by random affine hyperplane sections, pooling the
    section points across retries.  Among sampled candidate subsets the one
    with the largest smallest singular value wins.
    """
    rng = random.Random(seed)
    mons = monomials if monomials is not None else _default_monomials(ideal, count)
    if len(mons) != count:
        raise SeparationError("need exactly one monomial per point")
    if ideal.is_zero_dimensional():
        pool = _joint_points(ideal, rng, residual_bound, mult_matrices)
        if (
            len(pool) == count
            and mons == ideal.quotient_basis()
            and all(_distinct_from(pool[:j], pool[j]) for j in range(1, count))
        ):
            # A zero-dimensional quotient with as many distinct points as
            # its dimension is radical, so evaluation on any quotient basis
            # is invertible regardless of float conditioning.
            return pool
        subset = _best_subset(pool, mons, count, rng)
        if subset is None:
            raise SeparationError(f"no invertible evaluation among {len(pool)} spectrum points")
        return subset
    pool: list[VarietyPoint] = []
    for _ in range(retries):
        cut = _cut_to_zero_dimensional(ideal, rng)
        if cut is None:
            continue
        try:
            section = _joint_points(cut, rng, residual_bound)
        except SeparationError:
            continue
        for p in section:
            if not p.exact and max(
                (abs(eval_at_complex(g, p.as_complex())) for g in ideal.gens), default=0.0
            ) > residual_bound:
                continue
            if _distinct_from(pool, p):
                pool.append(p)
        if len(pool) >= count:
            subset = _best_subset(pool, mons, count, rng)
            if subset is not None:
                return subset
    raise SeparationError(f"collected {len(pool)} section points, {count} separating ones wanted")


# ---------------------------------------------------------------------------
# local models


class LocalModel:
    """tau, sigma, and eigenvalue tables of the diagonal operators on one
    ball; the factored form is the canonical output, dense matrices are a
    derived view."""

    __slots__ = ("ball", "points", "monomials", "lambdas", "tau", "sigma", "backend")

    def __init__(self, ball, points, monomials, lambdas, tau, sigma, backend):
        self.ball = ball
        self.points = points
        self.monomials = monomials
        self.lambdas = lambdas
        self.tau = tau
        self.sigma = sigma
        self.backend = backend

    @property
    def dim(self) -> int:
        return len(self.monomials)

    def tau_basis(self) -> list:
        if self.backend == "exact":
            return [[self.tau[r, j] for r in range(self.dim)] for j in range(self.dim)]
        return [self.tau[:, j].copy() for j in range(self.dim)]

    def eigenvalue_commutator(self, i: int, j: int) -> list:
        """Entrywise Lambda_i Lambda_j - Lambda_j Lambda_i; identically zero
        because scalar multiplication commutes, which is the factored form
        of the commutation guarantee."""
        return [a * b - b * a for a, b in zip(self.lambdas[i], self.lambdas[j])]

    def assembled(self, i: int):
        """Dense matrix of M_i = tau Lambda_i sigma on staircase coordinates."""
        lam = self.lambdas[i]
        if self.backend == "exact":
            scaled = MatrixExact([[lam[r] * self.sigma[r, c] for c in range(self.dim)]
                                  for r in range(self.dim)])
            return self.tau @ scaled
        return self.tau @ (np.array(lam, dtype=np.complex128)[:, None] * self.sigma)

    def to_json(self) -> dict:
        if self.backend == "exact":
            lambdas = [[list(v.pair_strings()) for v in row] for row in self.lambdas]
            tau = [[list(self.tau[r, c].pair_strings()) for c in range(self.dim)]
                   for r in range(self.dim)]
        else:
            lambdas = [[[complex(v).real, complex(v).imag] for v in row] for row in self.lambdas]
            tau = [[[z.real, z.imag] for z in row] for row in self.tau.tolist()]
        return {
            "backend": self.backend,
            "monomials": [repr(m) for m in self.monomials],
            "points": [p.to_json() for p in self.points],
            "lambdas": lambdas,
            "tau": tau,
        }


def build_local_model(ball: RegularBall, points: list[VarietyPoint]) -> LocalModel:
    """Evaluation map sigma at the points, its inverse tau, and the
    eigenvalue tables; exact whenever every point is exact."""
    mons = ball.staircase
    dim = len(mons)
    if len(points) != dim:
        raise SeparationError(f"{len(points)} points for a {dim}-dimensional ball")
    n = ball.ideal.nvars
    exact = all(p.exact for p in points)
    if exact:
        sigma = MatrixExact([[_mono_at_exact(m, p.coordinates) for m in mons] for p in points])
        try:
            tau = sigma.inverse()
        except LinalgError:
            raise SeparationError("singular evaluation matrix")
        lambdas = [[p.coordinates[i] for p in points] for i in range(n)]
        return LocalModel(ball, list(points), mons, lambdas, tau, sigma, "exact")
    coords = [p.as_complex() for p in points]
    sigma = np.array([[_mono_at_complex(m, c) for m in mons] for c in coords], dtype=np.complex128)
    svals = np.linalg.svd(sigma, compute_uv=False)
    if float(svals[-1]) <= 1e-12 * max(1.0, float(svals[0])):
        raise SeparationError("singular evaluation matrix")
    tau = np.linalg.inv(sigma)
    lambdas = [[c[i] for c in coords] for i in range(n)]
    return LocalModel(ball, list(points), mons, lambdas, tau, sigma, "float")


def verify_local_model(model: LocalModel, tol: float = RESIDUAL_BOUND) -> dict:
    """Independent re-check of a model; failures are reported, not raised.

    The point coordinates are read back from the eigenvalue tables, so a
    corrupted table shows up as a generator residual or a broken agreement
    with the quotient multiplication maps.
    """
    ideal = model.ball.ideal
    n = len(model.lambdas)
    dim = model.dim
    radius = model.ball.ball.radius
    coords = [[model.lambdas[i][j] for i in range(n)] for j in range(dim)]
    exact = model.backend == "exact"

    coords_c = [[v.to_complex() for v in c] if exact else [complex(v) for v in c] for c in coords]
    rows = [[_mono_at_complex(m, c) for m in model.monomials] for c in coords_c]
    svals = np.linalg.svd(np.array(rows, dtype=np.complex128), compute_uv=False)
    smin = float(svals[-1]) if svals.size else 0.0
    if exact:
        # Exact coordinates allow an exact invertibility check, which the
        # float spectrum cannot refute however ill-conditioned it looks.
        sep = MatrixExact([[_mono_at_exact(m, c) for m in model.monomials] for c in coords])
        separation_ok = sep.rank() == dim
    else:
        separation_ok = smin > 1e-9 * max(1.0, float(svals[0])) if svals.size else False

    if exact:
        point_residual = 0.0
        points_ok = all(
            eval_at_exact(g, c).is_zero() for c in coords for g in ideal.gens
        )
    else:
        point_residual = max(
            (abs(eval_at_complex(g, c)) for c in coords_c for g in ideal.gens), default=0.0
        )
        points_ok = point_residual <= tol

    commutation_ok = all(
        all(v.is_zero() for v in model.eigenvalue_commutator(i, j)) if exact
        else not any(model.eigenvalue_commutator(i, j))
        for i in range(n) for j in range(i + 1, n)
    )

    lower = [k for k, m in enumerate(model.monomials) if m.degree <= radius - 1]
    agreement_ok = True
    agreement_residual = 0.0
    if lower and separation_ok:
        for i in range(n):
            expected = ideal.multiplication_map(i, radius)
            got = model.assembled(i)
            if exact:
                for c in lower:
                    for r in range(dim):
                        if got[r, c] != expected[r, c]:
                            agreement_ok = False
                            diff = (got[r, c] - expected[r, c]).to_complex()
                            agreement_residual = max(agreement_residual, abs(diff))
            else:
                exp_f = expected.to_float().array
                diff = max(
                    abs(got[r, c] - exp_f[r, c]) for c in lower for r in range(dim)
                )
                agreement_residual = max(agreement_residual, float(diff))
        if not exact:
            agreement_ok = agreement_residual <= tol * max(1.0, smin)

    ok = separation_ok and points_ok and commutation_ok and agreement_ok
    return {
        "separation_ok": separation_ok,
        "smallest_singular": smin,
        "points_ok": points_ok,
        "point_residual": point_residual,
        "commutation_ok": commutation_ok,
        "agreement_ok": agreement_ok,
        "agreement_residual": agreement_residual,
        "ok": ok,
    }
