import random

import pytest

from rankcorrect.linalg import (
    MatrixExact,
    Subspace,
    basis_vec,
    commutator,
    kernel,
    mpq,
    sc,
    vec,
)
from rankcorrect.tuples import (
    FlagError,
    MatrixTuple,
    Word,
    WordEvaluations,
    commutator_defect,
    evaluate_word,
    is_r_commutative_at,
    is_r_commutative_on,
    r_commutative_core,
    rank_distance,
    star_close,
)


def diag(entries):
    d = len(entries)
    return MatrixExact.from_rows([[entries[i] if i == j else 0 for j in range(d)] for i in range(d)])


def shift(d):
    """Cyclic shift e_k -> e_{k+1 mod d}."""
    return MatrixExact.from_rows([[1 if i == (j + 1) % d else 0 for j in range(d)] for i in range(d)])


def rotation(d, i, j, t):
    """Orthogonal rotation in the (i, j) plane with rational tan-half-angle t."""
    c = (1 - t * t) / (1 + t * t)
    s = 2 * t / (1 + t * t)
    rows = [[mpq(1) if a == b else mpq(0) for b in range(d)] for a in range(d)]
    rows[i][i] = c
    rows[j][j] = c
    rows[i][j] = -s
    rows[j][i] = s
    return MatrixExact.from_rows(rows)


def transposition(d, i, j):
    rows = [[1 if a == b else 0 for b in range(d)] for a in range(d)]
    rows[i][i] = rows[j][j] = 0
    rows[i][j] = rows[j][i] = 1
    return MatrixExact.from_rows(rows)


def test_flag_verification_is_eager():
    good = MatrixTuple([shift(3)], ["unitary"])
    assert good.backend == "exact"
    with pytest.raises(FlagError):
        MatrixTuple([shift(3)], ["selfadjoint"])
    with pytest.raises(FlagError):
        MatrixTuple([diag([1, 2, 3]) + shift(3)], ["unitary"])


def test_commutator_defect_zero_for_commuting_diagonals():
    t = MatrixTuple([diag([1, 2, 3, 4]), diag([5, 6, 7, 8])], ["selfadjoint"] * 2)
    assert commutator_defect(t) == 0


def test_rank_one_bump_defect_and_distance():
    d = 16
    d1 = diag(list(range(d)))
    bump = MatrixExact.from_rows(
        [[1 if (i, j) == (0, 1) else 0 for j in range(d)] for i in range(d)]
    )
    m2 = diag([2 * k + 1 for k in range(d)]) + bump
    t = MatrixTuple([d1, m2], ["selfadjoint", "general"], check=False)
    assert commutator_defect(t) == mpq(1, 16)
    clean = MatrixTuple([d1, m2 - bump], ["selfadjoint"] * 2)
    assert rank_distance(t, clean) == mpq(1, 16)


def test_star_close_appends_transpose_of_permutation():
    u = shift(4)
    t = MatrixTuple([u], ["unitary"])
    closed = star_close(t)
    assert closed.n == 2
    assert closed.mats[1] == u.adjoint()
    again = star_close(closed)
    assert again.n == 2 and set(again.mats) == set(closed.mats)


def test_star_close_fixes_selfadjoint_tuples():
    t = MatrixTuple([diag([1, 2, 3]), diag([3, 1, 2])], ["selfadjoint"] * 2)
    closed = star_close(t)
    assert closed.n == 2 and closed.mats == t.mats


def test_star_close_kernel_argument_oracle():
    # For unitary B, B maps ker(AB - BA) into ker(AB* - B*A) without
    # losing dimension; that is the mechanism keeping the defect bounded.
    rng = random.Random(2)
    for _ in range(8):
        d = 6
        a = rotation(d, 0, 1, mpq(1, 2)) @ rotation(d, 2, 3, mpq(1, 3))
        b = rotation(d, 2, 3, mpq(2, 5)) @ transposition(d, rng.randrange(d), (rng.randrange(d - 1) + 1) % d)
        w = kernel(commutator(a, b))
        bw = Subspace(d, [b.matvec(v) for v in w.basis_vectors()])
        assert bw.dim == w.dim
        target = kernel(commutator(a, b.adjoint()))
        assert target.contains_subspace(bw)


def test_star_close_does_not_increase_defect_on_unitary_pairs():
    for seed in range(6):
        rng = random.Random(seed)
        d = 8
        u = rotation(d, 0, 1, mpq(1, 2)) @ rotation(d, 4, 5, mpq(1, 4))
        v = rotation(d, 2, 3, mpq(1, 3)) @ transposition(d, 1, 2)
        t = MatrixTuple([u, v], ["unitary", "unitary"])
        assert commutator_defect(star_close(t)) <= commutator_defect(t)


def test_evaluate_word_on_shift():
    d = 5
    t = MatrixTuple([shift(d), shift(d) @ shift(d)], ["unitary", "unitary"])
    v = basis_vec(d, 0)
    assert evaluate_word(t, v, Word((0, 0))) == basis_vec(d, 2)
    assert evaluate_word(t, v, Word((1, 0))) == basis_vec(d, 3)
    assert evaluate_word(t, v, Word(())) == v


def test_word_evaluations_match_explicit_products():
    d = 6
    t = MatrixTuple([shift(d), diag([1, 2, 3, 4, 5, 6])], ["unitary", "selfadjoint"])
    ev = WordEvaluations(t, basis_vec(d, 1))
    for m, word in [((2, 0), (0, 0)), ((1, 2), (0, 1, 1)), ((0, 3), (1, 1, 1)), ((2, 1), (0, 0, 1))]:
        assert ev.value(m) == evaluate_word(t, basis_vec(d, 1), Word(word))


def test_r_commutativity_at_vectors():
    d = 8
    a = diag(list(range(d)))
    b = diag([3 * k for k in range(d)]) + MatrixExact.from_rows(
        [[1 if (i, j) == (0, 1) else 0 for j in range(d)] for i in range(d)]
    )
    t = MatrixTuple([a, b], ["selfadjoint", "general"], check=False)
    # words hitting coordinate 1 see the bump; e_3 never reaches it
    assert is_r_commutative_at(t, basis_vec(d, 3), 4)
    assert not is_r_commutative_at(t, basis_vec(d, 1), 2)
    assert is_r_commutative_at(t, basis_vec(d, 1), 1)


def test_r_commutative_core_of_bumped_pair():
    d = 16
    a = diag(list(range(d)))
    bump = MatrixExact.from_rows(
        [[1 if (i, j) == (0, 1) else 0 for j in range(d)] for i in range(d)]
    )
    b = diag([2 * k + 1 for k in range(d)]) + bump
    t = MatrixTuple([a, b], ["selfadjoint", "general"], check=False)
    core = r_commutative_core(t, 3)
    assert core.dim >= 13
    assert is_r_commutative_on(t, core, 3)


def test_r_commutative_core_full_for_commuting():
    t = MatrixTuple([diag([1, 2, 3, 4]), diag([7, 5, 3, 1])], ["selfadjoint"] * 2)
    core = r_commutative_core(t, 8)
    assert core == Subspace.full(4)
    assert is_r_commutative_on(t, core, 8)


def test_core_respects_budget_and_single_matrix():
    d = 5
    t1 = MatrixTuple([shift(d)], ["unitary"])
    assert r_commutative_core(t1, 9) == Subspace.full(d)
    a = shift(d)
    b = transposition(d, 0, 1)
    t = MatrixTuple([a, b], ["unitary", "unitary"])
    c0 = r_commutative_core(t, 2)
    c1 = r_commutative_core(t, 6)
    assert c1.dim <= c0.dim
    assert is_r_commutative_on(t, c1, 6)


def test_tuple_json_round_trip():
    t = MatrixTuple([shift(4), diag([1, 2, 3, 4])], ["unitary", "selfadjoint"])
    t2 = MatrixTuple.from_json(t.to_json())
    assert t2.mats == t.mats and t2.flags == t.flags


def test_rank_distance_requires_matching_shape():
    t1 = MatrixTuple([diag([1, 2])], ["selfadjoint"])
    t2 = MatrixTuple([diag([1, 2, 3])], ["selfadjoint"])
    with pytest.raises(Exception):
        rank_distance(t1, t2)


def test_float_tuple_defect():
    t = MatrixTuple([shift(6), shift(6) @ shift(6)], ["unitary", "unitary"]).to_float()
    assert commutator_defect(t) == 0.0
