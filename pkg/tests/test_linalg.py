import random

from rankcorrect.linalg import (
    MatrixExact,
    MatrixFloat,
    Scalar,
    Subspace,
    basis_vec,
    image,
    kernel,
    mpq,
    normalized_rank,
    numerical_rank,
    preimage,
    rref,
    sc,
    vec,
    vec_dot,
    vec_is_zero,
    vec_sub,
)


def rand_matrix(rng, rows, cols, span=4, denoms=(1, 2)):
    return MatrixExact.from_rows(
        [[mpq(rng.randint(-span, span), rng.choice(denoms)) for _ in range(cols)] for _ in range(rows)]
    )


def test_scalar_arithmetic():
    a = sc(mpq(1, 2), mpq(1, 3))
    b = sc(2, -1)
    assert a + b == sc(mpq(5, 2), mpq(-2, 3))
    assert (a * b).re == mpq(1, 2) * 2 - mpq(1, 3) * (-1)
    assert a * a.inv() == sc(1)
    assert a.conj().conj() == a
    assert sc(0).is_zero() and not a.is_zero()


def test_scalar_string_round_trip():
    a = sc(mpq(-3, 7), mpq(22, 5))
    assert Scalar.from_pair_strings(*a.pair_strings()) == a


def test_rank_of_all_ones_matrix():
    m = MatrixExact.from_rows([[1, 1], [1, 1]])
    assert m.rank() == 1
    assert normalized_rank(m) == mpq(1, 2)


def test_rref_canonical_under_regeneration():
    rng = random.Random(7)
    m = rand_matrix(rng, 4, 6)
    vecs = [m.row(i) for i in range(4)]
    s1 = Subspace(6, vecs)
    shuffled = [vec_sub(vecs[1], vecs[0]), vecs[3], vecs[0], vecs[2], vecs[1]]
    scaled = [[sc(3) * e for e in v] for v in shuffled]
    s2 = Subspace(6, scaled)
    assert s1 == s2


def test_orth_complement_of_complex_line():
    s = Subspace(2, [vec([sc(1), sc(0, 1)])])
    c = s.orth_complement()
    assert c.dim == 1
    # <(1, i), v> = conj(1) v0 + conj(i) v1 = v0 - i v1 = 0 forces v = (1, -i) after normalization
    assert c.basis_vectors()[0] == vec([sc(1), sc(0, -1)])


def test_rank_nullity_and_double_complement():
    rng = random.Random(3)
    for _ in range(25):
        r, c = rng.randint(1, 6), rng.randint(1, 6)
        m = rand_matrix(rng, r, c)
        assert kernel(m).dim + m.rank() == c
        assert image(m).dim == m.rank()
        s = Subspace(c, [rand_matrix(rng, 1, c).row(0) for _ in range(rng.randint(0, 3))])
        assert s.orth_complement().orth_complement() == s
        assert s.dim + s.orth_complement().dim == c


def test_intersection_dimension_formula():
    rng = random.Random(11)
    for _ in range(20):
        d = rng.randint(2, 7)
        s1 = Subspace(d, [rand_matrix(rng, 1, d).row(0) for _ in range(rng.randint(0, d))])
        s2 = Subspace(d, [rand_matrix(rng, 1, d).row(0) for _ in range(rng.randint(0, d))])
        inter = s1.intersect(s2)
        total = s1.add(s2)
        assert inter.dim + total.dim == s1.dim + s2.dim
        for b in inter.basis_vectors():
            assert s1.contains(b) and s2.contains(b)


def test_projection_properties():
    rng = random.Random(23)
    for _ in range(12):
        d = rng.randint(2, 6)
        s = Subspace(d, [rand_matrix(rng, 1, d).row(0) for _ in range(rng.randint(1, d))])
        v = rand_matrix(rng, 1, d).row(0)
        p = s.project(v)
        assert s.contains(p)
        resid = vec_sub(v, p)
        for b in s.basis_vectors():
            assert vec_dot(b, resid).is_zero()
        pm = s.projector()
        assert pm @ pm == pm
        assert pm.adjoint() == pm
        assert pm.matvec(p) == p


def test_preimage_membership_and_dimension():
    rng = random.Random(5)
    for _ in range(15):
        d = rng.randint(2, 6)
        m = rand_matrix(rng, d, d)
        s = Subspace(d, [rand_matrix(rng, 1, d).row(0) for _ in range(rng.randint(0, d - 1))])
        pre = preimage(m, s)
        for b in pre.basis_vectors():
            assert s.contains(m.matvec(b))
        # v outside the preimage must leave s
        for _ in range(3):
            v = rand_matrix(rng, 1, d).row(0)
            if not pre.contains(v):
                assert not s.contains(m.matvec(v))


def test_inverse_and_identity():
    rng = random.Random(17)
    for _ in range(10):
        d = rng.randint(1, 5)
        m = rand_matrix(rng, d, d)
        if m.rank() < d:
            continue
        assert m @ m.inverse() == MatrixExact.identity(d)


def test_matrix_json_round_trip_bit_exact():
    rng = random.Random(29)
    m = rand_matrix(rng, 3, 4, span=9, denoms=(1, 2, 3, 7))
    m2 = MatrixExact.from_json(m.to_json())
    assert m == m2
    f = m.to_float()
    f2 = MatrixFloat.from_json(f.to_json())
    assert (f - f2).numerical_rank() == 0


def test_exact_vs_float_rank_agreement_sample():
    rng = random.Random(41)
    for _ in range(60):
        d = rng.randint(1, 8)
        r = rng.randint(0, d)
        # build a matrix of known rank r as a product of full-rank factors
        a = rand_matrix(rng, d, r) if r else MatrixExact.zero(d, 1)
        b = rand_matrix(rng, r, d) if r else MatrixExact.zero(1, d)
        m = a @ b
        assert m.rank() == numerical_rank(m.to_float(), 1e-10)


def test_unitary_and_hermitian_checks():
    perm = MatrixExact.from_rows([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    assert perm.is_unitary() and not perm.is_hermitian()
    h = MatrixExact.from_rows([[sc(1), sc(0, 1)], [sc(0, -1), sc(2)]])
    assert h.is_hermitian() and not h.is_unitary()


def test_rref_pivots_and_zero_subspace():
    m = MatrixExact.from_rows([[0, 0], [0, 0]])
    _, pivots = rref(m)
    assert pivots == []
    z = Subspace.zero(4)
    assert z.dim == 0 and z.orth_complement() == Subspace.full(4)
    assert z.intersect(Subspace.full(4)) == z
    assert vec_is_zero(z.project(vec([1, 2, 3, 4])))
    assert Subspace.full(3).contains(basis_vec(3, 1))


def test_tracked_span_coordinates_in_inserted_basis():
    from rankcorrect.linalg import TrackedSpan, vec_add, vec_scale

    rng = random.Random(23)
    for _ in range(10):
        d = rng.randint(2, 7)
        span = TrackedSpan(d)
        inserted = []
        for _ in range(d + 3):
            v = [Scalar(mpq(rng.randint(-3, 3), rng.choice((1, 2)))) for _ in range(d)]
            if span.insert(v):
                inserted.append(v)
        # a random combination comes back with its own coefficients
        coeffs = [Scalar(rng.randint(-2, 2)) for _ in inserted]
        target = [Scalar(0)] * d
        for c, v in zip(coeffs, inserted):
            target = vec_add(target, vec_scale(c, v))
        got = span.coordinates(target)
        assert got is not None
        recombined = [Scalar(0)] * d
        for c, v in zip(got, inserted):
            recombined = vec_add(recombined, vec_scale(c, v))
        assert recombined == target
        if span.dim < d:
            outside = None
            for j in range(d):
                cand = basis_vec(d, j)
                if not span.contains(cand):
                    outside = cand
                    break
            assert outside is not None
            assert span.coordinates(outside) is None
    # dependent insert returns False and leaves coordinates consistent
    span = TrackedSpan(3)
    assert span.insert(vec([1, 0, 0]))
    assert span.insert(vec([1, 1, 0]))
    assert not span.insert(vec([2, 1, 0]))
    assert span.coordinates(vec([2, 1, 0])) == [Scalar(1), Scalar(1)]
    assert span.subspace().dim == 2
