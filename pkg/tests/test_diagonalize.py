import pytest

from rankcorrect.ballspace import RegularBall, check_regular
from rankcorrect.diagonalize import (
    LocalModel,
    SeparationError,
    VarietyPoint,
    build_local_model,
    eval_at_complex,
    eval_at_exact,
    find_separating_points,
    verify_local_model,
)
from rankcorrect.linalg import MatrixExact, basis_vec, sc, vec
from rankcorrect.polyring import Ideal, poly_from_text
from rankcorrect.tuples import MatrixTuple


def P(text, n):
    return poly_from_text(text, n)


def diag(entries):
    d = len(entries)
    return MatrixExact.from_rows([[entries[i] if i == j else 0 for j in range(d)] for i in range(d)])


def real_coords(points):
    return sorted(c.real for p in points for c in [p.as_complex()[0]])


def test_single_maximal_ideal():
    ideal = Ideal(2, [P("(1+0i) X1 + (-1+0i)", 2), P("(1+0i) X2 + (-2+0i)", 2)])
    pts = find_separating_points(ideal, 1)
    assert len(pts) == 1
    p = pts[0]
    assert p.exact and p.residual == 0.0
    assert p.coordinates == [sc(1), sc(2)]


def test_two_point_spectrum():
    ideal = Ideal(1, [P("(1+0i) X1^2 + (-1+0i)", 1)])
    pts = find_separating_points(ideal, 2)
    assert len(pts) == 2
    assert all(p.exact for p in pts)
    assert real_coords(pts) == [-1.0, 1.0]


def test_positive_dimensional_axes():
    ideal = Ideal(2, [P("(1+0i) X1 X2", 2)])
    pts = find_separating_points(ideal, 3, seed=5)
    assert len(pts) == 3
    for p in pts:
        if p.exact:
            assert eval_at_exact(ideal.gens[0], p.coordinates).is_zero()
        else:
            assert abs(eval_at_complex(ideal.gens[0], p.as_complex())) <= 1e-9
    seen = {tuple(round(c.real, 6) for c in p.as_complex()) for p in pts}
    assert len(seen) == 3


def test_irrational_points_certified():
    ideal = Ideal(1, [P("(1+0i) X1^2 + (-2+0i)", 1)])
    pts = find_separating_points(ideal, 2)
    assert len(pts) == 2
    assert all(not p.exact for p in pts)
    assert all(p.residual <= 1e-9 for p in pts)
    got = real_coords(pts)
    assert abs(got[0] + 2 ** 0.5) < 1e-9
    assert abs(got[1] - 2 ** 0.5) < 1e-9


def test_subset_chosen_by_conditioning():
    # three points 0, 1, -1 but only two wanted: the symmetric pair wins
    ideal = Ideal(1, [P("(1+0i) X1^3 + (-1+0i) X1", 1)])
    pts = find_separating_points(ideal, 2)
    assert all(p.exact for p in pts)
    assert real_coords(pts) == [-1.0, 1.0]


def test_non_reduced_spectrum_fails():
    ideal = Ideal(1, [P("(1+0i) X1^2", 1)])
    with pytest.raises(SeparationError):
        find_separating_points(ideal, 2)


def test_free_line_sections():
    ideal = Ideal(1, [])
    pts = find_separating_points(ideal, 2, seed=3)
    assert len(pts) == 2
    assert all(p.exact for p in pts)
    assert pts[0].coordinates != pts[1].coordinates


def test_reproducible_point_search():
    ideal = Ideal(2, [P("(1+0i) X1 X2", 2)])
    a = find_separating_points(ideal, 3, seed=11)
    b = find_separating_points(ideal, 3, seed=11)
    assert [p.as_complex() for p in a] == [p.as_complex() for p in b]


def eigen_ball():
    t = MatrixTuple([diag([1, 2, 3])], ["selfadjoint"])
    got = check_regular(t, basis_vec(3, 1), 3)
    assert isinstance(got, RegularBall)
    return got


def sign_ball(radius=1):
    t = MatrixTuple([diag([1, -1])], ["selfadjoint"])
    got = check_regular(t, vec([1, 1]), radius)
    assert isinstance(got, RegularBall)
    return got


def pair_ball():
    t = MatrixTuple([diag([1, 2, 3]), diag([1, 1, 2])], ["selfadjoint"] * 2)
    got = check_regular(t, vec([1, 1, 1]), 2)
    assert isinstance(got, RegularBall)
    return got


def test_scalar_model_on_eigenvector_ball():
    ball = eigen_ball()
    pts = find_separating_points(ball.ideal, 1)
    model = build_local_model(ball, pts)
    assert model.backend == "exact"
    assert model.assembled(0) == MatrixExact.from_rows([[2]])
    report = verify_local_model(model)
    assert report["ok"]
    assert report["point_residual"] == 0.0
    assert report["agreement_residual"] == 0.0


def test_sign_ball_model_is_swap():
    ball = sign_ball()
    mult = [ball.multiplication_matrix(0)]
    pts = find_separating_points(ball.ideal, 2, monomials=ball.staircase, mult_matrices=mult)
    model = build_local_model(ball, pts)
    assert model.backend == "exact"
    # multiplication by X1 on the basis {1, X1} mod X1^2 - 1 swaps the two
    assert model.assembled(0) == MatrixExact.from_rows([[0, 1], [1, 0]])
    assert verify_local_model(model)["ok"]
    tau_sigma = model.tau @ model.sigma
    assert tau_sigma == MatrixExact.identity(2)


def test_commuting_pair_model():
    ball = pair_ball()
    pts = find_separating_points(ball.ideal, 3, monomials=ball.staircase)
    model = build_local_model(ball, pts)
    assert model.backend == "exact"
    for i in range(2):
        assert model.assembled(i) == ball.multiplication_matrix(i)
    a, b = model.assembled(0), model.assembled(1)
    assert a @ b == b @ a
    assert all(v.is_zero() for v in model.eigenvalue_commutator(0, 1))
    report = verify_local_model(model)
    assert report["ok"]
    assert report["smallest_singular"] > 0.1

    basis = model.tau_basis()
    for j, col in enumerate(basis):
        for i in range(2):
            image = [sum((model.assembled(i)[r, k] * col[k] for k in range(3)), sc(0))
                     for r in range(3)]
            expected = [model.lambdas[i][j] * col[r] for r in range(3)]
            assert image == expected


def test_corrupted_lambda_table_is_flagged():
    ball = pair_ball()
    pts = find_separating_points(ball.ideal, 3, monomials=ball.staircase)
    model = build_local_model(ball, pts)
    model.lambdas[0][0] = model.lambdas[0][0] + sc(10)
    report = verify_local_model(model)
    assert not report["points_ok"]
    assert not report["ok"]

    # a corruption that happens to land on another variety point still
    # breaks the model, caught as a separation failure instead
    collide = build_local_model(ball, pts)
    collide.lambdas[0][0] = collide.lambdas[0][0] + sc(1)
    report = verify_local_model(collide)
    assert not report["ok"]


def test_duplicate_points_flag_separation():
    ball = pair_ball()
    pts = find_separating_points(ball.ideal, 3, monomials=ball.staircase)
    model = build_local_model(ball, pts)
    for i in range(2):
        model.lambdas[i][1] = model.lambdas[i][0]
    report = verify_local_model(model)
    assert not report["separation_ok"]
    assert not report["ok"]


def test_point_count_mismatch():
    ball = pair_ball()
    pts = find_separating_points(ball.ideal, 3, monomials=ball.staircase)
    with pytest.raises(SeparationError):
        build_local_model(ball, pts[:2])


def test_model_json_shape():
    ball = sign_ball()
    pts = find_separating_points(ball.ideal, 2, monomials=ball.staircase)
    model = build_local_model(ball, pts)
    obj = model.to_json()
    assert obj["backend"] == "exact"
    assert obj["monomials"] == ["1", "X1"]
    assert len(obj["points"]) == 2
    assert all(p["exact"] for p in obj["points"])
    assert len(obj["lambdas"]) == 1 and len(obj["lambdas"][0]) == 2

    fpoint = VarietyPoint([0.5 + 0j], False, 1e-12)
    assert fpoint.to_json()["residual"] == 1e-12


def test_float_model_verifies():
    ideal = Ideal(1, [P("(1+0i) X1^2 + (-2+0i)", 1)])
    t = MatrixTuple([MatrixExact.from_rows([[0, 2], [1, 0]])], ["general"])
    got = check_regular(t, vec([1, 1]), 2)
    assert isinstance(got, RegularBall)
    assert got.ideal.groebner() == ideal.groebner()
    pts = find_separating_points(got.ideal, 2, monomials=got.staircase)
    model = build_local_model(got, pts)
    assert model.backend == "float"
    report = verify_local_model(model)
    assert report["ok"]
    assert report["point_residual"] <= 1e-9
    assert report["agreement_residual"] <= 1e-8
