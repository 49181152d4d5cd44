import json
import random

import pytest

from rankcorrect.harness import (
    HarnessError,
    InstanceSpec,
    Report,
    check_bootstrap,
    check_macaulay_growth,
    check_membership_oracle,
    check_rank_oracle,
    check_regularity_detector,
    check_slack_bounds,
    check_star_closure,
    expand_config,
    gen_commuting_plus_noise,
    gen_permutation_pair,
    kron,
    random_orthogonal,
    run_experiment,
    run_instance,
    verify_suite,
    write_csv,
)
from rankcorrect.cli import main
from rankcorrect.linalg import MatrixExact, mpq
from rankcorrect.tuples import commutator_defect


def test_random_orthogonal_exact():
    rng = random.Random(3)
    for d in (2, 5, 9):
        q = random_orthogonal(d, rng)
        assert q @ q.adjoint() == MatrixExact.identity(d)


def test_kron_shapes_and_values():
    a = MatrixExact.from_rows([[1, 2], [3, 4]])
    b = MatrixExact.from_rows([[0, 5], [6, 0]])
    k = kron(a, b)
    assert k.rows == 4 and k.cols == 4
    assert k[0, 1] == MatrixExact.from_rows([[5]])[0, 0]
    assert k[2, 3] == MatrixExact.from_rows([[20]])[0, 0]
    assert k[3, 2] == MatrixExact.from_rows([[24]])[0, 0]


def test_commuting_plus_noise_deterministic():
    a = gen_commuting_plus_noise(12, 2, 1, 9)
    b = gen_commuting_plus_noise(12, 2, 1, 9)
    assert a.to_json() == b.to_json()
    c = gen_commuting_plus_noise(12, 2, 1, 10)
    assert a.to_json() != c.to_json()


def test_commuting_plus_noise_defect_bounds():
    clean = gen_commuting_plus_noise(16, 2, 0, 4)
    assert commutator_defect(clean) == 0
    assert clean.flags == ("selfadjoint", "selfadjoint")
    noisy = gen_commuting_plus_noise(16, 2, 1, 4)
    assert commutator_defect(noisy) <= mpq(2, 16)
    noisier = gen_commuting_plus_noise(16, 3, 2, 4)
    assert noisier.n == 3
    assert commutator_defect(noisier) <= mpq(4, 16)


def test_commuting_plus_noise_rejects_bad_rank():
    with pytest.raises(HarnessError):
        gen_commuting_plus_noise(8, 2, 8, 0)
    with pytest.raises(HarnessError):
        gen_commuting_plus_noise(8, 0, 0, 0)


def test_permutation_pair_defect_bounds():
    clean = gen_permutation_pair(4, 0, 0)
    assert clean.d == 16
    assert clean.flags == ("unitary", "unitary")
    assert commutator_defect(clean) == 0
    bumped = gen_permutation_pair(8, 1, 2)
    assert commutator_defect(bumped) <= mpq(4, 64)
    assert gen_permutation_pair(8, 1, 2).to_json() == bumped.to_json()


def test_permutation_pair_rejects_bad_args():
    with pytest.raises(HarnessError):
        gen_permutation_pair(1, 0, 0)
    with pytest.raises(HarnessError):
        gen_permutation_pair(3, 9, 0)


def test_instance_spec_validation():
    with pytest.raises(HarnessError):
        InstanceSpec("mystery_family", 8)
    with pytest.raises(HarnessError):
        InstanceSpec("permutation_pair", 12)
    with pytest.raises(HarnessError):
        InstanceSpec("permutation_pair", 16, n=3)
    with pytest.raises(HarnessError):
        InstanceSpec("commuting_plus_noise", 8, backend="symbolic")
    spec = InstanceSpec("permutation_pair", 9, noise_rank=1, seed=2)
    t = spec.build()
    assert t.d == 9
    assert commutator_defect(t) <= spec.declared_defect_bound


def test_instance_spec_json_round_trip():
    spec = InstanceSpec("commuting_plus_noise", 8, 2, 1, 5, "float")
    again = InstanceSpec.from_json(spec.to_json())
    assert again == spec
    assert again.build().backend == "float"


def test_expand_config_grid_sorted():
    cfg = {
        "instances": [{"family": "permutation_pair", "d": 4, "seed": 7}],
        "grid": {"families": ["commuting_plus_noise"], "d": [8, 4],
                 "noise_rank": [1, 0], "seeds": [1, 0]},
    }
    specs = expand_config(cfg)
    assert len(specs) == 9
    keys = [s.sort_key() for s in specs]
    assert keys == sorted(keys)
    assert expand_config({}) == []


def test_run_experiment_tiny_grid():
    cfg = {"grid": {"families": ["commuting_plus_noise", "permutation_pair"],
                    "d": [4], "noise_rank": [0], "seeds": [0]}}
    reports = run_experiment(cfg)
    assert len(reports) == 2
    for r in reports:
        assert r.error is None
        assert r.assertions_failed == 0
        names = {a["name"] for a in r.assertions}
        assert "generator_defect_bound" in names
        assert "star_closure_defect" in names
        assert "factored_commutators_zero" in names
        assert r.distance == 0
        assert r.coverage == 1


def test_run_instance_records_failure_without_raising():
    spec = InstanceSpec("commuting_plus_noise", 8, 2, 3, 0)
    spec.noise_rank = 99
    report = run_instance(spec)
    assert report.error is not None
    assert report.distance is None


def test_report_json_round_trip():
    spec = InstanceSpec("commuting_plus_noise", 8, 2, 1, 0)
    report = run_instance(spec)
    again = Report.from_json(json.loads(json.dumps(report.to_json())))
    assert again.spec == report.spec
    assert again.delta_in == report.delta_in
    assert again.distance == report.distance
    assert again.coverage == report.coverage
    assert again.assertions_failed == report.assertions_failed


def test_stable_csv_is_byte_identical(tmp_path):
    cfg = {"grid": {"families": ["commuting_plus_noise"], "d": [6],
                    "noise_rank": [0, 1], "seeds": [0]}}
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    write_csv(run_experiment(cfg), str(first), stable=True)
    write_csv(run_experiment(cfg), str(second), stable=True)
    assert first.read_bytes() == second.read_bytes()
    header = first.read_text().splitlines()[0]
    assert header == "family,d,n,delta_in,dist_out,coverage,runtime_ms,assertions_failed"


def test_verify_suite_small_counts():
    out = verify_suite({"counts": {
        "macaulay_growth": 8, "star_closure_defect": 4, "bootstrap_coverage": 3,
        "slack_bound": 2, "rank_oracle": 12, "membership_oracle": 4,
    }})
    assert out["passed"]
    names = [c["name"] for c in out["checks"]]
    assert names == ["macaulay_growth", "star_closure_defect",
                     "bootstrap_coverage", "slack_bound", "rank_oracle",
                     "membership_oracle", "regularity_detector"]


def test_individual_checks_report_counts():
    assert check_macaulay_growth(5)["trials"] == 5
    assert check_star_closure(3)["violations"] == 0
    assert check_bootstrap(2)["ok"]
    assert check_slack_bounds(2)["invocations"] >= 1
    assert check_rank_oracle(10)["ok"]
    assert check_membership_oracle(3)["ok"]
    det = check_regularity_detector()
    assert det["nonreduced"] and det["eigenvector"]


def test_cli_gen_run_report(tmp_path):
    inst = tmp_path / "inst.json"
    assert main(["gen", "--family", "permutation_pair", "--d", "4",
                 "--seed", "3", "--out", str(inst)]) == 0
    payload = json.loads(inst.read_text())
    assert payload["spec"]["family"] == "permutation_pair"
    assert payload["tuple"]["backend"] == "exact"

    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"grid": {"families": ["commuting_plus_noise"],
                                        "d": [6], "noise_rank": [0],
                                        "seeds": [0, 1]}}))
    reports = tmp_path / "reports.json"
    assert main(["run", "--config", str(cfg), "--out", str(reports)]) == 0

    csv_path = tmp_path / "out.csv"
    assert main(["report", "--reports", str(reports), "--csv", str(csv_path),
                 "--stable"]) == 0
    lines = csv_path.read_text().splitlines()
    assert len(lines) == 3
    assert lines[1].startswith("commuting_plus_noise,6,2,0,0,1,0,")


def test_cli_verify_exit_code():
    counts = json.dumps({"macaulay_growth": 4, "star_closure_defect": 2,
                         "bootstrap_coverage": 2, "slack_bound": 1,
                         "rank_oracle": 6, "membership_oracle": 2})
    assert main(["verify", "--counts", counts]) == 0
