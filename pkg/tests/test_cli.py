import json
import math

import pytest

from countmix.cli import main

RAW = "#format=raw\n#n=40\n5\n9\n0\n2\n1\n"


@pytest.fixture
def raw_file(tmp_path):
    path = tmp_path / "counts.txt"
    path.write_text(RAW)
    return str(path)


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fit_outputs_valid_json(capsys, raw_file):
    code, out, err = run(capsys, ["fit", "--input", raw_file])
    assert code == 0 and err == ""
    doc = json.loads(out)
    assert doc["converged"] is True
    assert doc["optimality_gap"] <= 1e-6
    assert abs(sum(doc["weights"]) - 1.0) < 1e-9


def test_fit_deterministic_byte_identical(capsys, raw_file):
    _, out1, _ = run(capsys, ["fit", "--input", raw_file])
    _, out2, _ = run(capsys, ["fit", "--input", raw_file])
    assert out1 == out2


def test_estimate_entropy_empirical_all_zero(capsys, tmp_path):
    path = tmp_path / "zeros.txt"
    path.write_text("#format=raw\n#n=10\n0\n0\n0\n")
    code, out, _ = run(
        capsys,
        ["estimate", "--input", str(path), "--functional", "entropy", "--method", "empirical"],
    )
    assert code == 0
    assert json.loads(out)["value"] == 0.0


def test_estimate_functional_flag_parsing(capsys, raw_file):
    for flag in ("power-sum:0.5", "renyi:0.5", "support:0.01", "unseen:2", "entropy"):
        code, out, err = run(
            capsys,
            ["estimate", "--input", raw_file, "--functional", flag, "--method", "empirical"],
        )
        assert code == 0, (flag, err)
        assert math.isfinite(json.loads(out)["value"])


def test_estimate_csv_format(capsys, raw_file):
    code, out, _ = run(
        capsys,
        ["estimate", "--input", raw_file, "--functional", "entropy",
         "--method", "miller-madow", "--format", "csv"],
    )
    assert code == 0
    assert out.splitlines()[0] == "functional,method,value"


def test_localized_reports_partition(capsys, raw_file):
    code, out, _ = run(capsys, ["localized", "--input", raw_file])
    assert code == 0
    doc = json.loads(out)
    assert doc["n_small"] + doc["n_large"] == 5
    threshold = 3.6 * math.log(40) / 40
    assert doc["threshold"] == pytest.approx(threshold)


def test_penalized_profile_csv(capsys, tmp_path):
    path = tmp_path / "pos.txt"
    path.write_text("#format=raw\n#n=100\n" + "\n".join(["4"] * 10 + ["7"] * 5) + "\n")
    code, out, _ = run(capsys, ["penalized", "--input", str(path), "--format", "csv"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "k_prime,objective"
    assert len(lines) >= 2
    code, out, _ = run(capsys, ["penalized", "--input", str(path)])
    doc = json.loads(out)
    assert doc["k_hat"] >= 15


def test_gof_butterfly_mixture_accepts(capsys):
    import importlib.resources as res

    path = str(res.files("countmix").joinpath("data/butterfly.fp"))
    code, out, _ = run(capsys, ["gof", "--input", path, "--T", "10", "--model", "mixture"])
    assert code == 0
    assert json.loads(out)["p_value"] > 0.05


def test_unseen_curve_csv(capsys, raw_file):
    code, out, _ = run(
        capsys, ["unseen", "--input", raw_file, "--t-grid", "0.5,1,2", "--format", "csv"]
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,estimate"
    assert len(lines) == 4
    values = [float(line.split(",")[1]) for line in lines[1:]]
    assert values == sorted(values)


def test_simulate_runs_config(capsys, tmp_path):
    config = {
        "distribution": {"kind": "uniform", "k": 20},
        "sampling": "multinomial",
        "n_list": [50],
        "trials": 2,
        "estimators": ["empirical"],
        "seed": 5,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    code, out, _ = run(capsys, ["simulate", "--config", str(path), "--format", "csv"])
    assert code == 0
    assert out.splitlines()[0].startswith("estimator,")


def test_output_flag_writes_file(capsys, raw_file, tmp_path):
    target = tmp_path / "fit.json"
    code, out, _ = run(capsys, ["fit", "--input", raw_file, "--output", str(target)])
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["converged"] is True


def test_usage_error_exit_code_2(raw_file):
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--input", raw_file, "--bogus-flag"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["not-a-command"])
    assert exc.value.code == 2


def test_computation_error_exit_code_1(capsys, tmp_path):
    missing = str(tmp_path / "nope.txt")
    code, out, err = run(capsys, ["fit", "--input", missing])
    assert code == 1
    assert err.strip() != "" and "\n" not in err.strip()


def test_binomial_kernel_flag(capsys, raw_file):
    code, out, _ = run(capsys, ["fit", "--input", raw_file, "--kernel", "binomial"])
    assert code == 0
    assert json.loads(out)["converged"] is True


@pytest.mark.parametrize(
    "command,extra",
    [
        ("fit", []),
        ("estimate", ["--functional", "--method"]),
        ("localized", ["--kappa"]),
        ("penalized", ["--c0", "--c1"]),
        ("gof", ["--T", "--model"]),
        ("unseen", ["--t-grid", "--method"]),
        ("simulate", ["--config"]),
    ],
)
def test_help_lists_every_flag(capsys, command, extra):
    shared = ["--n", "--k", "--grid-size", "--kernel", "--tol", "--seed", "--output", "--format"]
    if command != "simulate":
        shared.append("--input")
    with pytest.raises(SystemExit) as exc:
        main([command, "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for flag in shared + extra:
        assert flag in text, (command, flag)
