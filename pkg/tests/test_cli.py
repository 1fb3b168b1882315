import json
from pathlib import Path

import pytest

from erasedwords.cli import main
from erasedwords.config import ConfigError, build_config, load_config
from erasedwords.report import CheckResult, RunReport

BASE_CONFIG = {
    "alphabet": ["a", "b"],
    "measure": {"kind": "product", "probs": [0.5, 0.5]},
    "horizon": 120,
    "checkpoints": [40, 120],
    "seeds": {"base": 0, "count": 3},
    "subsequence_length": 1,
}


def write_config(tmp_path, overrides=None, name="config.json"):
    raw = dict(BASE_CONFIG)
    if overrides:
        raw.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return path


def test_build_config_defaults():
    cfg = build_config(dict(BASE_CONFIG))
    assert cfg.alphabet.symbols == ("a", "b")
    assert cfg.seeds == [0, 1, 2]
    assert cfg.measure.kind == "product"
    assert cfg.tolerance("marginal_tv") == 0.05


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown config keys"):
        build_config({**BASE_CONFIG, "horzion": 10})


def test_config_rejects_bad_checkpoints():
    with pytest.raises(ConfigError, match="checkpoints"):
        build_config({**BASE_CONFIG, "checkpoints": [120, 40]})


def test_config_rejects_duplicate_seeds():
    with pytest.raises(ConfigError, match="distinct"):
        build_config({**BASE_CONFIG, "seeds": [1, 1]})


def test_config_rejects_unknown_measure_keys():
    bad = {**BASE_CONFIG, "measure": {"kind": "product", "probs": [1, 1], "x": 2}}
    with pytest.raises(ConfigError, match="unknown measure keys"):
        build_config(bad)


def test_config_rejects_unknown_tolerance():
    with pytest.raises(ConfigError, match="tolerance"):
        build_config({**BASE_CONFIG, "tolerances": {"typo": 0.1}})


def test_config_threshold_letters_resolved_via_alphabet():
    raw = {
        **BASE_CONFIG,
        "measure": {"kind": "threshold", "cuts": [0.5], "letters": ["b", "a"]},
    }
    cfg = build_config(raw)
    assert cfg.measure.kind == "threshold"
    assert cfg.measure.params["letters"] == [2, 1]


def test_config_decimal_parameters_are_exact(tmp_path):
    path = write_config(
        tmp_path, {"measure": {"kind": "product", "probs": [0.3, 0.7]}}
    )
    cfg = load_config(path)
    from fractions import Fraction

    assert cfg.measure.letter_masses() == (Fraction(3, 10), Fraction(7, 10))


def test_report_roundtrip_and_exit_semantics(tmp_path):
    report = RunReport(command="demo", config={"k": 1})
    report.add(
        CheckResult(
            name="exact-check",
            kind="exact",
            value=0.0,
            passed=True,
            comparator="==",
            threshold=0.0,
        )
    )
    report.add(
        CheckResult(
            name="mc-check",
            kind="monte-carlo",
            value=0.2,
            passed=False,
            comparator="<",
            threshold=0.1,
            sample_size=5,
            seeds=[1, 2, 3, 4, 5],
        )
    )
    assert not report.passed
    json_path, text_path = report.write(tmp_path)
    payload = json.loads(Path(json_path).read_text())
    assert payload["passed"] is False
    assert payload["checks"][1]["seeds"] == [1, 2, 3, 4, 5]
    text = Path(text_path).read_text()
    assert "FAIL" in text and "PASS" in text


def test_cli_density_worked_example(tmp_path, capsys):
    config = write_config(tmp_path)
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("a b a a b\n")
    code = main(
        [
            "density",
            "--config",
            str(config),
            "--corpus",
            str(corpus),
            "--pattern",
            "a a b",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "0.300000" in out


def test_cli_density_full_word(tmp_path, capsys):
    config = write_config(tmp_path)
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("a b b\n")
    code = main(
        ["density", "--config", str(config), "--corpus", str(corpus), "--pattern", "a b b"]
    )
    assert code == 0
    assert "1.000000" in capsys.readouterr().out


def test_cli_density_unknown_token(tmp_path, capsys):
    config = write_config(tmp_path)
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("a b\na z\n")
    code = main(
        ["density", "--config", str(config), "--corpus", str(corpus), "--pattern", "a"]
    )
    assert code == 2
    err = capsys.readouterr().err
    assert "line 2" in err and "z" in err


def test_cli_density_pattern_longer_than_word(tmp_path, capsys):
    config = write_config(tmp_path)
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("a b\n")
    code = main(
        [
            "density",
            "--config",
            str(config),
            "--corpus",
            str(corpus),
            "--pattern",
            "a b a",
        ]
    )
    assert code == 2
    assert "line 1" in capsys.readouterr().err


def test_cli_simulate_deterministic_artifacts(tmp_path, capsys):
    config = write_config(tmp_path)
    out  = tmp_path / "run"
    argv = [
        "simulate",
        "--config",
        str(config),
        "--out",
        str(out),
        "--seed-override",
        "7,8",
    ]
    assert main(argv) == 0
    first = (out / "checkpoints_seed7.json").read_bytes()
    report_first = (out / "simulate_report.json").read_bytes()
    assert main(argv) == 0
    assert (out / "checkpoints_seed7.json").read_bytes() == first
    assert (out / "simulate_report.json").read_bytes() == report_first
    payload = json.loads((out / "simulate_report.json").read_text())
    assert payload["passed"] is True
    names = [c["name"] for c in payload["checks"]]
    assert "trajectory-invariants" in names
    record = json.loads((out / "checkpoints_seed7.json").read_text())
    assert set(record) == {"seed", "horizon", "measure", "checkpoints", "diagnostics"}
    assert len(record["checkpoints"]["120"].split()) == 120


def test_cli_simulate_bad_config_exit_two(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["simulate", "--config", str(path)]) == 2


def test_cli_boundary_small_run(tmp_path, capsys):
    config = write_config(
        tmp_path,
        {
            "horizon": 150,
            "checkpoints": [30, 150],
            "seeds": {"base": 0, "count": 4},
            "sweep": {"max_length": 4, "max_k": 3},
            "tolerances": {"marginal_tv": 0.2},
        },
    )
    out = tmp_path / "boundary"
    assert main(["boundary", "--config", str(config), "--out", str(out)]) == 0
    payload = json.loads((out / "boundary_report.json").read_text())
    by_name = {c["name"]: c for c in payload["checks"]}
    sweep = by_name["collision-bound-sweep-len4-k3"]
    assert sweep["kind"] == "exact" and sweep["value"] == 0.0
    assert (out / "bound_sweep.csv").exists()


def test_cli_filtration_threshold_positive(tmp_path):
    config = write_config(
        tmp_path,
        {
            "measure": {"kind": "threshold", "cuts": [0.5], "letters": ["a", "b"]},
            "horizon": 200,
            "checkpoints": [200],
            "seeds": {"base": 0, "count": 6},
            "marked_anchors": 4,
            "reconstruction_horizons": [500, 5000],
            "tolerances": {"match_rate": 0.5},
        },
    )
    out = tmp_path / "filt"
    assert main(["filtration", "--config", str(config), "--out", str(out)]) == 0
    payload = json.loads((out / "filtration_report.json").read_text())
    names = [c["name"] for c in payload["checks"]]
    assert "relabel-identity-n200" in names
    assert "eraser-tail-match-rate" in names


def test_cli_plotdata_bundle(tmp_path):
    config = write_config(
        tmp_path,
        {
            "horizon": 400,
            "checkpoints": [100, 400],
            "seeds": {"base": 0, "count": 4},
            "curve_grid": 64,
        },
    )
    out = tmp_path / "plots"
    assert main(["plotdata", "--config", str(config), "--out", str(out)]) == 0
    assert (out / "measure_curve.csv").exists()
    assert (out / "measure_atoms.csv").exists()
    assert (out / "word_curve_seed0_n100.csv").exists()
    assert (out / "word_measure_seed0_n400.csv").exists()
    assert (out / "anchors_seed0_n400.csv").exists()
    atoms = (out / "measure_atoms.csv").read_text().splitlines()
    assert atoms[0] == "letter,position,mass"


def test_cli_plotdata_rejects_nonbinary(tmp_path):
    config = write_config(
        tmp_path,
        {
            "alphabet": ["a", "b", "c"],
            "measure": {"kind": "product", "probs": [0.3, 0.3, 0.4]},
        },
    )
    assert main(["plotdata", "--config", str(config)]) == 2
