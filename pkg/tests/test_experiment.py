import csv
import json
from fractions import Fraction

import pytest
from pydantic import ValidationError

from core.exceptions import ConfigError, OutputError
from main import EXIT_CONFIG, EXIT_INCONCLUSIVE, EXIT_IO, EXIT_OK, build_parser, main
from schemas.experiment import CrossingConfig, LimitCheckConfig, ThresholdConfig, parse_experiment_config
from models.map_model import QUADRANGULATION
from services.enumeration_service import law_moments, peeling_law
from services import experiment_service
from services.experiment_service import emit_reference_tables, reference_tables, run_experiment
from utils.parallel import TrialRunner
from utils.serialization import dumps, exact


def test_config_dispatch_on_command():
    config = parse_experiment_config({"command": "law-dump", "model": "tri", "kmax": 10, "seed": 3})
    assert config.command == "law-dump" and config.seed == 3 and config.kmax == 10


@pytest.mark.parametrize(
    "data",
    [
        {"command": "law-dump", "model": "tri", "kmax": 10, "colour": "red"},
        {"command": "law-dump", "model": "hex", "kmax": 10},
        {"command": "law-dump", "model": "tri", "kmax": 10, "schema_version": 2},
        {"command": "crossing", "kernel": "bond", "model": "tri", "lambdas": [0.5]},
        {"command": "crossing", "kernel": "bond", "model": "tri", "lambdas": [10], "trials": 50},
        {"command": "threshold", "tol": 0.001},
        {"command": "limit-check", "check": "xi", "kernel": "face"},
        {"command": "limit-check", "check": "selfsim", "lambdas": [100]},
        {"command": "limit-check", "check": "coupling", "kernel": "site"},
        {"command": "dance"},
    ],
)
def test_invalid_configs_are_rejected(data):
    with pytest.raises(ValidationError):
        parse_experiment_config(data)


def test_run_experiment_rejects_unknown_config():
    with pytest.raises(ConfigError):
        run_experiment(object())


def test_reference_tables_match_enumeration():
    tables = reference_tables()
    constants = tables["constants"]
    assert constants["p_bond_tri"] == Fraction(1, 4)
    assert constants["p_face_quad"] == Fraction(3, 4)
    assert constants["p_site_quad"] == Fraction(5, 9)
    assert constants["delta_quad"] == 1
    assert constants["universal_site_tri"] == Fraction(1, 2)
    assert constants["Z2_quad"] == Fraction(4, 3)
    moments = law_moments(peeling_law(QUADRANGULATION))
    assert constants["eta_quad"] == moments.eta
    assert tables["q_side_head"]["tri"][1] == Fraction(1, 8)
    assert tables["exposed_distribution"]["quad"] == {1: Fraction(3, 8), 2: Fraction(1, 4), 3: Fraction(3, 8)}


def test_reference_tables_json(tmp_path):
    path = emit_reference_tables(str(tmp_path))
    data = json.loads(path.read_text())
    assert data["constants"]["eta_tri"] == {"decimal": 1 / 6, "fraction": "1/6"}
    assert data["q_side_head"]["quad"]["0"]["fraction"] == "1/9"


def test_exact_encoding():
    assert exact(Fraction(2, 243)) == {"decimal": 2 / 243, "fraction": "2/243"}
    assert json.loads(dumps({"x": Fraction(3, 8)})) == {"x": {"decimal": 0.375, "fraction": "3/8"}}


def test_law_dump_writes_csv_and_record(tmp_path):
    config = parse_experiment_config({"command": "law-dump", "model": "quad", "kmax": 60, "out": str(tmp_path)})
    record = run_experiment(config)
    rows = list(csv.reader((tmp_path / "law_quad.csv").open()))
    assert rows[0] == ["k", "q_side_decimal", "q_side_fraction"]
    assert rows[1] == ["0", repr(1 / 9), "1/9"] and len(rows) == 62
    saved = json.loads((tmp_path / "law-dump_20150601.json").read_text())
    assert saved["command"] == "law-dump" and saved["library_version"] == record.library_version
    assert "tail" in saved["outputs"]["header"]
    assert sorted(record.files) == ["law-dump_20150601.json", "law_quad.csv"]


def test_crossing_record_does_not_depend_on_workers(tmp_path):
    data = {"command": "crossing", "kernel": "bond", "model": "quad", "lambdas": [4, 8], "trials": 100,
            "max_steps": 20_000, "seed": 77}
    serial = run_experiment(parse_experiment_config({**data, "out": str(tmp_path / "one")}), TrialRunner(1))
    parallel = run_experiment(parse_experiment_config({**data, "workers": 2, "out": str(tmp_path / "two")}))
    assert serial.reproducible_view() == parallel.reproducible_view()
    assert [e.lambda_ for e in serial.outputs["estimates"]] == [4, 8]
    assert len(serial.outputs["convergence"]) == 2


def test_crossing_emits_outcome_streams(tmp_path):
    config = CrossingConfig(kernel="face", model="tri", lambdas=[3, 6], trials=100, max_steps=20_000,
                            emit_outcomes=str(tmp_path / "outcomes.csv"), out=str(tmp_path))
    record = run_experiment(config)
    for lam in ("3", "6"):
        rows = list(csv.DictReader((tmp_path / f"outcomes_lambda{lam}.csv").open()))
        assert len(rows) == 100 and {r["case"] for r in rows} <= {"case1", "case2", "tie_zero", "tie_b", "censored"}
    assert record.trials == 200
    steps = sum(int(r["T"]) if r["T"] else 20_000 for lam in ("3", "6")
                for r in csv.DictReader((tmp_path / f"outcomes_lambda{lam}.csv").open()))
    assert record.total_steps == steps > 0
    assert "total_steps" not in record.reproducible_view()


def test_failed_write_removes_partial_files(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    outcomes = tmp_path / "outcomes.csv"
    config = CrossingConfig(kernel="bond", model="tri", lambdas=[3], trials=100, max_steps=20_000,
                            emit_outcomes=str(outcomes), out=str(blocker / "results"))
    with pytest.raises(OutputError):
        run_experiment(config)
    assert not outcomes.exists()
    assert list(tmp_path.iterdir()) == [blocker]


def test_failed_record_write_keeps_earlier_results(tmp_path, monkeypatch):
    config = parse_experiment_config({"command": "law-dump", "model": "quad", "kmax": 20, "out": str(tmp_path)})
    run_experiment(config)
    earlier = (tmp_path / "law-dump_20150601.json").read_text()

    def refuse(path, value):
        raise OutputError(f"cannot write {path}", str(path))

    monkeypatch.setattr(experiment_service, "write_json", refuse)
    with pytest.raises(OutputError):
        run_experiment(config)
    assert (tmp_path / "law-dump_20150601.json").read_text() == earlier
    assert not (tmp_path / "law_quad.csv").exists()


def test_limit_check_record(tmp_path):
    config = LimitCheckConfig(check="positivity", kernel="face", model="quad", horizon=1, trials=500,
                              out=str(tmp_path))
    record = run_experiment(config)
    assert record.outputs["kernel"] == "face-quad"
    assert record.outputs["report"].horizon == 1
    assert record.total_steps == 500


def test_threshold_config_defaults_follow_settings():
    config = ThresholdConfig()
    assert config.model == "quad" and config.tol == 0.01 and config.trials == 2000


def test_cli_reference_tables(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "reference-tables"]) == EXIT_OK
    assert (tmp_path / "reference_tables.json").exists()
    assert json.loads(capsys.readouterr().out) == {"reference_tables": "reference_tables.json"}


def test_cli_law_dump(tmp_path):
    assert main(["--out", str(tmp_path), "--seed", "5", "law", "dump", "--model", "tri", "--kmax", "8"]) == EXIT_OK
    assert (tmp_path / "law_tri.csv").exists() and (tmp_path / "law-dump_5.json").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["crossing", "--kernel", "bond", "--model", "tri", "--lambda", "0.5"],
        ["threshold", "--tol", "0.001"],
        ["limit-check", "--check", "xi", "--kernel", "face"],
    ],
)
def test_cli_config_errors(tmp_path, argv):
    assert main(["--out", str(tmp_path)] + argv) == EXIT_CONFIG


def test_cli_inconclusive(tmp_path, capsys):
    argv = ["--out", str(tmp_path), "threshold", "--tol", "0.05", "--trials", "10", "--escape-height", "10",
            "--max-steps", "100", "--max-probes", "1"]
    assert main(argv) == EXIT_INCONCLUSIVE
    assert len(json.loads(capsys.readouterr().out)["partial"]) == 1
    assert not list(tmp_path.glob("*.json"))


def test_cli_output_error(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["--out", str(blocker / "results"), "reference-tables"]) == EXIT_IO


@pytest.mark.parametrize(
    "argv",
    [
        ["law", "dump", "--model", "tri", "--kmax", "8", "--seed", "5", "--workers", "2"],
        ["threshold", "--model", "quad", "--tol", "0.01", "--trials", "20000", "--seed", "5"],
        ["crossing", "--kernel", "bond", "--model", "tri", "--lambda", "50", "--seed", "5"],
        ["limit-check", "--check", "positivity", "--kernel", "face", "--model", "quad", "--seed", "5"],
        ["reference-tables", "--seed", "5"],
    ],
)
def test_global_options_after_subcommand(tmp_path, argv):
    args = build_parser().parse_args(argv + ["--out", str(tmp_path)])
    config = args.build_config(args)
    assert config.seed == 5 and config.out == str(tmp_path)


def test_global_options_before_subcommand_survive():
    args = build_parser().parse_args(["--seed", "9", "--workers", "3", "reference-tables"])
    config = args.build_config(args)
    assert config.seed == 9 and config.workers == 3


def test_cli_seed_after_subcommand(tmp_path):
    argv = ["law", "dump", "--model", "tri", "--kmax", "8", "--seed", "5", "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    record = json.loads((tmp_path / "law-dump_5.json").read_text())
    assert record["seed"] == 5 and record["total_steps"] == 0
