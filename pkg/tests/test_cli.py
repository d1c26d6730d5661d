
import pytest

from stpsim.cli import main
from stpsim.data import catalog_path, config_path


@pytest.fixture
def capture(capsys):
    def invoke(*argv):
        code = main(list(argv))
        out = capsys.readouterr()
        return code, out.out, out.err
    return invoke


CATALOG = str(catalog_path())
SECO_A = str(config_path("seco_a"))
SECO_B = str(config_path("seco_b"))


def test_validate_model_ok(capture):
    code, out, _ = capture("validate-model", CATALOG)
    assert code == 0
    assert "20 variation points" in out
    assert "46 variants" in out


def test_validate_config_ok(capture):
    code, out, _ = capture("validate-config", CATALOG, SECO_A)
    assert code == 0
    assert out.startswith("ok:")


def test_validate_config_names_violated_constraint(capture, tmp_path):
    bad = tmp_path / "bad.cfg"
    lines = config_path("seco_a").read_text().splitlines()
    bad.write_text("\n".join(
        line for line in lines if line.strip() != "FillOrKillMatching") + "\n")
    code, out, _ = capture("validate-config", CATALOG, str(bad))
    assert code == 1
    assert "FillOrKillOrderType => FillOrKillMatching" in out


def test_derive_lists_bindings(capture):
    code, out, _ = capture("derive", CATALOG, SECO_A, "SECO_A")
    assert code == 0
    assert "20 variation points bound" in out
    assert "SecondaryOrderPrecedenceRules -> TimePriority" in out


def test_run_happy_path_exit_zero(capture):
    code, out, _ = capture("run", CATALOG, SECO_B, "retail_retail")
    assert code == 0
    assert "result: PASS" in out


def test_run_machine_format_is_byte_identical(capture):
    code1, out1, _ = capture("run", CATALOG, SECO_A, "retail_institutional",
                             "--format", "machine")
    code2, out2, _ = capture("run", CATALOG, SECO_A, "retail_institutional",
                             "--format", "machine")
    assert code1 == code2 == 0
    assert out1 == out2
    assert out1.startswith("run|product=SECO_A|scenario=retail_institutional\n")
    assert out1.rstrip().endswith("end|completed")


def test_run_unknown_scenario_fails(capture):
    code, _, err = capture("run", CATALOG, SECO_A, "no_such_scenario")
    assert code == 1
    assert "unknown scenario" in err


def test_report_round_trip(capture, tmp_path):
    code, machine, _ = capture("run", CATALOG, SECO_A, "institutional_institutional",
                               "--format", "machine")
    assert code == 0
    saved = tmp_path / "run.out"
    saved.write_text(machine)
    code, human, _ = capture("report", str(saved))
    assert code == 0
    assert "result: PASS" in human
    assert "institutional_institutional" in human
    code, echoed, _ = capture("report", str(saved), "--format", "machine")
    assert code == 0
    assert echoed == machine


def test_report_rejects_non_report_file(capture, tmp_path):
    bogus = tmp_path / "bogus.txt"
    bogus.write_text("hello world\n")
    code, _, err = capture("report", str(bogus))
    assert code == 1
    assert "error" in err


def test_usage_error_exits_two(capture):
    with pytest.raises(SystemExit) as exit_info:
        main(["run"])          # missing arguments
    assert exit_info.value.code == 2


def test_missing_file_exits_one(capture):
    code, _, err = capture("validate-model", "/nonexistent/model.fm")
    assert code == 1
    assert "error" in err


def test_syntax_error_reports_location(capture, tmp_path):
    broken = tmp_path / "broken.fm"
    broken.write_text("abstract mandatory Root group:and\n      concrete optional Deep\n")
    code, _, err = capture("validate-model", str(broken))
    assert code == 1
    assert "line 2" in err


def test_run_scenario_from_explicit_path(capture, tmp_path):
    from stpsim.data import scenario_path
    copied = tmp_path / "copy.scn"
    copied.write_text(scenario_path("retail_retail").read_text())
    code, out, _ = capture("run", CATALOG, SECO_A, str(copied))
    assert code == 0
    assert "result: PASS" in out
