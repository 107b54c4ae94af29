import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from tcarb.cli import main
from tcarb.scenario import load_json, parse_model, validate_model

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def models(tmp_path, capsys):
    for name in ("ex41", "ex42"):
        assert run(capsys, "examples", name, "-o", tmp_path / f"{name}.json")[0] == 0
    return tmp_path


@pytest.mark.parametrize("name", ["ex41", "ex42"])
def test_examples_match_golden_models(models, name):
    assert (models / f"{name}.json").read_text() == (GOLDEN / f"{name}.model.json").read_text()


@pytest.mark.parametrize("name", ["ex41", "ex42"])
def test_check_matches_golden_report(models, capsys, name):
    code, out, _ = run(capsys, "check", models / f"{name}.json")
    assert code == 0
    assert out == (GOLDEN / f"{name}.report.json").read_text()


def test_check_ex41_vector(models, capsys):
    _, out, _ = run(capsys, "check", models / "ex41.json")
    vec = {c: v["holds"] for c, v in json.loads(out)["verdicts"].items()}
    assert vec == {"NA": True, "NAs": True, "NAps": True, "NAr": False, "NAwps": True, "EF": False, "Penner": False, "nullspace": False}


def test_check_subset_ex42(models, capsys):
    code, out, _ = run(capsys, "check", models / "ex42.json", "--conditions", "naps,nawps")
    assert code == 0
    verdicts = json.loads(out)["verdicts"]
    assert list(verdicts) == ["NAps", "NAwps"]
    assert verdicts["NAps"]["holds"] is False and verdicts["NAwps"]["holds"] is True


def test_check_text_and_timings(models, capsys):
    _, out, _ = run(capsys, "check", models / "ex42.json", "--text")
    assert "NAps      fails" in out and "t=1, built at t in [0]: direction [-1, 1]" in out
    _, out, _ = run(capsys, "check", models / "ex41.json", "--timings", "--conditions", "na")
    assert "ms" in json.loads(out)["verdicts"]["NA"]
    _, out, _ = run(capsys, "check", models / "ex41.json", "--conditions", "na")
    assert "ms" not in json.loads(out)["verdicts"]["NA"]


def test_check_is_byte_deterministic(models, capsys):
    outs = {run(capsys, "check", models / "ex42.json")[1] for _ in range(3)}
    assert len(outs) == 1


def test_input_errors_exit_2(models, capsys, tmp_path):
    assert run(capsys, "check", tmp_path / "missing.json")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "check", bad)
    assert code == 2 and "line 1" in err
    assert run(capsys, "check", models / "ex41.json", "--conditions", "nax")[0] == 2


def test_unknown_flag_is_rejected(models, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["check", str(models / "ex41.json"), "--bogus"])
    assert exc.value.code == 2


def test_validate(models, capsys, tmp_path):
    code, out, _ = run(capsys, "validate", models / "ex41.json")
    assert code == 0 and json.loads(out)["ok"]
    obj = json.loads((models / "ex41.json").read_text())
    obj["nodes"][0]["pi"][0][0] = 2
    p = tmp_path / "diag.json"
    p.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "validate", p)
    assert code == 2
    assert json.loads(out)["violations"][0]["rule"] == "axiom.diagonal"


def test_cps_with_bounds(models, capsys):
    code, out, _ = run(capsys, "cps", models / "ex41.json", "--bounds", "root", "2")
    res = json.loads(out)
    assert code == 0 and res["found"]
    assert (res["bounds"]["min"], res["bounds"]["max"]) == (1, 1)
    _, out, _ = run(capsys, "cps", models / "ex41.json", "--strict")
    assert json.loads(out)["found"] is False


def test_decompose_command(models, capsys):
    code, out, _ = run(capsys, "decompose", models / "ex41.json", "--node", "root", "--order", "[[1,2,1]]")
    res = json.loads(out)
    assert code == 0 and res["reversible"] == [[1, 2, 1]] and res["pure"] == []
    _, out, _ = run(capsys, "decompose", models / "ex41.json", "--node", "root", "--order", "[2,1,1]")
    res = json.loads(out)
    assert res["reversible"] == [] and res["pure"] == [[2, 1, 1]]
    _, out, _ = run(capsys, "decompose", models / "ex41.json", "--node", "root", "--order", "[]")
    assert json.loads(out)["reversible"] == []
    assert run(capsys, "decompose", models / "ex41.json", "--node", "w", "--order", "[[1,2,1]]")[0] == 2


def test_superhedge_command(models, capsys, tmp_path):
    code, out, _ = run(capsys, "superhedge", models / "ex42.json", "--constant", "0,1")
    assert code == 0 and json.loads(out)["price"] == 1
    claim = tmp_path / "claim.json"
    claim.write_text('{"w": [0, "1/2"]}')
    _, out, _ = run(capsys, "superhedge", models / "ex41.json", "--claim", claim)
    assert json.loads(out)["price"] == "1/2"


def test_examples_ex43_smallest(capsys, tmp_path):
    p = tmp_path / "ex43.json"
    assert run(capsys, "examples", "ex43", "--n-max", "1", "-o", p)[0] == 0
    m = parse_model(p.read_text())
    assert m.d == 4 and m.tree.horizon == 3 and len(m.tree.leaves) == 4
    assert validate_model(m).ok


def test_dump_lp(models, capsys, tmp_path):
    dump = tmp_path / "lps"
    run(capsys, "check", models / "ex41.json", "--conditions", "na", "--dump-lp", dump)
    files = sorted(dump.iterdir())
    assert files and files[0].read_text().startswith("max ")


def test_properties_runner(capsys):
    code, out, _ = run(capsys, "properties", "--seed", "3", "--count", "4")
    res = load_json(out)
    assert code == 0 and res["models"] == 4
    assert all(v == 0 for v in res["violations"].values())


@pytest.mark.skipif(shutil.which("tcarb") is None, reason="console script not installed")
def test_console_script(models):
    r = subprocess.run(["tcarb", "check", str(models / "ex41.json"), "--conditions", "ef"], capture_output=True, text=True)
    assert r.returncode == 0 and '"EF"' in r.stdout
    r = subprocess.run([sys.executable, "-m", "tcarb", "check", "nope.json"], capture_output=True, text=True)
    assert r.returncode == 2
