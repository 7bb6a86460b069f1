import json

import jsonschema
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from systolab import reports
from systolab.cli import main
from systolab.cubical import read_chain
from systolab.service.app import create_app


@pytest.fixture
def runner():
    return CliRunner()


def test_slice_json_output(runner):
    result = runner.invoke(main, ["slice", "--stop", "5", "--step", "0.5"])
    assert result.exit_code == 0
    rows = json.loads(result.output)
    assert len(rows) == 11
    jsonschema.validate(rows, reports.array_schema("slice"))


def test_slice_empty_range_is_usage_error(runner):
    result = runner.invoke(main, ["slice", "--start", "2", "--stop", "1"])
    assert result.exit_code == 2
    assert "empty range" in result.output


def test_cylinder_rejects_j_zero(runner):
    result = runner.invoke(main, ["cylinder", "--j", "0"])
    assert result.exit_code == 2


def test_lp_res_parsing(runner):
    result = runner.invoke(main, ["lp", "--j", "1", "--res", "8,2"])
    assert result.exit_code == 2
    assert "NX,NY,NZ" in result.output


def test_lp_writes_chain_file(runner, tmp_path):
    out = tmp_path / "lp.json"
    chain_file = tmp_path / "chain.txt"
    result = runner.invoke(
        main,
        ["lp", "--j", "1", "--res", "4,2,2", "--out", str(out), "--chain-out", str(chain_file)],
    )
    assert result.exit_code == 0, result.output
    rec = json.loads(out.read_text())[0]
    assert rec["converged"] and rec["certificate_ok"]
    spec, chain = read_chain(chain_file.read_text())
    assert (spec.j, spec.nx, spec.ny, spec.nz) == (1, 4, 2, 2)
    assert chain.sum() > 0.0  # the optimal slab is positively oriented


def test_sweep_deterministic_bytes(runner, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        result = runner.invoke(
            main,
            ["sweep", "--j-max", "2", "--seed", "0", "--format", "csv", "--out", str(p)],
        )
        assert result.exit_code == 0, result.output
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_sweep_csv_and_json_agree(runner, tmp_path):
    jpath = tmp_path / "s.json"
    cpath = tmp_path / "s.csv"
    for fmt, path in (("json", jpath), ("csv", cpath)):
        result = runner.invoke(
            main, ["sweep", "--j-max", "2", "--format", fmt, "--out", str(path)]
        )
        assert result.exit_code == 0, result.output
    assert json.loads(jpath.read_text()) == reports.from_csv(cpath.read_text(), "freedom")


def test_torus3_small_j_flags_in_csv(runner):
    result = runner.invoke(main, ["torus3", "--j", "1", "--format", "csv"])
    assert result.exit_code == 0, result.output
    body = result.output
    assert "sys1-estimate-not-certified;small-j-pairing-uncertified" in body


def test_verify_subset_passes(runner):
    result = runner.invoke(main, ["verify", "--criteria", "9,13"])
    assert result.exit_code == 0, result.output
    assert "criterion  9 PASS" in result.output
    assert "criterion 13 PASS" in result.output
    records = json.loads(result.output[result.output.index("[") :])
    jsonschema.validate(records, reports.array_schema("verify"))


def test_verify_rejects_bad_criteria(runner):
    assert runner.invoke(main, ["verify", "--criteria", "0"]).exit_code == 2
    assert runner.invoke(main, ["verify", "--criteria", "a,b"]).exit_code == 2


def test_server_mode_matches_in_process(runner, monkeypatch):
    http = TestClient(create_app())

    def fake_post(url, json=None, timeout=None):
        path = url.removeprefix("http://testserver")
        return http.post(path, json=json)

    import httpx

    monkeypatch.setattr(httpx, "post", fake_post)
    args = ["slice", "--stop", "3", "--step", "0.5"]
    local = runner.invoke(main, args)
    remote = runner.invoke(main, args + ["--server", "http://testserver"])
    assert remote.exit_code == 0, remote.output
    assert remote.output == local.output


def test_server_mode_usage_error_passthrough(runner, monkeypatch):
    http = TestClient(create_app())

    def fake_post(url, json=None, timeout=None):
        path = url.removeprefix("http://testserver")
        return http.post(path, json=json)

    import httpx

    monkeypatch.setattr(httpx, "post", fake_post)
    # passes request validation, fails domain validation on the server
    result = runner.invoke(
        main, ["lp", "--j", "2", "--res", "4,8,8", "--server", "http://testserver"]
    )
    assert result.exit_code == 2
