"""Command-line interface: document emission, exit codes, benchmark wiring."""

import json

from click.testing import CliRunner

import dash.harness as H
import dash.scene as scene_mod
from dash.cli import main


def test_scene_gen_deterministic(tmp_path):
    runner = CliRunner()
    out1, out2 = tmp_path / "a.yaml", tmp_path / "b.yaml"
    for out in (out1, out2):
        res = runner.invoke(main, ["scene", "gen", "--seed", "7",
                                   "--out", str(out)])
        assert res.exit_code == 0, res.output
    assert out1.read_text() == out2.read_text()
    sc = scene_mod.parse_scene(out1.read_text())
    assert len(sc.objects) >= 1


def test_scene_gen_stdout_is_document():
    res = CliRunner().invoke(main, ["scene", "gen", "--seed", "3"])
    assert res.exit_code == 0
    assert res.output.startswith(scene_mod.SCENE_HEADER + "\n")


def test_lang_parse_emits_ast():
    res = CliRunner().invoke(
        main, ["lang", "parse", "put the red box on top of the blue box"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["ast"]["label"] == "command"


def test_lang_parse_failure_exit_code():
    res = CliRunner().invoke(main, ["lang", "parse", "flarb the wozzle"])
    assert res.exit_code != 0
    assert "ParseFailure" in res.output


def test_lang_parse_grounds_against_scene(tmp_path):
    runner = CliRunner()
    scene_file = tmp_path / "scene.yaml"
    runner.invoke(main, ["scene", "gen", "--seed", "2",
                         "--out", str(scene_file)])
    sc = scene_mod.parse_scene(scene_file.read_text())
    seen = {}
    for o in sc.objects:
        seen.setdefault((o.color, o.shape), []).append(o.id)
    unique = next((k for k, v in seen.items() if len(v) == 1), None)
    if unique is None:
        return  # fixture scene lacks a uniquely-describable object
    color, shape = unique
    res = runner.invoke(main, ["lang", "parse",
                               f"move the {color} {shape} at 0.1 0.2",
                               "--scene", str(scene_file)])
    assert res.exit_code == 0, res.output
    assert '"task"' in res.output
    assert seen[unique][0] in res.output


def test_bench_run_writes_report(tmp_path):
    res = CliRunner().invoke(main, [
        "bench", "run", "--place", "1", "--stack", "0",
        "--mode", "ground_truth", "--base-seed", "7",
        "--out", str(tmp_path)])
    assert res.exit_code == 0, res.output
    report_file = tmp_path / "report-ground_truth.yaml"
    report = H.report_from_doc(report_file.read_text())
    assert report.n_place == 1 and report.n_stack == 0
    assert report.trials[0].outcome in H.OUTCOMES


def test_bench_run_seed_file(tmp_path):
    seed_file = tmp_path / "seeds.txt"
    seed_file.write_text("11\n12\n")
    res = CliRunner().invoke(main, [
        "bench", "run", "--place", "2", "--stack", "0",
        "--mode", "ground_truth", "--seed-file", str(seed_file),
        "--out", str(tmp_path)])
    assert res.exit_code == 0, res.output
    report = H.report_from_doc(
        (tmp_path / "report-ground_truth.yaml").read_text())
    assert [t.seed for t in report.trials] == [11, 12]


def test_kernels_agreement():
    res = CliRunner().invoke(main, ["kernels", "--iters", "200"])
    assert res.exit_code == 0, res.output
    assert "speedup" in res.output
