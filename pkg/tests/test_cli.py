"""CLI behavior: golden outputs, exit codes, file emission, schemas."""

import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from ddr.cli import EXIT_ASSET, EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from ddr.images import load_image


@pytest.fixture(autouse=True)
def _no_ambient_assets(monkeypatch):
    monkeypatch.delenv("DDR_ASSETS_DIR", raising=False)


@pytest.fixture
def in_fixtures(monkeypatch, fixtures_dir):
    monkeypatch.chdir(fixtures_dir)
    return fixtures_dir


def run(argv):
    return main(argv)


def load_schema(name):
    text = resources.files("ddr.schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(report, name):
    jsonschema.validate(report, load_schema(name))


# ---------------------------------------------------------------------------
# golden smoke (stub assets, committed goldens, bitwise)
# ---------------------------------------------------------------------------

def test_score_matches_golden_bitwise(in_fixtures, tmp_path, golden_dir):
    out = tmp_path / "score.json"
    rc = run(
        ["score", "images/img_01.png", "--assets", "stub_assets",
         "--out", str(out), "--no-figures"]
    )
    assert rc == EXIT_OK
    assert out.read_bytes() == (golden_dir / "score_img_01.json").read_bytes()


def test_eval_matches_golden_bitwise(in_fixtures, tmp_path, golden_dir):
    out = tmp_path / "eval.json"
    rc = run(
        ["eval", "manifest.csv", "--assets", "stub_assets",
         "--out", str(out), "--no-figures"]
    )
    assert rc == EXIT_OK
    assert out.read_bytes() == (golden_dir / "eval_fixture.json").read_bytes()


def test_score_deterministic_across_runs(in_fixtures, tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"score{i}.json"
        assert run(
            ["score", "images/img_02.png", "--assets", "stub_assets",
             "--out", str(out), "--no-figures"]
        ) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_score_schema_and_structure(in_fixtures, tmp_path):
    out = tmp_path / "score.json"
    run(["score", "images/img_03.png", "--assets", "stub_assets",
         "--out", str(out), "--no-figures"])
    report = json.loads(out.read_text())
    validate(report, "score")
    assert report["degradation_set"] == ["color", "noise", "blur", "exposure"]
    assert len(report["ddr"]) == 4
    assert report["q_ddr"] == pytest.approx(
        sum(report["ddr"].values()) / 4, abs=1e-15
    )


def test_eval_schema(in_fixtures, tmp_path):
    out = tmp_path / "eval.json"
    run(["eval", "manifest.csv", "--assets", "stub_assets",
         "--out", str(out), "--no-figures"])
    report = json.loads(out.read_text())
    validate(report, "eval")
    assert report["n_images"] == 5
    assert -1.0 <= report["srcc"] <= 1.0


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------

def test_usage_errors_exit_1(in_fixtures, capsys):
    with pytest.raises(SystemExit) as exc:
        run(["score"])  # missing image argument
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        run(["score", "x.png", "--bogus-flag"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        run(["not-a-command"])
    assert exc.value.code == EXIT_USAGE


def test_missing_assets_exit_2(in_fixtures, tmp_path):
    rc = run(["score", "images/img_01.png", "--assets", str(tmp_path / "nope")])
    assert rc == EXIT_ASSET
    # no assets given anywhere
    rc = run(["score", "images/img_01.png"])
    assert rc == EXIT_ASSET


def test_corrupt_assets_exit_2(in_fixtures, tmp_path, stub_assets_dir):
    import shutil

    bad = tmp_path / "assets"
    shutil.copytree(stub_assets_dir, bad)
    (bad / "image_encoder.onnx").write_bytes(b"junk")
    rc = run(["score", "images/img_01.png", "--assets", str(bad)])
    assert rc == EXIT_ASSET


def test_unreadable_image_exit_3(in_fixtures):
    rc = run(["score", "images/missing.png", "--assets", "stub_assets"])
    assert rc == EXIT_DATA


def test_bad_config_exit_1(in_fixtures, tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("unknown_key: 1\n", encoding="utf-8")
    rc = run(["score", "images/img_01.png", "--assets", "stub_assets",
              "--config", str(cfg)])
    assert rc == EXIT_USAGE


def test_figures_without_out_exit_1(in_fixtures):
    rc = run(["score", "images/img_01.png", "--assets", "stub_assets", "--figures"])
    assert rc == EXIT_USAGE


def test_eval_failure_rate_exit_3(in_fixtures, tmp_path):
    manifest = tmp_path / "m.csv"
    manifest.write_text(
        "path,mos\n"
        + "\n".join(
            f"{in_fixtures}/images/img_0{i}.png,{i * 10.0}" for i in range(1, 6)
        )
        + f"\n{tmp_path}/missing.png,50.0\n",
        encoding="utf-8",
    )
    out = tmp_path / "eval.json"
    rc = run(["eval", str(manifest), "--assets", "stub_assets",
              "--out", str(out), "--no-figures"])
    assert rc == EXIT_DATA  # 1/6 > 10%
    report = json.loads(out.read_text())
    assert len(report["failures"]) == 1
    assert report["n_images"] == 5


def test_eval_too_few_valid_records_exit_3(in_fixtures, tmp_path):
    manifest = tmp_path / "m.csv"
    manifest.write_text("path,mos\nmissing_a.png,1.0\nmissing_b.png,2.0\n", encoding="utf-8")
    rc = run(["eval", str(manifest), "--assets", "stub_assets", "--no-figures"])
    assert rc == EXIT_DATA


# ---------------------------------------------------------------------------
# degrade
# ---------------------------------------------------------------------------

def test_degrade_identity_round_trips(in_fixtures, tmp_path):
    out_dir = tmp_path / "degraded"
    rc = run(["degrade", "images/img_01.png", "--spec", "exposure:0",
              "--out-dir", str(out_dir), "--out", str(tmp_path / "report.json"),
              "--no-figures"])
    assert rc == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text())
    validate(report, "degrade")
    produced = out_dir / report["outputs"][0]
    original = load_image(in_fixtures / "images" / "img_01.png")
    assert np.array_equal(load_image(produced), original)


def test_degrade_ladder_writes_one_file_per_level(in_fixtures, tmp_path):
    out_dir = tmp_path / "ladder"
    report_path = tmp_path / "ladder.json"
    rc = run(["degrade", "images/img_02.png", "--ladder", "gaussian_blur",
              "--levels", "0,1,2", "--out-dir", str(out_dir),
              "--out", str(report_path)])
    assert rc == EXIT_OK
    report = json.loads(report_path.read_text())
    assert len(report["outputs"]) == 3
    for name in report["outputs"]:
        assert (out_dir / name).stat().st_size > 0
    # figures default on when --out is given
    assert report_path.with_suffix(".png").stat().st_size > 0


def test_degrade_seeded_noise_reproducible(in_fixtures, tmp_path):
    images = []
    for i in range(2):
        out_dir = tmp_path / f"run{i}"
        rc = run(["degrade", "images/img_03.png", "--spec", "gaussian_noise:0.1:7",
                  "--out-dir", str(out_dir), "--no-figures"])
        assert rc == EXIT_OK
        produced = list(out_dir.glob("*.png"))
        assert len(produced) == 1
        images.append(load_image(produced[0]))
    assert np.array_equal(images[0], images[1])


def test_degrade_requires_exactly_one_mode(in_fixtures, tmp_path):
    rc = run(["degrade", "images/img_01.png", "--out-dir", str(tmp_path)])
    assert rc == EXIT_USAGE
    rc = run(["degrade", "images/img_01.png", "--spec", "exposure:1",
              "--ladder", "gaussian_blur", "--levels", "0,1",
              "--out-dir", str(tmp_path)])
    assert rc == EXIT_USAGE


def test_degrade_rejects_bad_spec(in_fixtures, tmp_path):
    rc = run(["degrade", "images/img_01.png", "--spec", "vignette:1",
              "--out-dir", str(tmp_path)])
    assert rc == EXIT_USAGE


# ---------------------------------------------------------------------------
# correlate
# ---------------------------------------------------------------------------

def test_correlate_table(in_fixtures, tmp_path):
    out = tmp_path / "corr.json"
    rc = run(["correlate", "manifest.csv", "--assets", "stub_assets",
              "--out", str(out), "--no-figures"])
    assert rc == EXIT_OK
    report = json.loads(out.read_text())
    validate(report, "correlate")
    assert [row["degradation"] for row in report["rows"]] == [
        "color", "noise", "blur", "exposure"
    ]
    for row in report["rows"]:
        for col in ("colorfulness", "sharpness", "quality"):
            assert -1.0 <= row[col] <= 1.0


def test_correlate_single_type_single_row(in_fixtures, tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("degradation_set:\n  - type: blur\n", encoding="utf-8")
    out = tmp_path / "corr.json"
    rc = run(["correlate", "manifest.csv", "--assets", "stub_assets",
              "--config", str(cfg), "--out", str(out), "--no-figures"])
    assert rc == EXIT_OK
    report = json.loads(out.read_text())
    assert len(report["rows"]) == 1
    assert report["rows"][0]["degradation"] == "blur"


# ---------------------------------------------------------------------------
# objective
# ---------------------------------------------------------------------------

def test_objective_identical_inputs_flagged(in_fixtures, tmp_path):
    out = tmp_path / "obj.json"
    rc = run(["objective", "images/img_01.png", "images/img_01.png",
              "--assets", "stub_assets", "--out", str(out), "--no-figures"])
    assert rc == EXIT_OK
    report = json.loads(out.read_text())
    validate(report, "objective")
    assert report["identical_inputs"] is True
    assert report["psnr_db"] is None
    assert report["objective"] is None
    assert report["ddr_total"] > 0


def test_objective_lambda_zero_is_reconstruction(in_fixtures, tmp_path):
    out = tmp_path / "obj.json"
    rc = run(["objective", "images/img_01.png", "images/img_02.png",
              "--assets", "stub_assets", "--lambda-d", "0",
              "--out", str(out), "--no-figures"])
    assert rc == EXIT_OK
    report = json.loads(out.read_text())
    validate(report, "objective")
    assert report["objective"] == pytest.approx(report["reconstruction"], abs=1e-12)


def test_objective_linear_in_lambda(in_fixtures, tmp_path):
    values = {}
    for lam in (1.0, 2.0, 3.0):
        out = tmp_path / f"obj{lam}.json"
        rc = run(["objective", "images/img_03.png", "images/img_04.png",
                  "--assets", "stub_assets", "--lambda-d", str(lam),
                  "--out", str(out), "--no-figures"])
        assert rc == EXIT_OK
        values[lam] = json.loads(out.read_text())
    total = values[1.0]["ddr_total"]
    assert values[2.0]["ddr_total"] == pytest.approx(total, abs=1e-15)
    assert values[1.0]["objective"] - values[2.0]["objective"] == pytest.approx(
        total, abs=1e-9
    )
    assert values[2.0]["objective"] - values[3.0]["objective"] == pytest.approx(
        total, abs=1e-9
    )


# ---------------------------------------------------------------------------
# config, formats, figures
# ---------------------------------------------------------------------------

def test_restoration_set_flag(in_fixtures, tmp_path):
    out = tmp_path / "score.json"
    rc = run(["score", "images/img_01.png", "--assets", "stub_assets",
              "--set", "restoration", "--out", str(out), "--no-figures"])
    assert rc == EXIT_OK
    report = json.loads(out.read_text())
    assert report["degradation_set"] == ["color", "content", "blur"]


def test_custom_prompts_via_config(in_fixtures, tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(
        "degradation_set:\n"
        "  - type: blur\n"
        "    degraded_prompt: an extremely blurry frame\n"
        "    clean_prompt: a tack sharp frame\n",
        encoding="utf-8",
    )
    out = tmp_path / "score.json"
    rc = run(["score", "images/img_01.png", "--assets", "stub_assets",
              "--config", str(cfg), "--out", str(out), "--no-figures"])
    assert rc == EXIT_OK
    report = json.loads(out.read_text())
    assert report["degradation_set"] == ["blur"]


def test_env_var_assets_fallback(in_fixtures, monkeypatch, tmp_path, stub_assets_dir):
    monkeypatch.setenv("DDR_ASSETS_DIR", str(stub_assets_dir))
    out = tmp_path / "score.json"
    rc = run(["score", "images/img_01.png", "--out", str(out), "--no-figures"])
    assert rc == EXIT_OK


def test_eval_csv_format(in_fixtures, tmp_path):
    out = tmp_path / "eval.csv"
    rc = run(["eval", "manifest.csv", "--assets", "stub_assets",
              "--format", "csv", "--out", str(out), "--no-figures"])
    assert rc == EXIT_OK
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "path,q_ddr,mos"
    assert len(lines) == 6


def test_score_csv_format(in_fixtures, tmp_path):
    out = tmp_path / "score.csv"
    rc = run(["score", "images/img_01.png", "--assets", "stub_assets",
              "--format", "csv", "--out", str(out), "--no-figures"])
    assert rc == EXIT_OK
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "degradation,value"
    assert lines[-1].startswith("q_ddr,")


def test_eval_renders_figures_by_default(in_fixtures, tmp_path):
    out = tmp_path / "eval.json"
    rc = run(["eval", "manifest.csv", "--assets", "stub_assets", "--out", str(out)])
    assert rc == EXIT_OK
    assert (tmp_path / "eval_scatter.png").stat().st_size > 0
    assert (tmp_path / "eval_hist.png").stat().st_size > 0


def test_score_figure_rendered(in_fixtures, tmp_path):
    out = tmp_path / "score.json"
    rc = run(["score", "images/img_01.png", "--assets", "stub_assets",
              "--out", str(out), "--figures"])
    assert rc == EXIT_OK
    assert (tmp_path / "score.png").stat().st_size > 0


def test_correlate_figure_rendered(in_fixtures, tmp_path):
    out = tmp_path / "corr.json"
    rc = run(["correlate", "manifest.csv", "--assets", "stub_assets", "--out", str(out)])
    assert rc == EXIT_OK
    assert (tmp_path / "corr.png").stat().st_size > 0


def test_objective_figure_rendered(in_fixtures, tmp_path):
    out = tmp_path / "obj.json"
    rc = run(["objective", "images/img_01.png", "images/img_02.png",
              "--assets", "stub_assets", "--out", str(out)])
    assert rc == EXIT_OK
    assert (tmp_path / "obj.png").stat().st_size > 0


def test_stdout_output(in_fixtures, capsys):
    rc = run(["score", "images/img_01.png", "--assets", "stub_assets"])
    assert rc == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    validate(report, "score")
