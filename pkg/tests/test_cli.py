"""Command line interface: verbs, summaries, and exit codes."""

import json
import subprocess
import sys

import numpy as np
import pytest

from fsr import cli
from fsr.images import decode_png16, decode_png16_indices
from fsr.representation import deserialize


def run_cli(capsys, *argv):
    """Invoke the CLI in-process; returns (exit code, stdout, stderr)."""
    rc = cli.main([str(a) for a in argv])
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


class TestSynth:
    def test_writes_manifest_slices_and_ground_truth(self, stack_dir):
        assert (stack_dir / "stack.json").exists()
        names = json.loads((stack_dir / "stack.json").read_text())["slices"]
        assert len(names) == 6
        assert all((stack_dir / n).exists() for n in names)
        assert (stack_dir / "gt_labels.png").exists()
        assert (stack_dir / "gt_dual.png").exists()
        assert (stack_dir / "gt_meta.json").exists()

    @pytest.mark.parametrize("scene", ["two-plane", "bokeh", "vignette"])
    def test_all_scene_kinds_render(self, capsys, tmp_path, scene):
        rc, out, _ = run_cli(
            capsys, "synth", tmp_path / scene, "--scene", scene,
            "--size", "64", "--k", "4", "--seed", "1",
        )
        assert rc == 0
        assert json.loads(out)["k"] == 4
        assert (tmp_path / scene / "stack.json").exists()

    def test_unknown_scene_rejected_by_parser(self, capsys, tmp_path):
        with pytest.raises(SystemExit) as excinfo:
            cli.main(["synth", str(tmp_path / "x"), "--scene", "nope"])
        assert excinfo.value.code == 2
        assert "invalid choice" in capsys.readouterr().err


class TestBuild:
    def test_summary_json(self, capsys, stack_dir, tmp_path):
        rc, out, _ = run_cli(capsys, "build", stack_dir, tmp_path / "cont")
        assert rc == 0
        summary = json.loads(out)
        assert summary["k"] == 6
        assert summary["labels"] == [0, 1, 2, 3, 4, 5]
        assert summary["dual_count"] >= 0
        assert summary["container_bytes"] > 0
        rep = deserialize(tmp_path / "cont")
        assert rep.k == 6

    def test_missing_slices_exit_2(self, capsys, stack_dir, tmp_path):
        broken = tmp_path / "broken"
        broken.mkdir()
        (broken / "stack.json").write_text((stack_dir / "stack.json").read_text())
        rc, _, err = run_cli(capsys, "build", broken, tmp_path / "cont")
        assert rc == 2
        assert json.loads(err)["error"] == "MissingSlices"

    def test_nonexistent_stack_exit_1(self, capsys, tmp_path):
        rc, _, err = run_cli(capsys, "build", tmp_path / "nope", tmp_path / "cont")
        assert rc == 1
        assert "error" in json.loads(err)

    def test_rejects_bad_threshold(self, capsys, stack_dir, tmp_path):
        rc, _, err = run_cli(
            capsys, "build", stack_dir, tmp_path / "cont", "--w-frac", "1.5"
        )
        assert rc == 1
        assert "error" in json.loads(err)


class TestRefocus:
    def test_single_slice_reconstructs_input(self, capsys, container_dir, stack_dir, tmp_path):
        rc, out, _ = run_cli(
            capsys, "refocus", container_dir, tmp_path / "s2.png",
            "--slice", "2", "--compare", stack_dir / "slice_02.png",
        )
        assert rc == 0
        quality = json.loads(out)
        assert quality["psnr"] > 35.0
        assert quality["ssim"] > 0.9

    def test_aif_matches_stored_composite(self, capsys, container_dir, tmp_path):
        rc, _, _ = run_cli(capsys, "refocus", container_dir, tmp_path / "aif.png", "--aif")
        assert rc == 0
        rendered = decode_png16((tmp_path / "aif.png").read_bytes())
        rep = deserialize(container_dir)
        assert np.array_equal(rendered, rep.focusmap.image)

    def test_range_and_labels_agree(self, capsys, container_dir, tmp_path):
        rc1, _, _ = run_cli(
            capsys, "refocus", container_dir, tmp_path / "r.png", "--range", "1", "3"
        )
        rc2, _, _ = run_cli(
            capsys, "refocus", container_dir, tmp_path / "l.png", "--labels", "1,2,3"
        )
        assert rc1 == rc2 == 0
        assert (tmp_path / "r.png").read_bytes() == (tmp_path / "l.png").read_bytes()

    def test_out_of_range_slice_exit_3(self, capsys, container_dir, tmp_path):
        rc, _, err = run_cli(
            capsys, "refocus", container_dir, tmp_path / "x.png", "--slice", "99"
        )
        assert rc == 3
        assert json.loads(err)["error"] == "InvalidTargets"

    def test_no_target_flag_exit_3(self, capsys, container_dir, tmp_path):
        rc, _, err = run_cli(capsys, "refocus", container_dir, tmp_path / "x.png")
        assert rc == 3
        assert json.loads(err)["error"] == "InvalidTargets"


class TestAnalyzeMeasures:
    def test_report_and_saved_composite(self, capsys, stack_dir, tmp_path):
        out_json = tmp_path / "cfm.json"
        rc, out, _ = run_cli(
            capsys, "analyze-measures", stack_dir, "--members", "5", "--out", out_json
        )
        assert rc == 0
        report = json.loads(out)
        assert set(report) >= {"consensus", "clusters", "m_star", "members"}
        assert len(report["consensus"]) == 12
        assert all(0.0 <= v <= 1.0 for v in report["consensus"].values())
        saved = json.loads(out_json.read_text())
        assert [m["name"] for m in saved["members"]] == [
            m["name"] for m in report["members"]
        ]

    def test_custom_cfm_feeds_build(self, capsys, stack_dir, tmp_path):
        out_json = tmp_path / "cfm.json"
        rc, _, _ = run_cli(capsys, "analyze-measures", stack_dir, "--out", out_json)
        assert rc == 0
        rc, out, _ = run_cli(
            capsys, "build", stack_dir, tmp_path / "cont", "--cfm", out_json
        )
        assert rc == 0
        assert json.loads(out)["k"] == 6


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "fsr.cli", "--help"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        for verb in ("build", "refocus", "analyze-measures", "synth", "serve"):
            assert verb in proc.stdout
