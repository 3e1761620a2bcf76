import json

import numpy as np
import pytest

from gelinspect import bench
from gelinspect.cli import collect_inputs, main
from gelinspect.imageio import load_image, save_gray16


@pytest.fixture
def image_dir(tmp_path):
    rng = np.random.default_rng(42)
    d = tmp_path / "images"
    d.mkdir()
    save_gray16(d / "alpha.png", rng.random((24, 30)))
    save_gray16(d / "beta.png", rng.random((16, 16)))
    return d


class TestCollectInputs:
    def test_directory_scan_is_flat_sorted(self, image_dir, tmp_path):
        nested = image_dir / "sub"
        nested.mkdir()
        save_gray16(nested / "gamma.png", np.zeros((4, 4)))
        (image_dir / "notes.txt").write_text("ignore me\n")
        names = [p.name for p in collect_inputs([str(image_dir)])]
        assert names == ["alpha.png", "beta.png"]

    def test_deduplicates_file_and_directory_mention(self, image_dir):
        paths = collect_inputs([str(image_dir), str(image_dir / "alpha.png")])
        assert [p.name for p in paths] == ["alpha.png", "beta.png"]

    def test_rejects_unsupported_extension(self, tmp_path):
        weird = tmp_path / "data.tiff"
        weird.write_bytes(b"")
        with pytest.raises(ValueError):
            collect_inputs([str(weird)])

    def test_rejects_missing_input(self, tmp_path):
        with pytest.raises(ValueError):
            collect_inputs([str(tmp_path / "nope.png")])


class TestInquire:
    def test_writes_all_artifacts_and_summary(self, image_dir, tmp_path):
        out = tmp_path / "out"
        rc = main(["inquire", str(image_dir), "--out-dir", str(out)])
        assert rc == 0
        for stem in ("alpha", "beta"):
            for kind in ("background", "residue", "indicator", "overlay"):
                assert (out / f"{stem}.{kind}.png").is_file()
            report = json.loads((out / f"{stem}.report.json").read_text())
            assert report["artifact_paths"] == [
                f"{stem}.background.png", f"{stem}.residue.png",
                f"{stem}.indicator.png", f"{stem}.overlay.png"]
        summary = json.loads((out / "batch_summary.json").read_text())
        assert summary["schema_version"] == 1
        assert [r["stem"] for r in summary["results"]] == ["alpha", "beta"]
        assert all(r["error"] is None for r in summary["results"])

    def test_emit_subset(self, image_dir, tmp_path):
        out = tmp_path / "out"
        rc = main(["inquire", str(image_dir / "beta.png"), "--out-dir", str(out),
                   "--emit", "indicator", "--emit", "report"])
        assert rc == 0
        assert (out / "beta.indicator.png").is_file()
        assert not (out / "beta.background.png").exists()
        report = json.loads((out / "beta.report.json").read_text())
        assert report["artifact_paths"] == ["beta.indicator.png"]

    def test_custom_params_land_in_reports(self, image_dir, tmp_path):
        out = tmp_path / "out"
        rc = main(["inquire", str(image_dir / "beta.png"), "--out-dir", str(out),
                   "--lambda", "0.25", "--gamma", "0.125"])
        assert rc == 0
        report = json.loads((out / "beta.report.json").read_text())
        assert report["params"]["lambda"] == 0.25
        assert report["params"]["gamma"] == 0.125

    def test_bad_gamma_is_usage_error(self, image_dir, tmp_path):
        rc = main(["inquire", str(image_dir), "--out-dir", str(tmp_path / "o"),
                   "--gamma", "2.0"])
        assert rc == 2

    def test_missing_input_is_usage_error(self, tmp_path):
        rc = main(["inquire", str(tmp_path / "absent.png"),
                   "--out-dir", str(tmp_path / "o")])
        assert rc == 2

    def test_corrupt_file_fails_without_stopping_batch(self, image_dir, tmp_path):
        (image_dir / "broken.png").write_bytes(b"not a png")
        out = tmp_path / "out"
        rc = main(["inquire", str(image_dir), "--out-dir", str(out)])
        assert rc == 1
        summary = json.loads((out / "batch_summary.json").read_text())
        by_stem = {r["stem"]: r for r in summary["results"]}
        assert by_stem["broken"]["error"]
        assert by_stem["alpha"]["error"] is None
        assert (out / "alpha.report.json").is_file()

    def test_duplicate_stems_conflict(self, image_dir, tmp_path):
        other = tmp_path / "other"
        other.mkdir()
        save_gray16(other / "alpha.png", np.full((8, 8), 0.25))
        out = tmp_path / "out"
        rc = main(["inquire", str(image_dir), str(other), "--out-dir", str(out)])
        assert rc == 1
        summary = json.loads((out / "batch_summary.json").read_text())
        errors = [r for r in summary["results"] if r["error"]]
        assert len(errors) == 1
        assert errors[0]["error"] == "duplicate output stem"

    def test_parallel_run_matches_serial_run(self, image_dir, tmp_path):
        out1, out2 = tmp_path / "serial", tmp_path / "parallel"
        assert main(["inquire", str(image_dir), "--out-dir", str(out1),
                     "--jobs", "1"]) == 0
        assert main(["inquire", str(image_dir), "--out-dir", str(out2),
                     "--jobs", "4"]) == 0
        names = sorted(p.name for p in out1.iterdir())
        assert names == sorted(p.name for p in out2.iterdir())
        for name in names:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestCompare:
    def test_reports_offset_and_psnr(self, tmp_path, capsys):
        rng = np.random.default_rng(7)
        big = rng.random((40, 50))
        save_gray16(tmp_path / "big.png", big)
        save_gray16(tmp_path / "crop.png", big[10:26, 20:36])
        rc = main(["compare", str(tmp_path / "crop.png"), str(tmp_path / "big.png")])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["offset"] == [10, 20]
        assert doc["exact_match"] is True
        assert doc["psnr_db"] is None

    def test_noisy_match_reports_finite_psnr(self, tmp_path, capsys):
        rng = np.random.default_rng(8)
        big = rng.random((30, 30))
        crop = np.clip(big[5:15, 5:15] + 0.01, 0.0, 1.0)
        save_gray16(tmp_path / "big.png", big)
        save_gray16(tmp_path / "crop.png", crop)
        rc = main(["compare", str(tmp_path / "crop.png"), str(tmp_path / "big.png")])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["exact_match"] is False
        assert doc["psnr_db"] > 20.0

    def test_on_residue_flag(self, tmp_path, capsys):
        rng = np.random.default_rng(9)
        big = rng.random((24, 24))
        save_gray16(tmp_path / "big.png", big)
        save_gray16(tmp_path / "crop.png", big[4:20, 4:20])
        rc = main(["compare", str(tmp_path / "crop.png"), str(tmp_path / "big.png"),
                   "--on-residue"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert set(doc) == {"offset", "mse", "psnr_db", "exact_match"}

    def test_oversized_template_is_usage_error(self, tmp_path):
        save_gray16(tmp_path / "big.png", np.zeros((8, 8)))
        save_gray16(tmp_path / "crop.png", np.zeros((16, 16)))
        rc = main(["compare", str(tmp_path / "crop.png"), str(tmp_path / "big.png")])
        assert rc == 2


class TestBenchCommands:
    def test_generate_writes_corpus(self, tmp_path):
        out = tmp_path / "corpus"
        rc = main(["bench-generate", "--out-dir", str(out), "--seed", "2026"])
        assert rc == 0
        for name in ("unmodified", "copy_paste", "erasure"):
            stored = load_image(out / f"{name}.png")
            assert stored.shape == (256, 512)
        scene = bench.SceneSpec.from_json_dict(
            json.loads((out / "scene.json").read_text()))
        assert scene == bench.default_scene()
        ops = json.loads((out / "forgeries.json").read_text())
        assert bench.ForgeryOp.from_json_dict(ops["copy_paste"]) == bench.copy_paste_op()
        assert bench.ForgeryOp.from_json_dict(ops["erase"]) == bench.erase_op()
        assert ops["seed"] == 2026

    def test_generated_pixels_match_in_memory_scenes(self, tmp_path):
        out = tmp_path / "corpus"
        assert main(["bench-generate", "--out-dir", str(out)]) == 0
        stored = load_image(out / "erasure.png")
        direct = bench.build_erasure_image()
        assert np.abs(stored - direct).max() <= 0.5 / 65535.0

    def test_sweep_writes_table(self, tmp_path, capsys):
        out = tmp_path / "sweep.json"
        rc = main(["bench-sweep", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["schema_version"] == 1
        assert len(doc["rows"]) == 64
        assert "64 rows" in capsys.readouterr().out


class TestParsing:
    def test_unknown_subcommand_exits_two(self):
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code == 2

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["--version"])
        assert err.value.code == 0
        assert "gelinspect" in capsys.readouterr().out
