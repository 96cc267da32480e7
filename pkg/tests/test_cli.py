"""CLI subcommands, exit codes, and wire formats."""

import json
import subprocess
import sys

import numpy as np
import pytest

from trajseg import save_mask_png
from trajseg.cli import main

from conftest import random_blob_masks


def run_cli(args, stdin: str = "") -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "trajseg.cli", *args],
        input=stdin, capture_output=True, text=True)


@pytest.fixture
def square_png(tmp_path, square_mask_5x5):
    p = tmp_path / "sq.png"
    save_mask_png(square_mask_5x5, p)
    return p


@pytest.fixture
def gt_dir(tmp_path):
    d = tmp_path / "gt"
    d.mkdir()
    for i, m in enumerate(random_blob_masks(seed=71, count=3, n=40)):
        save_mask_png(m, d / f"g{i}.png")
    return d


SQUARE_TEXT = "[[0.200, 0.200], [0.600, 0.200], [0.600, 0.600], [0.200, 0.600]]"


class TestEncodeDecode:
    def test_encode_square(self, square_png):
        r = run_cli(["encode", "--mask", str(square_png), "--epsilon", "0"])
        assert r.returncode == 0
        assert r.stdout == SQUARE_TEXT + "\n"

    def test_encode_empty_mask(self, tmp_path):
        p = tmp_path / "empty.png"
        save_mask_png(np.zeros((4, 4), dtype=bool), p)
        r = run_cli(["encode", "--mask", str(p)])
        assert r.returncode == 2
        assert "empty mask" in r.stderr

    def test_encode_bad_path(self, tmp_path):
        r = run_cli(["encode", "--mask", str(tmp_path / "missing.png")])
        assert r.returncode == 2

    def test_decode_square(self, tmp_path, square_mask_5x5):
        out = tmp_path / "out.png"
        r = run_cli(["decode", "--text", SQUARE_TEXT, "--width", "5",
                     "--height", "5", "--out", str(out)])
        assert r.returncode == 0
        from trajseg import load_mask_png
        assert (load_mask_png(out) == square_mask_5x5).all()

    def test_decode_malformed_reports_offset(self, tmp_path):
        r = run_cli(["decode", "--text", "[[0.1, 0.2], [0.3",
                     "--width", "5", "--height", "5",
                     "--out", str(tmp_path / "x.png")])
        assert r.returncode == 2
        assert "Malformed" in r.stderr and "17" in r.stderr

    def test_decode_stdin(self, tmp_path, square_mask_5x5):
        out = tmp_path / "out.png"
        r = run_cli(["decode", "--text", "-", "--width", "5", "--height", "5",
                     "--out", str(out)], stdin=SQUARE_TEXT)
        assert r.returncode == 0

    def test_encode_decode_roundtrip(self, tmp_path):
        from trajseg import load_mask_png, mask_iou

        for i, m in enumerate(random_blob_masks(seed=72, count=3, n=40)):
            src = tmp_path / f"m{i}.png"
            dst = tmp_path / f"rt{i}.png"
            save_mask_png(m, src)
            enc = run_cli(["encode", "--mask", str(src), "--epsilon", "0"])
            dec = run_cli(["decode", "--text", enc.stdout.strip(),
                           "--width", "40", "--height", "40", "--out", str(dst)])
            assert dec.returncode == 0
            assert mask_iou(load_mask_png(dst), m) == 1.0

    def test_usage_error_is_exit_1(self):
        assert run_cli(["decode", "--width", "5"]).returncode == 1
        assert run_cli(["nonsense"]).returncode == 1


class TestReward:
    def test_streaming_rewards(self, gt_dir):
        from trajseg import load_mask_png

        lines = []
        for p in sorted(gt_dir.glob("*.png")):
            enc = run_cli(["encode", "--mask", str(p), "--epsilon", "0"])
            lines.append(json.dumps({"id": p.stem, "text": enc.stdout.strip()}))
        lines.insert(1, json.dumps({"id": "g0", "text": "[[broken"}))
        lines.insert(2, json.dumps({"id": "nosuch", "text": "[0.1, 0.2]"}))
        r = run_cli(["reward", "--gt-dir", str(gt_dir)], stdin="\n".join(lines))
        assert r.returncode == 0
        out = [json.loads(x) for x in r.stdout.strip().split("\n")]
        assert len(out) == len(lines)
        assert out[0]["total"] == 1.0 and out[0]["format_ok"]
        assert out[1]["total"] == 0.0 and not out[1]["format_ok"]
        assert out[2] == {"id": "nosuch", "error": "unknown-id"}

    def test_config_file(self, gt_dir, tmp_path):
        cfg = tmp_path / "r.cfg"
        cfg.write_text("tau=0.2\nscale=0.1\nw_dist=0.5\n")
        p = sorted(gt_dir.glob("*.png"))[0]
        enc = run_cli(["encode", "--mask", str(p), "--epsilon", "0"])
        line = json.dumps({"id": p.stem, "text": enc.stdout.strip()})
        r = run_cli(["reward", "--gt-dir", str(gt_dir), "--config", str(cfg)],
                    stdin=line)
        out = json.loads(r.stdout.strip())
        assert out["r_iou"] == pytest.approx(0.1)

    def test_unreadable_config_is_exit_1(self, gt_dir, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("tau=0.5\nwhat=1\n")
        r = run_cli(["reward", "--gt-dir", str(gt_dir), "--config", str(bad)])
        assert r.returncode == 1
        r2 = run_cli(["reward", "--gt-dir", str(gt_dir),
                      "--config", str(tmp_path / "missing.cfg")])
        assert r2.returncode == 1


class TestConvertEvaluateSweepSimulate:
    @pytest.fixture
    def coco_file(self, tmp_path):
        doc = {
            "images": [{"id": 1, "file_name": "a.jpg", "width": 5, "height": 5}],
            "annotations": [{
                "id": 7, "image_id": 1, "caption": "the block",
                "segmentation": [[1.0, 1.0, 3.0, 1.0, 3.0, 3.0, 1.0, 3.0]],
            }],
        }
        p = tmp_path / "coco.json"
        p.write_text(json.dumps(doc))
        return p

    def test_convert_full_task_set(self, coco_file):
        r = run_cli(["convert", "--coco", str(coco_file)])
        assert r.returncode == 0
        lines = r.stdout.strip().split("\n")
        assert len(lines) == 9
        rec = json.loads(lines[0])
        assert set(rec) == {"id", "image", "task", "prompt", "response"}

    def test_convert_task_filter_and_determinism(self, coco_file):
        args = ["convert", "--coco", str(coco_file),
                "--tasks", "point->mask,text->bbox", "--seed", "5"]
        a, b = run_cli(args), run_cli(args)
        assert a.stdout == b.stdout
        assert len(a.stdout.strip().split("\n")) == 2

    def test_convert_jobs_byte_identical(self, tmp_path, gt_dir):
        base = ["convert", "--masks-dir", str(gt_dir), "--seed", "2"]
        a = run_cli(base + ["--jobs", "1"])
        b = run_cli(base + ["--jobs", "2"])
        assert a.returncode == b.returncode == 0
        assert a.stdout == b.stdout

    def test_convert_skips_empty_instances(self, tmp_path):
        d = tmp_path / "masks"
        d.mkdir()
        m = np.zeros((8, 8), dtype=bool)
        save_mask_png(m, d / "empty.png")
        m[2:5, 2:5] = True
        save_mask_png(m, d / "solid.png")
        r = run_cli(["convert", "--masks-dir", str(d), "--tasks", "mask->bbox"])
        assert r.returncode == 0
        ids = [json.loads(x)["id"] for x in r.stdout.strip().split("\n")]
        assert ids == ["solid"]
        assert "skipped 1" in r.stderr

    def test_evaluate_perfect(self, tmp_path, gt_dir):
        preds = tmp_path / "preds.jsonl"
        with open(preds, "w") as f:
            for p in sorted(gt_dir.glob("*.png")):
                enc = run_cli(["encode", "--mask", str(p), "--epsilon", "0"])
                f.write(json.dumps({"id": p.stem, "text": enc.stdout.strip()}) + "\n")
        r = run_cli(["evaluate", "--preds", str(preds), "--masks-dir", str(gt_dir)])
        assert r.returncode == 0
        doc = json.loads(r.stdout)
        assert doc["corpus"]["ciou"] == 1.0
        assert doc["corpus"]["acc_at_05"] == 1.0

    def test_sweep_csv(self, gt_dir):
        r = run_cli(["sweep", "--masks-dir", str(gt_dir), "--eps", "0,0.01"])
        assert r.returncode == 0
        lines = r.stdout.strip().split("\n")
        assert lines[0] == "epsilon,mean_vertices,mean_chars,mean_roundtrip_iou"
        assert len(lines) == 3
        v1 = float(lines[1].split(",")[1])
        v2 = float(lines[2].split(",")[1])
        assert v2 <= v1

    def test_sweep_jobs_byte_identical(self, gt_dir):
        base = ["sweep", "--masks-dir", str(gt_dir), "--eps", "0,0.005,0.02"]
        a = run_cli(base + ["--jobs", "1"])
        b = run_cli(base + ["--jobs", "2"])
        assert a.stdout == b.stdout

    def test_simulate_group_schema(self, gt_dir):
        r = run_cli(["simulate", "--masks-dir", str(gt_dir), "--seed", "3",
                     "--group-size", "8"])
        assert r.returncode == 0
        for line in r.stdout.strip().split("\n"):
            rec = json.loads(line)
            assert set(rec) == {"id", "responses", "rewards", "advantages"}
            assert len(rec["responses"]) == 8
            assert len(rec["rewards"]) == len(rec["advantages"]) == 8
            assert abs(sum(rec["advantages"])) < 1e-9

    def test_simulate_deterministic(self, gt_dir):
        args = ["simulate", "--masks-dir", str(gt_dir), "--seed", "3"]
        assert run_cli(args).stdout == run_cli(args).stdout

    def test_convert_masks_dir_with_captions(self, gt_dir, tmp_path):
        captions = tmp_path / "caps.json"
        captions.write_text(json.dumps({"g0": "the first blob"}))
        r = run_cli(["convert", "--masks-dir", str(gt_dir),
                     "--captions", str(captions), "--tasks", "text->mask"])
        assert r.returncode == 0
        lines = [json.loads(x) for x in r.stdout.strip().split("\n")]
        # only g0 has a caption, so only g0 yields a text-input pair
        assert [rec["id"] for rec in lines] == ["g0"]
        assert "the first blob" in lines[0]["prompt"]

    def test_jobs_env_default(self, gt_dir):
        import os
        import subprocess as sp

        env = dict(os.environ, TRAJSEG_JOBS="2")
        r = sp.run([sys.executable, "-m", "trajseg.cli", "sweep",
                    "--masks-dir", str(gt_dir), "--eps", "0,0.01"],
                   capture_output=True, text=True, env=env)
        base = run_cli(["sweep", "--masks-dir", str(gt_dir), "--eps", "0,0.01"])
        assert r.returncode == 0
        assert r.stdout == base.stdout

    def test_decode_rejects_nonpositive_size(self, tmp_path):
        r = run_cli(["decode", "--text", SQUARE_TEXT, "--width", "0",
                     "--height", "5", "--out", str(tmp_path / "x.png")])
        assert r.returncode == 1


class TestRender:
    def test_render_text_overlay(self, tmp_path, square_png):
        from PIL import Image

        img = tmp_path / "img.png"
        Image.new("RGB", (20, 20), (10, 10, 10)).save(img)
        out = tmp_path / "out.png"
        r = run_cli(["render", "--image", str(img), "--text", SQUARE_TEXT,
                     "--out", str(out)])
        assert r.returncode == 0
        with Image.open(out) as rendered:
            arr = np.asarray(rendered.convert("RGB"))
        assert (arr[8, 8] != (10, 10, 10)).any()     # overlay visible inside
        assert tuple(arr[19, 19]) == (10, 10, 10)    # far corner untouched

    def test_render_mask_overlay(self, tmp_path, square_png):
        from PIL import Image

        img = tmp_path / "img.png"
        Image.new("RGB", (5, 5), (0, 0, 0)).save(img)
        out = tmp_path / "out.png"
        r = run_cli(["render", "--image", str(img), "--mask", str(square_png),
                     "--out", str(out)])
        assert r.returncode == 0

    def test_render_bad_text(self, tmp_path):
        from PIL import Image

        img = tmp_path / "img.png"
        Image.new("RGB", (5, 5)).save(img)
        r = run_cli(["render", "--image", str(img), "--text", "[[zzz",
                     "--out", str(tmp_path / "o.png")])
        assert r.returncode == 2


class TestInProcessMain:
    def test_main_returns_codes(self, tmp_path, capsys):
        p = tmp_path / "e.png"
        save_mask_png(np.zeros((3, 3), dtype=bool), p)
        assert main(["encode", "--mask", str(p)]) == 2
        capsys.readouterr()
