import numpy as np
import pytest

from ctxpack.cli import main
from ctxpack.fplt import read_codebook, read_tensor, read_video, write_video
from ctxpack.packing import LatentVideo


def rng(seed=0):
    return np.random.default_rng(seed)


@pytest.fixture
def video_path(tmp_path):
    path = tmp_path / "video.fplt"
    write_video(path, LatentVideo(rng(1).normal(size=(19, 64, 64, 3)).astype(np.float32)))
    return str(path)


@pytest.fixture
def small_video_path(tmp_path):
    path = tmp_path / "small.fplt"
    write_video(path, LatentVideo(rng(2).normal(size=(10, 8, 8, 2)).astype(np.float32)))
    return str(path)


class TestParseCommand:
    def test_valid(self, capsys):
        assert main(["parse", "td_f16k4f2k2f1k1_g9"]) == 0
        out = capsys.readouterr().out
        assert "mode=vanilla" in out
        assert "entries=3" in out
        assert "generate=9" in out

    def test_multiple_generate_exits_2(self, capsys):
        assert main(["parse", "g9_g9"]) == 2
        assert "generate" in capsys.readouterr().err

    def test_empty_exits_2(self, capsys):
        assert main(["parse", ""]) == 2

    def test_unknown_token_named(self, capsys):
        assert main(["parse", "td_f1k1_q9"]) == 2
        assert "'q'" in capsys.readouterr().err


class TestBudgetCommand:
    def test_vanilla_chain(self, capsys):
        assert main(["budget", "td_f16k4f2k2f1k1_g9", "--height", "64", "--width", "64"]) == 0
        assert "total 10752" in capsys.readouterr().out

    def test_minimal(self, capsys):
        assert main(["budget", "td_f1k1_g1", "--height", "64", "--width", "64"]) == 0
        assert "total 2048" in capsys.readouterr().out

    def test_indivisible_exits_2(self, capsys):
        assert main(["budget", "td_f16k4f2k2f1k1_g9", "--height", "60", "--width", "104"]) == 2
        assert "divisible" in capsys.readouterr().err

    def test_pad_flag(self, capsys):
        rc = main(["budget", "td_f16k4f2k2f1k1_g9", "--height", "60", "--width", "104", "--pad"])
        assert rc == 0


class TestPlanCommand:
    def test_inverted_example(self, capsys):
        rc = main(["plan", "f1k1_x_g9_f1k1f2k2f16k4_td", "--total", "28", "--section", "9"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 3
        assert lines[0].startswith("ITER 1 TARGET 19..28")
        assert lines[2].startswith("ITER 3 TARGET 1..10")

    def test_vanilla(self, capsys):
        rc = main(["plan", "td_f16k4f2k2f1k1_g9", "--total", "27", "--section", "9"])
        assert rc == 0
        assert capsys.readouterr().out.startswith("ITER 1 TARGET 0..9")

    def test_multi_endpoint(self, capsys):
        rc = main([
            "plan", "td_f16k4f2k2f1k1_g9_x_f1k1",
            "--total", "45", "--section", "9", "--endpoints", "0..9,36..45",
        ])
        assert rc == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 5

    def test_unclassified_exits_2(self, capsys):
        assert main(["plan", "f1k1_g9_f1k1", "--total", "18", "--section", "9"]) == 2


class TestPackCommand:
    def test_pack_writes_features_and_provenance(self, tmp_path, video_path, capsys):
        out = tmp_path / "packed.fplt"
        rc = main(["pack", "td_f16k4f2k2f1k1_g9", video_path, "-o", str(out)])
        assert rc == 0
        stdout = capsys.readouterr().out
        assert "budget 10752" in stdout
        features, _ = read_tensor(out)
        assert features.shape == (1, 1, 10752, 3)
        prov = (tmp_path / "packed.fplt.prov").read_text()
        assert prov.startswith("schedule td_f16k4f2k2f1k1_g9\nbudget 10752\n")
        assert "token 0 span=0..4 cell=0,0 kernel=k4" in prov

    def test_short_history_exits_3(self, tmp_path, small_video_path, capsys):
        out = tmp_path / "packed.fplt"
        rc = main(["pack", "td_f16k4f2k2f1k1_g9", small_video_path, "-o", str(out)])
        assert rc == 3

    def test_missing_file_exits_3(self, tmp_path):
        rc = main(["pack", "td_f1k1_g1", str(tmp_path / "nope.fplt"), "-o", str(tmp_path / "o")])
        assert rc == 3


class TestCodebookCommands:
    def test_fit_quantize_constant_for_k1(self, tmp_path, small_video_path, capsys):
        cb_path = tmp_path / "cb.fplt"
        rc = main(["codebook", "fit", "--k", "1", "--seed", "7", small_video_path, "-o", str(cb_path)])
        assert rc == 0
        assert read_codebook(cb_path).size == 1

        out_path = tmp_path / "quantized.fplt"
        rc = main(["quantize", small_video_path, "--codebook", str(cb_path), "-o", str(out_path)])
        assert rc == 0
        quantized = read_video(out_path)
        flattened = quantized.data.reshape(-1, quantized.channels)
        assert len(np.unique(flattened, axis=0)) == 1

    def test_fit_is_deterministic(self, tmp_path, small_video_path):
        a, b = tmp_path / "a.fplt", tmp_path / "b.fplt"
        argv = ["codebook", "fit", "--k", "4", "--seed", "9", small_video_path]
        assert main(argv + ["-o", str(a)]) == 0
        assert main(argv + ["-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_k_too_large_exits_3(self, tmp_path, small_video_path):
        rc = main([
            "codebook", "fit", "--k", "99999", "--seed", "1", small_video_path,
            "-o", str(tmp_path / "cb.fplt"),
        ])
        assert rc == 3


class TestDriftCommand:
    def test_all_metrics(self, small_video_path, capsys):
        assert main(["drift", small_video_path]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 3
        assert all(line.startswith("metric=") for line in lines)

    def test_single_metric(self, small_video_path, capsys):
        assert main(["drift", small_video_path, "--metric", "mean-luminance"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("metric=mean-luminance")

    def test_unknown_metric_exits_2(self, small_video_path, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["drift", small_video_path, "--metric", "bogus"])
        assert excinfo.value.code == 2
        assert "invalid choice" in capsys.readouterr().err


class TestEloCommand:
    def test_single_match(self, tmp_path, capsys):
        log = tmp_path / "matches.csv"
        log.write_text("a,b,A\n")
        assert main(["elo", str(log)]) == 0
        assert capsys.readouterr().out == "a=1016.0\nb=984.0\n"

    def test_ranks_flag(self, tmp_path, capsys):
        log = tmp_path / "matches.csv"
        log.write_text("a,b,A\n")
        assert main(["elo", str(log), "--ranks"]) == 0
        assert capsys.readouterr().out == "a=1016.0 rank=1\nb=984.0 rank=2\n"

    def test_unknown_outcome_exits_3(self, tmp_path, capsys):
        log = tmp_path / "matches.csv"
        log.write_text("a,b,Q\n")
        assert main(["elo", str(log)]) == 3
