import json

import numpy as np
import pytest

from mrwtl.cli import main
from mrwtl.io import read_signal, write_signal_csv
from mrwtl.signals import ar1, bundled_path


@pytest.fixture
def noise_csv(tmp_path):
    path = tmp_path / "noise.csv"
    write_signal_csv(path, np.random.default_rng(8).standard_normal(600))
    return path


def test_learn_ramp(tmp_path, capsys):
    out = tmp_path / "m.json"
    assert main(["learn", str(bundled_path("ramp")), "--rate", "1/2", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "t = [0.5, 0.5]" in text
    assert json.loads(out.read_text())["predict"]["t"] == pytest.approx([0.5, 0.5], abs=1e-10)


def test_learn_noise_certificate(noise_csv, tmp_path, capsys):
    out = tmp_path / "m.json"
    assert main(["learn", str(noise_csv), "--rate", "2/5", "--out", str(out)]) == 0
    line = [l for l in capsys.readouterr().out.splitlines() if l.startswith("certificate")][0]
    assert float(line.split("residual_nmse=")[1]) <= 1e-10


def test_missing_file_exit_2(tmp_path, capsys):
    assert main(["learn", str(tmp_path / "nope.csv"), "--rate", "2/3", "--out", "x.json"]) == 2
    assert "no such file" in capsys.readouterr().err


def test_bad_rate_exit_2(noise_csv):
    with pytest.raises(SystemExit) as info:
        main(["learn", str(noise_csv), "--rate", "2/4", "--out", "x.json"])
    assert info.value.code == 2


def test_odd_taps_exit_2(noise_csv, tmp_path):
    assert main(["learn", str(noise_csv), "--rate", "2/3", "--np", "3", "--out", str(tmp_path / "m.json")]) == 2


def test_too_short_exit_3(tmp_path):
    short = tmp_path / "s.csv"
    short.write_text("1\n2\n3\n")
    assert main(["learn", str(short), "--rate", "2/3", "--np", "4", "--out", str(tmp_path / "m.json")]) == 3


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_transform_inverse_round_trip(noise_csv, tmp_path, capsys, fmt):
    model = tmp_path / "m.json"
    coeffs = tmp_path / f"c.{fmt}"
    rec = tmp_path / "y.csv"
    assert main(["learn", str(noise_csv), "--rate", "3/4", "--out", str(model)]) == 0
    assert main(["transform", str(noise_csv), "--model", str(model), "--levels", "3",
                 "--format", fmt, "--out", str(coeffs)]) == 0
    text = capsys.readouterr().out
    assert "input lengths 600 -> 450 -> 339 -> 255" in text
    assert float(text.split("round-trip nmse ")[1].split()[0]) <= 1e-10
    assert main(["inverse", str(coeffs), "--model", str(model), "--out", str(rec)]) == 0
    np.testing.assert_allclose(read_signal(rec).samples, read_signal(noise_csv).samples, atol=1e-10)


def test_transform_lazy_is_block_split(noise_csv, tmp_path):
    out = tmp_path / "c.json"
    assert main(["transform", str(noise_csv), "--model", "lazy:2/3", "--levels", "1",
                 "--format", "json", "--out", str(out)]) == 0
    raw = json.loads(out.read_text())
    x = read_signal(noise_csv).samples.reshape(-1, 3)
    np.testing.assert_array_equal(raw["approx"], x[:, :2].reshape(-1))
    np.testing.assert_array_equal(raw["details"][0], x[:, 2])


def test_prcheck(tmp_path, capsys):
    assert main(["pr-check", "lazy:2/3"]) == 0
    assert "c=1 n0=0" in capsys.readouterr().out
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["pr-check", str(bad)]) == 2


def test_prcheck_broken_bank_exit_3(tmp_path):
    from mrwtl.io import save_model
    from mrwtl.lazy import rational_lazy
    from mrwtl.multirate import RationalRate

    fb = rational_lazy(RationalRate(2, 1, 3))
    path = tmp_path / "broken.json"
    save_model(path, fb.replace(f_l=fb.f_l * 1.5))
    assert main(["pr-check", str(path)]) == 3


def test_freqz(tmp_path):
    out = tmp_path / "f.csv"
    assert main(["freqz", "lazy:2/3", "--out", str(out)]) == 0
    data = np.genfromtxt(out, delimiter=",", names=True)
    assert data.size == 512
    np.testing.assert_allclose(data["g_l"], np.abs(1 + np.exp(-1j * np.pi * data["freq"])), atol=1e-12)


def test_cs_bench(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"signal": "piecewise", "signal_length": 270, "trials": 2,
                               "sampling_ratios": [20, 60], "levels": 2, "max_iter": 300}))
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    assert main(["cs-bench", str(cfg), "--seed", "4", "--out", str(out1)]) == 0
    assert main(["cs-bench", str(cfg), "--seed", "4", "--out", str(out2)]) == 0
    assert out1.read_text() == out2.read_text()
    assert out1.read_text().splitlines()[0] == "signal,bank,sr_percent,trials,mean_psnr_db,std_psnr_db"
    out3 = tmp_path / "r.json"
    assert main(["cs-bench", str(cfg), "--format", "json", "--out", str(out3)]) == 0
    assert len(json.loads(out3.read_text())) == 4


def test_cs_bench_bad_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trials": 0}))
    assert main(["cs-bench", str(cfg), "--out", str(tmp_path / "r.csv")]) == 2
