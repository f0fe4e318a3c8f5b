import json
import subprocess
import sys

import numpy as np
import pytest

from weakpacket.cli import main
from weakpacket.files import read_csv, read_signal
from weakpacket.pipeline import PipelineConfig
from weakpacket.scenarios import FILL_FREQUENCIES
from weakpacket.signals import gen_kaymarple_like
from weakpacket.files import write_signal


def run(*argv):
    return main([str(a) for a in argv])


def csv_files(d):
    return sorted(d.glob("*.csv"))


def test_gen_fig3_sidecar(tmp_path):
    assert run("gen", "--preset", "fig3", "--snr", -10, "--seed", 1, "--output-dir", tmp_path) == 0
    side = json.loads((tmp_path / "signal.json").read_text())
    assert abs(side["measured_snr_db"] + 10) <= 0.5
    assert len(side["components"]) == 3
    x = read_signal(tmp_path / "signal.csv")
    assert x.size == side["record_length"] == 1280
    raw = (tmp_path / "signal.csv").read_bytes()
    assert raw.startswith(b"x\n") and b"\r" not in raw


def test_gen_fig4_record(tmp_path):
    assert run("gen", "--preset", "fig4", "--snr", -20, "--output-dir", tmp_path) == 0
    side = json.loads((tmp_path / "signal.json").read_text())
    assert side["preset"]["window"] == 256
    assert abs(side["measured_snr_db"] + 20) <= 0.5
    # every packet spans several 256-sample windows
    assert all(b - a >= 3 * 256 for a, b in side["supports"])


def test_missing_flag_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run("gen", "--output-dir", tmp_path)
    assert exc.value.code == 2


def test_bad_value_is_usage_error(tmp_path):
    run("gen", "--preset", "fig3", "--output-dir", tmp_path)
    with pytest.raises(SystemExit) as exc:
        run("detect", "--input", tmp_path / "signal.csv", "--output-dir", tmp_path / "d", "--epsilon", 2)
    assert exc.value.code == 2


def test_order_outputs(tmp_path):
    write_signal(tmp_path / "km.csv", gen_kaymarple_like(seed=0))
    assert run("order", "--input", tmp_path / "km.csv", "--output-dir", tmp_path / "o",
               "--order-range", 8, 33) == 0
    header, rows = read_csv(tmp_path / "o" / "order_scan.csv")
    assert header[0] == "p" and header[-1] == "cond"
    assert [int(r[0]) for r in rows] == list(range(8, 32))  # capped by 2p < N
    assert all(len(r) == len(header) for r in rows)
    assert rows[0][9] == ""  # rho padding beyond p = 8
    sel = json.loads((tmp_path / "o" / "order_selection.json").read_text())
    assert sel["p_opt_min"] <= sel["p_opt"] <= sel["p_opt_max"]


def test_detect_and_spectrum_and_track(tmp_path):
    run("gen", "--preset", "fig6", "--seed", 2, "--output-dir", tmp_path)
    sig = tmp_path / "signal.csv"
    assert run("detect", "--input", sig, "--output-dir", tmp_path / "d") == 0
    th, trows = read_csv(tmp_path / "d" / "trace.csv")
    assert th == ["center", "p", "sigma2_xi", "J", "G", "JG"]
    sh, srows = read_csv(tmp_path / "d" / "segments.csv")
    assert sh == ["start", "end", "peak_JG"] and srows
    assert run("spectrum", "--input", sig, "--segments", tmp_path / "d" / "segments.csv",
               "--spectrum-order", 16, "--output-dir", tmp_path / "s") == 0
    spectra = sorted((tmp_path / "s").glob("spectrum_seg*.csv"))
    assert len(spectra) == len(srows)
    h, rows = read_csv(spectra[0])
    assert h == ["f", "A_linear", "A_db"] and len(rows) == 1024
    assert run("track", "--input", sig, "--window", 64, "--order", 8, "--spectrum-order", 8,
               "--output-dir", tmp_path / "t") == 0
    assert read_csv(tmp_path / "t" / "spectrogram.csv")[0] == ["center", "f_peak", "A_peak"]


def test_every_run_has_manifest_and_headers(tmp_path):
    run("gen", "--preset", "fig3", "--output-dir", tmp_path / "g")
    run("detect", "--input", tmp_path / "g" / "signal.csv", "--output-dir", tmp_path / "d")
    run("pipeline", "--preset", "fig8", "--output-dir", tmp_path / "p")
    for d in ("g", "d", "p"):
        man = json.loads((tmp_path / d / "manifest.json").read_text())
        assert len(man["config_hash"]) == 64
        listed = set(man["artifacts"])
        assert {f.name for f in (tmp_path / d).iterdir()} == listed
        for f in csv_files(tmp_path / d):
            header, _ = read_csv(f)
            assert header and all(header)
    man = json.loads((tmp_path / "d" / "manifest.json").read_text())
    assert man["inputs"] == [str(tmp_path / "g" / "signal.csv")]


def test_pipeline_is_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert run("pipeline", "--preset", "fig3", "--seed", 5, "--output-dir", tmp_path / d) == 0
    files_a = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files_a == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in files_a:
        a = (tmp_path / "a" / name).read_bytes()
        b = (tmp_path / "b" / name).read_bytes()
        if name == "manifest.json":
            a, b = (json.loads(v) for v in (a, b))
            a["config"].pop("output_dir"), b["config"].pop("output_dir")
            a.pop("config_hash"), b.pop("config_hash")
        assert a == b, name


def test_pipeline_config_roundtrip(tmp_path):
    cfg = PipelineConfig(output_dir="ignored", preset="fig6", seed=3, order_policy=8)
    (tmp_path / "cfg.json").write_text(json.dumps(cfg.to_dict()))
    assert run("pipeline", "--config", tmp_path / "cfg.json", "--output-dir", tmp_path / "o") == 0
    assert PipelineConfig.from_dict(cfg.to_dict()) == cfg
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["p_global"] is None  # fixed detector order


def test_pipeline_fig3_end_to_end(tmp_path):
    assert run("pipeline", "--preset", "fig3", "--seed", 1, "--output-dir", tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert len(summary["segments"]) == 3
    peaks = []
    for f in sorted(tmp_path.glob("spectrum_seg*.csv")):
        _, rows = read_csv(f)
        arr = np.array(rows, dtype=float)
        peaks.append(arr[np.argmax(arr[:, 1]), 0])
    assert len(peaks) == 3
    np.testing.assert_allclose(sorted(peaks), FILL_FREQUENCIES, atol=0.5 / 1023)


def test_pipeline_fig7_uses_order_24(tmp_path):
    assert run("pipeline", "--preset", "fig7", "--output-dir", tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["spectra"] and all(s["p"] == 24 for s in summary["spectra"])


def test_empty_input_clean_error(tmp_path, capsys):
    (tmp_path / "empty.csv").write_text("")
    assert run("pipeline", "--input", tmp_path / "empty.csv", "--output-dir", tmp_path / "o") == 1
    assert "empty" in capsys.readouterr().err
    (tmp_path / "hdr.csv").write_text("x\n")
    assert run("detect", "--input", tmp_path / "hdr.csv", "--output-dir", tmp_path / "o") == 1


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "weakpacket.cli", "gen", "--preset", "fig3"],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "--output-dir" in proc.stderr
