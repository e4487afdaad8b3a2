import csv
import json

import numpy as np
import pytest

from sdsimat.cli import main
from sdsimat.io import read_csv
from sdsimat.recovery import MeasurementSystem
from sdsimat.pilots import PilotPattern

from .conftest import CDS_91_10


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_pilots_cds(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["pilots", "--mode", "cds", "--out", str(out)]) == 0
    (row,) = rows(out)
    assert float(row["coherence"]) == pytest.approx(0.3, abs=1e-9)
    assert float(row["lower_bound"]) == pytest.approx(0.3, abs=1e-12)
    assert row["is_cds"] == "True"
    assert row["guarantee"] == "False"
    assert row["pattern"].split() == [str(i) for i in CDS_91_10]


def test_pilots_family_and_random_search(tmp_path):
    out, trace = tmp_path / "p.csv", tmp_path / "t.csv"
    main(["pilots", "--shift", "5", "--multiplier", "2", "--out", str(out)])
    assert rows(out)[0]["is_cds"] == "True"
    main(["pilots", "--mode", "random-search", "--iterations", "40", "--out", str(out), "--trace", str(trace)])
    t = rows(trace)
    assert len(t) == 40 and list(t[0]) == ["iteration", "best_coherence"]
    assert float(t[-1]["best_coherence"]) == pytest.approx(float(rows(out)[0]["coherence"]))


def test_pilots_random_search_stdout(capsys):
    main(["pilots", "--mode", "random-search", "--iterations", "3"])
    text = capsys.readouterr().out
    assert "iteration,best_coherence" in text


def test_pilots_noncoprime_multiplier(capsys):
    assert main(["pilots", "--multiplier", "7"]) == 1
    assert "coprime" in capsys.readouterr().err


def test_coherence_command(tmp_path):
    out = tmp_path / "c.csv"
    main(["coherence", "--iterations", "25", "--out", str(out)])
    r = rows(out)
    assert len(r) == 25
    assert all(float(x["cds_value"]) == pytest.approx(0.3, abs=1e-9) for x in r)


def test_simulate_writes_csv_and_metadata(tmp_path):
    cfg = tmp_path / "exp.yaml"
    cfg.write_text("methods: [oracle, omp]\nsnr_grid_db: [20]\ntrials_per_point: 4\n")
    out = tmp_path / "res" / "r.csv"
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--seed", "3", "--trials", "5"]) == 0
    points = read_csv(out)
    assert {p.method for p in points} == {"oracle", "omp"}
    assert all(p.trials == 5 for p in points)
    meta = json.loads((tmp_path / "res" / "r.csv.meta.json").read_text())
    assert meta["master_seed"] == 3
    assert meta["failure_warning"] is False
    assert len(meta["config_hash"]) == 64
    assert "numpy" in meta["versions"]


def test_simulate_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "exp.yaml"
    cfg.write_text("trials: 4\n")
    assert main(["simulate", "--config", str(cfg)]) == 1
    assert "unknown keys" in capsys.readouterr().err


def test_simulate_to_stdout(tmp_path, capsys):
    cfg = tmp_path / "exp.yaml"
    cfg.write_text("methods: [omp]\nsnr_grid_db: [20]\ntrials_per_point: 2\n")
    assert main(["simulate", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.startswith("method,pilot_mode,snr_db")


def test_simulate_preset(tmp_path):
    out = tmp_path / "f.csv"
    assert main(["simulate", "--config", "preset:fig2-cds", "--trials", "2", "--out", str(out)]) == 0
    assert [p.pilot_mode for p in read_csv(out)] == ["cds", "cds"]


def test_recover_roundtrip(tmp_path):
    pattern = PilotPattern(91, CDS_91_10)
    msys = MeasurementSystem.build(pattern, 32)
    h = np.zeros(32, dtype=complex)
    h[[2, 20]] = [1.0, 0.5j]
    y = msys.matrix.rows @ h
    obs = tmp_path / "obs.csv"
    obs.write_text("real,imag\n" + "".join(f"{float(v.real)!r},{float(v.imag)!r}\n" for v in y))
    pat = tmp_path / "pat.txt"
    pat.write_text("\n".join(str(i) for i in CDS_91_10) + "\n")
    for method, extra in (("oracle", ["--support", "2,20"]), ("omp", []), ("sds_imat", [])):
        out = tmp_path / f"{method}.csv"
        args = ["recover", "--observation", str(obs), "--pattern", str(pat), "--n", "91",
                "--method", method, "--out", str(out)] + extra
        assert main(args) == 0
        r = rows(out)
        assert len(r) == 32
        est = np.array([complex(float(x["real"]), float(x["imag"])) for x in r])
        np.testing.assert_allclose(est, h, atol=1e-6)


def test_recover_oracle_needs_support(tmp_path, capsys):
    obs = tmp_path / "obs.csv"
    obs.write_text("1,0\n" * 10)
    pat = tmp_path / "pat.txt"
    pat.write_text(" ".join(str(i) for i in CDS_91_10))
    assert main(["recover", "--observation", str(obs), "--pattern", str(pat), "--n", "91", "--method", "oracle"]) == 1
    assert "--support" in capsys.readouterr().err
