import json

import numpy as np
import pytest

from conftest import AR2_SPECTRUM_SEED, ar2_coeffs, ar2_fixture_series
from lipcot import cli, pipeline, testkit

FS = 500.0


def write_corpus_csv(path, n_channels=3, n_samples=6000, seed=0):
    data, names = [], []
    for c in range(n_channels):
        coeffs = ar2_coeffs([5.0, 15.0, 40.0][c % 3])
        data.append(
            testkit.generate_ar(testkit.ArSpec(coeffs, 1.0, seed=seed + c), n_samples)
        )
        names.append(f"ch{c}")
    path.write_text(pipeline.format_series_csv(names, np.stack(data)))
    return names


@pytest.fixture()
def workspace(tmp_path):
    csv_path = tmp_path / "series.csv"
    write_corpus_csv(csv_path)
    book_path = tmp_path / "book.json"
    status = cli.main([
        "train", str(csv_path), "--out", str(book_path),
        "--k", "4", "--order", "4", "--lambda", "0.2",
        "--window-sec", "2", "--seed", "3", "--sample-rate", "500",
    ])
    assert status == 0
    return tmp_path, csv_path, book_path


class TestTrain:
    def test_writes_codebook_and_vocabulary(self, workspace, capsys):
        tmp_path, _, book_path = workspace
        assert book_path.exists()
        vocab = (tmp_path / "book.json.vocab").read_text().splitlines()
        assert len(vocab) == 4 + 5
        assert vocab[:5] == ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]

    def test_reports_counts(self, tmp_path, capsys):
        csv_path = tmp_path / "series.csv"
        write_corpus_csv(csv_path)
        status = cli.main([
            "train", str(csv_path), "--out", str(tmp_path / "b.json"),
            "--k", "2", "--order", "4", "--window-sec", "2",
            "--seed", "0", "--sample-rate", "500",
        ])
        assert status == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "k 2"
        assert out[1].startswith("inertia ")
        counts = [int(line.split()[1]) for line in out[2:]]
        assert sum(counts) == 3 * 6  # channels x windows

    def test_deterministic_across_runs(self, tmp_path):
        csv_path = tmp_path / "series.csv"
        write_corpus_csv(csv_path)
        blobs = []
        for run in range(2):
            out = tmp_path / f"book{run}.json"
            status = cli.main([
                "train", str(csv_path), "--out", str(out),
                "--k", "3", "--order", "4", "--window-sec", "2",
                "--seed", "7", "--sample-rate", "500",
            ])
            assert status == 0
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]

    def test_k_larger_than_corpus_fails(self, tmp_path, capsys):
        csv_path = tmp_path / "series.csv"
        write_corpus_csv(csv_path)
        status = cli.main([
            "train", str(csv_path), "--out", str(tmp_path / "b.json"),
            "--k", "64", "--order", "4", "--window-sec", "2",
            "--seed", "0", "--sample-rate", "500",
        ])
        assert status == 1
        assert "error" in capsys.readouterr().err

    def test_sidecar_sample_rate(self, tmp_path):
        csv_path = tmp_path / "series.csv"
        write_corpus_csv(csv_path)
        (tmp_path / "series.csv.json").write_text(json.dumps({"sample_rate": 500}))
        status = cli.main([
            "train", str(csv_path), "--out", str(tmp_path / "b.json"),
            "--k", "2", "--order", "4", "--window-sec", "2", "--seed", "0",
        ])
        assert status == 0

    def test_missing_sample_rate(self, tmp_path, capsys):
        csv_path = tmp_path / "series.csv"
        write_corpus_csv(csv_path)
        status = cli.main([
            "train", str(csv_path), "--out", str(tmp_path / "b.json"),
            "--k", "2", "--window-sec", "2", "--seed", "0",
        ])
        assert status == 1
        assert "sample-rate" in capsys.readouterr().err


class TestEncode:
    def test_positions_layout_lines(self, workspace):
        tmp_path, csv_path, book_path = workspace
        tokens = tmp_path / "tokens.txt"
        status = cli.main([
            "encode", str(csv_path), "--codebook", str(book_path),
            "--out", str(tokens), "--layout", "positions",
            "--window-sec", "2", "--sample-rate", "500",
        ])
        assert status == 0
        lines = tokens.read_text().splitlines()
        assert len(lines) == 6  # 6000 samples / 1000-sample windows
        assert all(len(line.split()) == 3 for line in lines)
        assert all(word.startswith("t") for word in lines[0].split())

    def test_temporal_layout_and_json_records(self, workspace):
        tmp_path, csv_path, book_path = workspace
        tokens = tmp_path / "tokens.txt"
        records_path = tmp_path / "tokens.json"
        status = cli.main([
            "encode", str(csv_path), "--codebook", str(book_path),
            "--out", str(tokens), "--layout", "temporal",
            "--window-sec", "2", "--sample-rate", "500",
            "--json", str(records_path),
        ])
        assert status == 0
        lines = tokens.read_text().splitlines()
        assert len(lines) == 3
        assert all(len(line.split()) == 6 for line in lines)
        records = json.loads(records_path.read_text())
        assert len(records) == 18
        assert {r["channel"] for r in records} == {"ch0", "ch1", "ch2"}
        assert {r["window"] for r in records} == set(range(6))

    def test_config_mismatch_flag(self, workspace, capsys):
        tmp_path, csv_path, book_path = workspace
        status = cli.main([
            "encode", str(csv_path), "--codebook", str(book_path),
            "--out", str(tmp_path / "t.txt"), "--order", "8",
            "--window-sec", "2", "--sample-rate", "500",
        ])
        assert status == 1
        assert "disagrees" in capsys.readouterr().err

    def test_empty_csv_body(self, workspace):
        tmp_path, _, book_path = workspace
        empty = tmp_path / "empty.csv"
        empty.write_text("ch0,ch1\n")
        out = tmp_path / "empty.tokens"
        status = cli.main([
            "encode", str(empty), "--codebook", str(book_path),
            "--out", str(out), "--window-sec", "2", "--sample-rate", "500",
        ])
        assert status == 0
        assert out.read_text() == ""


class TestDecode:
    def test_lengths_and_determinism(self, workspace):
        tmp_path, _, book_path = workspace
        token_file = tmp_path / "line.txt"
        token_file.write_text("t0 t1 t2\n")
        outputs = []
        for run in range(2):
            out = tmp_path / f"dec{run}.csv"
            status = cli.main([
                "decode", str(token_file), "--codebook", str(book_path),
                "--out", str(out), "--window-sec", "2",
                "--sample-rate", "500", "--seed", "9",
            ])
            assert status == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
        names, data = pipeline.read_series_csv(tmp_path / "dec0.csv")
        assert names == ["seq0"]
        assert data.shape == (1, 3000)

    def test_unknown_word_named_in_error(self, workspace, capsys):
        tmp_path, _, book_path = workspace
        token_file = tmp_path / "line.txt"
        token_file.write_text("t0 t99\n")
        status = cli.main([
            "decode", str(token_file), "--codebook", str(book_path),
            "--out", str(tmp_path / "d.csv"), "--window-sec", "2",
            "--sample-rate", "500",
        ])
        assert status == 1
        assert "t99" in capsys.readouterr().err

    def test_reserved_word_rejected(self, workspace, capsys):
        tmp_path, _, book_path = workspace
        token_file = tmp_path / "line.txt"
        token_file.write_text("[MASK] t0\n")
        status = cli.main([
            "decode", str(token_file), "--codebook", str(book_path),
            "--out", str(tmp_path / "d.csv"), "--window-sec", "2",
            "--sample-rate", "500",
        ])
        assert status == 1
        assert "[MASK]" in capsys.readouterr().err


class TestSpectrum:
    def test_ar2_peaks_agree_between_columns(self, tmp_path):
        csv_path = tmp_path / "fixture.csv"
        x = ar2_fixture_series(seed=AR2_SPECTRUM_SEED)
        csv_path.write_text(pipeline.format_series_csv(["ch0"], x[None, :]))
        out = tmp_path / "spec.csv"
        status = cli.main([
            "spectrum", str(csv_path), "--sample-rate", "500",
            "--order", "2", "--lambda", "0", "--grid-hz", "0.1",
            "--out", str(out),
        ])
        assert status == 0
        rows = np.loadtxt(out, delimiter=",", skiprows=1)
        freqs, lpc_psd, per_psd = rows[:, 0], rows[:, 1], rows[:, 2]
        np.testing.assert_allclose(freqs, np.arange(len(freqs)) * 0.1, atol=1e-9)
        assert freqs[-1] <= 250.0 + 1e-6
        lpc_peak = freqs[np.argmax(lpc_psd)]
        per_peak = freqs[np.argmax(per_psd)]
        assert abs(lpc_peak - per_peak) <= 1.0

    def test_flat_noise_dynamic_range_below_6db(self, tmp_path):
        rng = np.random.default_rng(0)
        csv_path = tmp_path / "noise.csv"
        csv_path.write_text(
            pipeline.format_series_csv(["n"], rng.normal(size=30000)[None, :])
        )
        out = tmp_path / "spec.csv"
        status = cli.main([
            "spectrum", str(csv_path), "--sample-rate", "500",
            "--order", "16", "--lambda", "0.2", "--grid-hz", "0.5",
            "--out", str(out),
        ])
        assert status == 0
        rows = np.loadtxt(out, delimiter=",", skiprows=1)
        lpc_psd = rows[:, 1]
        dynamic_range_db = 10 * np.log10(lpc_psd.max() / lpc_psd.min())
        assert dynamic_range_db < 6.0


class TestRoundTrip:
    def test_train_encode_decode_encode_preserves_most_tokens(self, tmp_path, capsys):
        csv_path = tmp_path / "series.csv"
        write_corpus_csv(csv_path, n_samples=30000)
        book = tmp_path / "book.json"
        first = tmp_path / "first.tok"
        decoded = tmp_path / "decoded.csv"
        second = tmp_path / "second.tok"
        assert cli.main([
            "train", str(csv_path), "--out", str(book), "--k", "3",
            "--order", "4", "--lambda", "0.2", "--window-sec", "5",
            "--seed", "2", "--sample-rate", "500",
        ]) == 0
        assert cli.main([
            "encode", str(csv_path), "--codebook", str(book), "--out", str(first),
            "--layout", "temporal", "--window-sec", "5", "--sample-rate", "500",
        ]) == 0
        assert cli.main([
            "decode", str(first), "--codebook", str(book), "--out", str(decoded),
            "--window-sec", "5", "--sample-rate", "500", "--seed", "1",
        ]) == 0
        assert cli.main([
            "encode", str(decoded), "--codebook", str(book), "--out", str(second),
            "--layout", "temporal", "--window-sec", "5", "--sample-rate", "500",
        ]) == 0
        capsys.readouterr()
        before = first.read_text().split()
        after = second.read_text().split()
        assert len(before) == len(after) == 36
        rate = sum(a == b for a, b in zip(before, after)) / len(before)
        print(f"cli round-trip token match rate: {rate:.3f}")
        assert rate > 0.5


class TestSynth:
    def test_synthesizes_requested_duration(self, workspace):
        tmp_path, _, book_path = workspace
        out = tmp_path / "synth.csv"
        status = cli.main([
            "synth", "--codebook", str(book_path), "--token", "1",
            "--seconds", "2", "--sample-rate", "500", "--seed", "5",
            "--out", str(out),
        ])
        assert status == 0
        names, data = pipeline.read_series_csv(out)
        assert names == ["t1"]
        assert data.shape == (1, 1000)
