import pytest

from gdpipe.cli import main
from gdpipe.traces import TraceSpec, gen_synthetic, read_trace, write_trace


def make_trace(tmp_path, name="t.gdtrace", **kwargs):
    kwargs.setdefault("seed", 11)
    kwargs.setdefault("chunk_count", 600)
    kwargs.setdefault("chunk_bits", 256)
    kwargs.setdefault("distinct_bases", 4)
    trace = gen_synthetic(TraceSpec(**kwargs))
    path = tmp_path / name
    write_trace(trace, path)
    return path, trace


def parse_report(path):
    out = {}
    for line in path.read_text().splitlines():
        key, value = line.split("=", 1)
        out[key] = value
    return out


class TestTables:
    def test_m3_matches_equivalence_table(self, capsys):
        assert main(["tables", "--m", "3"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "code (7,4) m=3 generator x^3+x+1 low_bits 0x3"
        assert out[1:] == [
            "001 -> 0", "010 -> 1", "100 -> 2", "011 -> 3",
            "110 -> 4", "111 -> 5", "101 -> 6",
        ]

    def test_m8_prints_255_entries(self, capsys):
        assert main(["tables", "--m", "8"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("code (255,247) m=8")
        assert len(lines) == 256

    def test_unsupported_m_exits_2(self, capsys):
        assert main(["tables", "--m", "99"]) == 2
        assert "registry" in capsys.readouterr().err


class TestGen:
    def test_deterministic_output(self, tmp_path, capsys):
        a, b = tmp_path / "a.gdtrace", tmp_path / "b.gdtrace"
        args = ["gen", "--seed", "5", "--count", "100", "--bases", "3"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        trace = read_trace(a)
        assert trace.chunk_count == 100 and trace.chunk_bits == 256

    def test_bad_spec_exits_2(self, tmp_path, capsys):
        rc = main(["gen", "--out", str(tmp_path / "x"), "--bases", "0"])
        assert rc == 2

    def test_msb_flag(self, tmp_path):
        out = tmp_path / "t.gdtrace"
        assert main(["gen", "--out", str(out), "--count", "10", "--m", "3",
                     "--bases", "1", "--codeword-prob", "1", "--msb", "1"]) == 0
        trace = read_trace(out)
        assert all(c.bit(7) == 1 for c in trace.chunks())


class TestRun:
    def test_static_single_basis_exact_ratio(self, tmp_path, capsys):
        path, _ = make_trace(tmp_path, distinct_bases=1)
        report = tmp_path / "report.txt"
        rc = main(["run", str(path), "--mode", "static", "--report", str(report)])
        assert rc == 0
        fields = parse_report(report)
        assert fields["mode"] == "static"
        assert float(fields["ratio"]) == 3 / 32
        assert int(fields["encoded_bytes"]) == 600 * 3
        assert int(fields["DECODE_MISS"]) == 0
        assert int(fields["RAW_IN"]) == 600

    def test_no_table_with_padding(self, tmp_path):
        path, _ = make_trace(tmp_path)
        report = tmp_path / "report.txt"
        rc = main(["run", str(path), "--mode", "no-table", "--padding",
                   "--report", str(report)])
        assert rc == 0
        fields = parse_report(report)
        assert float(fields["ratio"]) == 33 / 32
        assert int(fields["OUT_SYN_ID"]) == 0
        assert int(fields["INSTALLS"]) == 0

    def test_dynamic_ratio_at_least_static(self, tmp_path):
        path, _ = make_trace(tmp_path, distinct_bases=6, seed=21)
        r_static = tmp_path / "static.txt"
        r_dynamic = tmp_path / "dynamic.txt"
        assert main(["run", str(path), "--mode", "static",
                     "--report", str(r_static)]) == 0
        assert main(["run", str(path), "--mode", "dynamic", "--delay", "20e-6",
                     "--gap", "1e-6", "--report", str(r_dynamic)]) == 0
        static_ratio = float(parse_report(r_static)["ratio"])
        dynamic_ratio = float(parse_report(r_dynamic)["ratio"])
        assert dynamic_ratio >= static_ratio

    def test_snapshot_roundtrip(self, tmp_path):
        path, trace = make_trace(tmp_path, distinct_bases=3, seed=31)
        snap = tmp_path / "dict.snap"
        r1 = tmp_path / "r1.txt"
        r2 = tmp_path / "r2.txt"
        assert main(["run", str(path), "--mode", "static",
                     "--snapshot-out", str(snap), "--report", str(r1)]) == 0
        lines = snap.read_text().splitlines()
        assert len(lines) == 3 and lines[0].startswith("0 ")
        assert main(["run", str(path), "--mode", "static",
                     "--snapshot-in", str(snap), "--report", str(r2)]) == 0
        assert parse_report(r1)["ratio"] == parse_report(r2)["ratio"]

    def test_gzip_bytes_included(self, tmp_path):
        path, _ = make_trace(tmp_path)
        report = tmp_path / "report.txt"
        assert main(["run", str(path), "--mode", "static",
                     "--gzip-bytes", "1234", "--report", str(report)]) == 0
        fields = parse_report(report)
        assert fields["gzip_bytes"] == "1234"
        assert "gzip_ratio" in fields

    def test_counters_on_stdout(self, tmp_path, capsys):
        path, _ = make_trace(tmp_path)
        assert main(["run", str(path), "--mode", "dynamic"]) == 0
        out = capsys.readouterr().out
        assert "RAW_IN 600" in out and "savings" in out

    def test_missing_trace_exits_2(self, tmp_path):
        assert main(["run", str(tmp_path / "nope"), "--mode", "static"]) == 2

    def test_corrupt_trace_exits_2(self, tmp_path):
        path = tmp_path / "bad.gdtrace"
        path.write_bytes(b"garbage!")
        assert main(["run", str(path), "--mode", "static"]) == 2

    def test_mode_required(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["run", "whatever"])
        assert exc.value.code == 2


class TestBench:
    def test_single_and_multi_thread_totals_agree(self, tmp_path, capsys):
        path, _ = make_trace(tmp_path, chunk_count=400)
        assert main(["bench", str(path)]) == 0
        single = capsys.readouterr().out.splitlines()
        assert main(["bench", str(path), "--threads", "3"]) == 0
        multi = capsys.readouterr().out.splitlines()
        assert single[0].split("threads=")[0] == multi[0].split("threads=")[0]
        assert "encoded_bytes=1200" in single[0]
        assert single[-1] == multi[-1] == "roundtrip_ok=1"

    def test_reports_positive_throughput(self, tmp_path, capsys):
        path, _ = make_trace(tmp_path, chunk_count=200)
        assert main(["bench", str(path)]) == 0
        out = capsys.readouterr().out
        assert "encode_chunks_per_s=" in out and "decode_gbit_per_s=" in out


class TestExportPayloads:
    def test_export_matches_concatenation(self, tmp_path):
        path, trace = make_trace(tmp_path, chunk_count=50)
        out = tmp_path / "payloads.bin"
        assert main(["export-payloads", str(path), str(out)]) == 0
        assert out.read_bytes() == trace.payload
        assert out.stat().st_size == 50 * 32

    def test_empty_trace_empty_file(self, tmp_path):
        path, _ = make_trace(tmp_path, chunk_count=0)
        out = tmp_path / "payloads.bin"
        assert main(["export-payloads", str(path), str(out)]) == 0
        assert out.stat().st_size == 0
