import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from signwave import recognizer as rec
from signwave.cli import main, parse_list
from signwave.imageio import write_pgm

SAFETY_SCRIPT = "ARRIVED\nPOKE_COMPLETE\nSAFETY\n"
HAPPY_SCRIPT = "ARRIVED\nPOKE_COMPLETE\nSIGN:ATTENTION\nPATTERN_DONE\nSIGN:YES\n"


def run(*argv, stdin=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    code, _, _ = run("gen-corpus", "--out", root / "c", "--azimuth", "0,30,90",
                     "--altitude", "5")
    assert code == 0
    code, _, err = run("enroll", "--db", root / "db.saxdb", "--manifest",
                       root / "c" / "manifest.csv", "--azimuth", "0")
    assert code == 0, err
    return root


def frame(corpus, sign, az):
    return corpus / "c" / f"{sign}_az{az:05.1f}_alt5.0_d3.0.pgm"


def test_parse_list():
    assert parse_list("0,65") == [0.0, 65.0]
    assert parse_list("0:90:5") == [float(x) for x in range(0, 95, 5)]
    assert parse_list("2:5") == [2.0, 3.0, 4.0, 5.0]


class TestGenCorpus:
    def test_default_grid(self, tmp_path):
        code, _, _ = run("gen-corpus", "--out", tmp_path)
        assert code == 0
        assert len(list(tmp_path.glob("*.pgm"))) == 228

    def test_two_azimuths(self, tmp_path):
        code, _, _ = run("gen-corpus", "--out", tmp_path, "--azimuth", "0,65", "--altitude", "5",
                         "--distance", "3")
        assert code == 0 and len(list(tmp_path.glob("*.pgm"))) == 6

    def test_unwritable(self, tmp_path):
        (tmp_path / "f").write_text("")
        code, _, err = run("gen-corpus", "--out", tmp_path / "f" / "x")
        assert code == 2 and "error" in err

    def test_bad_list(self, tmp_path):
        assert run("gen-corpus", "--out", tmp_path, "--azimuth", "zero")[0] == 2


class TestRecognize:
    def test_self_match(self, corpus):
        code, out, _ = run("recognize", "--db", corpus / "db.saxdb", frame(corpus, "No", 0))
        assert (code, out) == (0, "MATCH No 0.0 0\n")

    def test_blank(self, corpus, tmp_path):
        write_pgm(tmp_path / "blank.pgm", np.full((48, 64), 255, np.uint8))
        code, out, _ = run("recognize", "--db", corpus / "db.saxdb", tmp_path / "blank.pgm")
        assert (code, out) == (1, "NOSHAPE empty_scene\n")

    def test_oblique(self, corpus):
        code, out, _ = run("recognize", "--db", corpus / "db.saxdb", frame(corpus, "No", 30))
        head, sign, dist, shift = out.split()
        assert (code, head, sign) == (0, "MATCH", "No") and float(dist) >= 0

    def test_side_view(self, corpus):
        code, out, _ = run("recognize", "--db", corpus / "db.saxdb", frame(corpus, "No", 90))
        assert code == 1 and out.startswith("NOMATCH ")

    def test_missing_db(self, corpus, tmp_path):
        code, _, err = run("recognize", "--db", tmp_path / "none", frame(corpus, "No", 0))
        assert code == 2 and "not found" in err

    def test_missing_file(self, corpus, tmp_path):
        code, _, _ = run("recognize", "--db", corpus / "db.saxdb", tmp_path / "none.pgm")
        assert code == 2

    def test_theta_override(self, corpus):
        code, out, _ = run("recognize", "--db", corpus / "db.saxdb", "--theta", "100",
                           frame(corpus, "No", 90))
        assert code == 0 and out.startswith("MATCH")

    def test_no_ansi_when_piped(self, corpus):
        _, out, _ = run("recognize", "--db", corpus / "db.saxdb", frame(corpus, "No", 0))
        assert "\x1b" not in out


class TestEnroll:
    def test_files_with_sign(self, corpus, tmp_path):
        db = tmp_path / "db.saxdb"
        code, _, _ = run("enroll", "--db", db, "--sign", "no", "--word", "36", "--alphabet", "5",
                         frame(corpus, "No", 0))
        assert code == 0
        loaded = rec.load(db)
        assert (len(loaded), loaded.params.w, loaded.params.a) == (1, 36, 5)

    def test_sign_required(self, corpus, tmp_path):
        assert run("enroll", "--db", tmp_path / "d", frame(corpus, "No", 0))[0] == 2

    def test_bad_params_rejected_before_work(self, corpus, tmp_path):
        code, _, _ = run("enroll", "--db", tmp_path / "d", "--sign", "No", "--word", "500",
                         frame(corpus, "No", 0))
        assert code == 2 and not (tmp_path / "d").exists()

    def test_saved_db_is_stable(self, corpus, tmp_path):
        for name in ("a", "b"):
            run("enroll", "--db", tmp_path / name, "--manifest", corpus / "c" / "manifest.csv",
                "--azimuth", "0")
        assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


class TestSweep:
    def test_table(self, corpus):
        code, out, err = run("sweep", "--db", corpus / "db.saxdb", corpus / "c" / "manifest.csv")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        no = [r for r in rows if r["sign"] == "No"]
        assert [float(r["azimuth"]) for r in no] == [0.0, 30.0, 90.0]
        acc = [float(r["accuracy"]) for r in no]
        assert acc == sorted(acc, reverse=True) and acc[0] == 1.0
        assert "boundary No 30.0" in err

    def test_single_row(self, corpus, tmp_path):
        m = tmp_path / "m.csv"
        m.write_text("file,sign,azimuth,distance_m,altitude_m,seed\n"
                     f"{frame(corpus, 'Yes', 0)},Yes,0.0,3.0,5.0,0\n")
        code, out, _ = run("sweep", "--db", corpus / "db.saxdb", m)
        assert code == 0 and len(out.splitlines()) == 2

    def test_missing_file_flagged(self, corpus, tmp_path):
        m = tmp_path / "m.csv"
        m.write_text("file,sign,azimuth,distance_m,altitude_m,seed\n"
                     f"{frame(corpus, 'Yes', 0)},Yes,0.0,3.0,5.0,0\n"
                     f"{tmp_path / 'gone.pgm'},Yes,5.0,3.0,5.0,1\n")
        code, out, err = run("sweep", "--db", corpus / "db.saxdb", m, "--out", tmp_path / "o.csv")
        assert code == 0 and out == ""
        rows = list(csv.DictReader(open(tmp_path / "o.csv")))
        assert [r["status"] for r in rows] == ["ok", "error"]
        assert "gone.pgm" in err

    def test_by_altitude(self, corpus):
        code, out, _ = run("sweep", "--db", corpus / "db.saxdb", corpus / "c" / "manifest.csv",
                           "--by-altitude", "--workers", "3")
        assert code == 0 and out.splitlines()[0].startswith("sign,azimuth,altitude_m,")


def test_uniqueness(corpus):
    code, out, err = run("uniqueness", "--db", corpus / "db.saxdb")
    assert code == 0 and len(out.splitlines()) == 4 and "all_distinct True" in err


class TestBench:
    def test_one_iteration(self, corpus):
        code, out, _ = run("bench", "--db", corpus / "db.saxdb", "--iterations", "1",
                           frame(corpus, "No", 0))
        lines = out.splitlines()
        assert code == 0 and len(lines) == 2
        row = dict(zip(lines[0].split(","), lines[1].split(",")))
        assert row["iterations"] == "1" and float(row["fps"]) > 0

    def test_without_db(self, corpus):
        assert run("bench", "--iterations", "2", frame(corpus, "No", 0))[0] == 0

    def test_empty(self):
        assert run("bench", "--iterations", "5")[0] == 2


class TestSimulate:
    def test_happy(self, tmp_path):
        (tmp_path / "s.txt").write_text(HAPPY_SCRIPT)
        code, out, _ = run("simulate", tmp_path / "s.txt")
        assert code == 0 and out.splitlines()[-1] == "5,Enter,SignSeen(Yes),FlyTo(area)"

    def test_safety_from_stdin(self, monkeypatch):
        code, out, _ = run("simulate", "-", stdin=SAFETY_SCRIPT, monkeypatch=monkeypatch)
        assert code == 3 and "SetLights(AllRed)" in out.splitlines()[-1]

    def test_empty(self, monkeypatch):
        code, out, _ = run("simulate", stdin="", monkeypatch=monkeypatch)
        assert (code, out) == (0, "t,state,event,actions\n")

    def test_bad_event(self, monkeypatch):
        assert run("simulate", stdin="DANCE\n", monkeypatch=monkeypatch)[0] == 2


class TestLightsAndPatterns:
    def test_heading(self):
        assert run("lights", "--heading", "0")[1] == "G G G G W W W R R R\n"

    def test_danger(self):
        assert run("lights", "--danger")[1] == "R R R R R R R R R R\n"

    def test_neither(self):
        assert run("lights")[0] == 2

    def test_land(self):
        code, out, _ = run("pattern", "land", "--height", "5")
        assert code == 0 and out.splitlines()[-1].endswith(",0,Off")

    def test_rectangle_to_file(self, tmp_path):
        code, _, _ = run("pattern", "rectangle", "--area", "0,0,4,3", "--out", tmp_path / "r.csv")
        rows = list(csv.DictReader(open(tmp_path / "r.csv")))
        assert code == 0 and rows[0]["x"] == rows[-1]["x"] and rows[0]["y"] == rows[-1]["y"]

    def test_bad_kind(self):
        assert run("pattern", "loop")[0] == 2


def test_entry_point():
    exe = [sys.executable, "-m", "signwave"]
    r = subprocess.run(exe + ["lights", "--heading", "360"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "G G G G W W W R R R\n"
    r = subprocess.run(exe + ["--version"], capture_output=True, text=True)
    assert r.stdout.startswith("signwave ")


class FakeTty(io.StringIO):
    def isatty(self):
        return True


def test_colour_only_on_tty(corpus, monkeypatch):
    monkeypatch.delenv("SIGNWAVE_NO_COLOR", raising=False)
    out = FakeTty()
    main(["recognize", "--db", str(corpus / "db.saxdb"), str(frame(corpus, "No", 0))], out,
         io.StringIO())
    assert out.getvalue().startswith("\x1b[32mMATCH\x1b[0m No")
    monkeypatch.setenv("SIGNWAVE_NO_COLOR", "1")
    out = FakeTty()
    main(["recognize", "--db", str(corpus / "db.saxdb"), str(frame(corpus, "No", 0))], out,
         io.StringIO())
    assert out.getvalue() == "MATCH No 0.0 0\n"
