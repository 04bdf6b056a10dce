"""``signwave`` command-line front end.

Exit codes: 0 success, 1 recognised negative (NOMATCH / NOSHAPE),
2 usage or I/O error, 3 protocol session ended in the safety hold.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import recognizer as rec
from ._jit import BACKEND
from .embodiment import PatternKind, PatternParams, danger_lights, make_pattern, nav_lights
from .errors import CorpusIOError, InvalidInput, NoShapeError, SignwaveError
from .imageio import decode_image, read_image
from .protocol import DroneState, ProtocolConfig, parse_script, run_session
from .sax import SaxParams
from .signature import PipelineConfig, Polarity, image_to_word
from .signs import CANONICAL_SIGNS, canonical_sign
from .synth import ViewSpec, generate_corpus, read_manifest, render_sign

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_SAFETY = 0, 1, 2, 3

_COLOURS = {"MATCH": "32", "NOMATCH": "33", "NOSHAPE": "31"}


class UsageError(Exception):
    pass


def _use_colour(stream) -> bool:
    return not os.environ.get("SIGNWAVE_NO_COLOR") and hasattr(stream, "isatty") and stream.isatty()


def _paint(line: str, stream) -> str:
    head = line.split(" ", 1)[0]
    if head in _COLOURS and _use_colour(stream):
        return f"\x1b[{_COLOURS[head]}m{head}\x1b[0m{line[len(head):]}"
    return line


def parse_list(text: str) -> list:
    """``"0,65"`` or an inclusive range ``"0:90:5"`` (step defaults to 1)."""
    out = []
    for part in (p.strip() for p in text.split(",")):
        if not part:
            continue
        if ":" in part:
            bits = [float(b) for b in part.split(":")]
            if len(bits) not in (2, 3):
                raise argparse.ArgumentTypeError(f"bad range {part!r}")
            lo, hi = bits[0], bits[1]
            step = bits[2] if len(bits) == 3 else 1.0
            if step <= 0:
                raise argparse.ArgumentTypeError(f"range step must be positive: {part!r}")
            n = int(math.floor((hi - lo) / step + 1e-9)) + 1
            out.extend(round(lo + i * step, 9) for i in range(max(n, 0)))
        else:
            out.append(float(part))
    return out


def _list_arg(text):
    try:
        return parse_list(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _fmt(x) -> str:
    return repr(float(x))


# -- shared option groups -----------------------------------------------------------------

def _add_pipeline(p):
    g = p.add_argument_group("pipeline")
    g.add_argument("--threshold", type=int, default=128)
    g.add_argument("--polarity", choices=[x.value for x in Polarity], default=Polarity.DARK_FG.value)
    g.add_argument("--samples", type=int, default=360, metavar="N")
    g.add_argument("--word", type=int, default=SaxParams().w, metavar="W")
    g.add_argument("--alphabet", type=int, default=SaxParams().a, metavar="A")
    g.add_argument("--theta", type=float, default=None,
                   help="fixed rejection threshold (default: derived from the templates)")


def _pipeline(args) -> PipelineConfig:
    return PipelineConfig(threshold=args.threshold, polarity=args.polarity, samples=args.samples,
                          sax=SaxParams(args.word, args.alphabet))


def _load_db(args) -> rec.TemplateDB:
    if not args.db:
        raise UsageError("--db is required")
    try:
        db = rec.load(args.db)
    except FileNotFoundError:
        raise UsageError(f"template database not found: {args.db}") from None
    if args.theta is not None:
        db = db.with_theta(args.theta)
    if len(db) == 0:
        raise UsageError(f"template database {args.db} is empty")
    return db


# -- subcommands ----------------------------------------------------------------------------

def cmd_gen_corpus(args, out, err):
    try:
        manifest = generate_corpus(
            signs=[canonical_sign(s) for s in args.signs],
            azimuths=args.azimuth, altitudes=args.altitude, distance=args.distance,
            out_dir=args.out, seed=args.seed, noise=args.noise,
            width=args.width, height=args.height)
    except CorpusIOError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    print(f"wrote {len(manifest)} frames and {Path(args.out) / 'manifest.csv'}", file=err)
    return EXIT_OK


def cmd_enroll(args, out, err):
    if Path(args.db).exists():
        db = rec.load(args.db)
        if args.theta is not None:
            db = db.with_theta(args.theta)
    else:
        cfg = _pipeline(args)
        db = rec.TemplateDB(cfg.sax, cfg.samples, (), args.theta)

    jobs = []
    if args.manifest:
        manifest = read_manifest(args.manifest)
        for row in manifest:
            if args.azimuth is not None and row.azimuth not in args.azimuth:
                continue
            if args.altitude is not None and row.altitude_m not in args.altitude:
                continue
            jobs.append((manifest.path_of(row), row.sign, row.azimuth, row.distance_m,
                         row.altitude_m))
    if args.files:
        if not args.sign:
            raise UsageError("--sign is required when enrolling files")
        az = args.azimuth[0] if args.azimuth else None
        alt = args.altitude[0] if args.altitude else None
        for f in args.files:
            jobs.append((Path(f), canonical_sign(args.sign), az, args.distance, alt))
    if not jobs:
        raise UsageError("nothing to enroll")

    status = EXIT_OK
    for path, sign, az, dist, alt in jobs:
        try:
            img = read_image(path)
        except FileNotFoundError:
            raise UsageError(f"no such file: {path}") from None
        try:
            db = rec.enroll(img, sign, db, azimuth=az, distance_m=dist, altitude_m=alt,
                            file=str(path), threshold=args.threshold, polarity=args.polarity)
        except NoShapeError as exc:
            print(_paint(f"NOSHAPE {exc.reason} {path}", out), file=out)
            status = EXIT_NEGATIVE
    rec.save(db, args.db)
    print(f"{len(db)} templates, signs {' '.join(db.signs)}, theta {db.theta:.6g}", file=err)
    return status


def _result_line(result) -> str:
    if isinstance(result, rec.Match):
        return f"MATCH {result.sign} {_fmt(result.distance)} {result.shift}"
    if isinstance(result, rec.NoMatch):
        return f"NOMATCH {_fmt(result.best_distance)}"
    return f"NOSHAPE {result.reason}"


def cmd_recognize(args, out, err):
    db = _load_db(args)
    status = EXIT_OK
    for f in args.files:
        try:
            img = read_image(f)
        except FileNotFoundError:
            raise UsageError(f"no such file: {f}") from None
        result = rec.recognize(img, db, args.threshold, args.polarity)
        line = _result_line(result)
        if len(args.files) > 1:
            line = f"{line} {f}"
        print(_paint(line, out), file=out)
        if not isinstance(result, rec.Match):
            status = EXIT_NEGATIVE
    return status


SWEEP_HEADER = ["sign", "azimuth", "attempts", "correct", "accuracy", "mean_distance", "status"]
SWEEP_CELL_HEADER = ["sign", "azimuth", "altitude_m", "attempts", "correct", "accuracy",
                     "mean_distance", "status"]


def cmd_sweep(args, out, err):
    db = _load_db(args)
    try:
        manifest = read_manifest(args.manifest)
    except FileNotFoundError:
        raise UsageError(f"manifest not found: {args.manifest}") from None
    report = rec.sweep(db, manifest, bin_width=args.bin, threshold=args.threshold,
                       polarity=args.polarity, workers=args.workers)

    handle = open(args.out, "w", newline="") if args.out else out
    try:
        writer = csv.writer(handle, lineterminator="\n")
        if args.by_altitude:
            writer.writerow(SWEEP_CELL_HEADER)
            for (sign, az, alt), c in sorted(report.cells.items()):
                writer.writerow([sign, _fmt(az), _fmt(alt), c.attempts, c.correct,
                                 _fmt(c.accuracy), _fmt(c.mean_distance), "ok"])
        else:
            writer.writerow(SWEEP_HEADER)
            for sign in report.signs:
                dist = {}
                for (s, az, _), c in report.cells.items():
                    if s == sign:
                        acc = dist.setdefault(az, [0.0, 0])
                        acc[0] += c.distance_sum
                        acc[1] += c.distance_count
                for az, attempts, correct in report.azimuth_table(sign):
                    total, n = dist[az]
                    writer.writerow([sign, _fmt(az), attempts, correct,
                                     _fmt(correct / attempts), _fmt(total / n if n else math.nan),
                                     "ok"])
        for row, message in report.errors:
            fields = [row.sign, _fmt(row.azimuth)]
            if args.by_altitude:
                fields.append(_fmt(row.altitude_m))
            writer.writerow(fields + [0, 0, "nan", "nan", "error"])
            print(f"error: {row.file}: {message}", file=err)
    finally:
        if args.out:
            handle.close()
    for sign in report.signs:
        boundary = report.boundary(sign)
        print(f"boundary {sign} {'none' if boundary is None else _fmt(boundary)}", file=err)
    return EXIT_OK


def cmd_uniqueness(args, out, err):
    db = _load_db(args)
    report = rec.pairwise_uniqueness(db)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["first", "second", "distinct", "distance", "shift"])
    for p in report.pairs:
        writer.writerow([p.first_sign, p.second_sign, int(p.distinct), _fmt(p.distance), p.shift])
    print(f"min_distance {report.min_distance:.6g} all_distinct {report.all_distinct}", file=err)
    return EXIT_OK if report.all_distinct else EXIT_NEGATIVE


def _canonical_db(cfg: PipelineConfig) -> rec.TemplateDB:
    db = rec.TemplateDB(cfg.sax, cfg.samples)
    for sign in CANONICAL_SIGNS:
        db = rec.enroll(render_sign(sign, ViewSpec()), sign, db, azimuth=0.0,
                        distance_m=3.0, altitude_m=5.0,
                        threshold=cfg.threshold, polarity=cfg.polarity)
    return db


def time_frames(blobs, db, iterations, threshold=128, polarity=Polarity.DARK_FG, warmup=3):
    """Per-frame wall time in seconds for decode + pipeline + match."""
    cfg = db.pipeline_config(threshold, polarity)

    def one(blob):
        img = decode_image(blob)
        try:
            word, _ = image_to_word(img, cfg)
        except NoShapeError:
            return None
        return rec.match_word(word, db)

    for i in range(min(warmup, iterations)):
        one(blobs[i % len(blobs)])
    times = np.empty(iterations)
    for i in range(iterations):
        blob = blobs[i % len(blobs)]
        t0 = time.perf_counter()
        one(blob)
        times[i] = time.perf_counter() - t0
    return times


BENCH_HEADER = ["frames", "iterations", "median_ms", "p95_ms", "mean_ms", "fps", "backend"]


def cmd_bench(args, out, err):
    paths = [Path(f) for f in args.files]
    if args.manifest:
        manifest = read_manifest(args.manifest)
        paths += [manifest.path_of(r) for r in manifest]
    if not paths:
        raise UsageError("no frames to benchmark")
    if args.iterations < 1:
        raise UsageError("--iterations must be >= 1")
    try:
        blobs = [p.read_bytes() for p in paths]
    except FileNotFoundError as exc:
        raise UsageError(f"no such file: {exc.filename}") from None
    db = _load_db(args) if args.db else _canonical_db(_pipeline(args))
    times = time_frames(blobs, db, args.iterations, args.threshold, args.polarity)
    median = float(np.median(times)) * 1e3
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(BENCH_HEADER)
    writer.writerow([len(blobs), args.iterations, f"{median:.4f}",
                     f"{float(np.percentile(times, 95)) * 1e3:.4f}",
                     f"{float(np.mean(times)) * 1e3:.4f}",
                     f"{1e3 / median:.2f}", BACKEND])
    return EXIT_OK


def cmd_simulate(args, out, err):
    if args.script in (None, "-"):
        text = sys.stdin.read()
    else:
        try:
            text = Path(args.script).read_text()
        except FileNotFoundError:
            raise UsageError(f"no such script: {args.script}") from None
    cfg = ProtocolConfig(args.attention_timeout, args.decision_timeout, args.max_repokes)
    log = run_session(parse_script(text), cfg)
    out.write(log.to_csv())
    final = log.final_state
    if final is DroneState.SAFETY_HOLD:
        return EXIT_SAFETY
    if final not in (DroneState.IDLE, DroneState.WITHDRAW, DroneState.ENTER):
        print(f"session ended in {final.value}", file=err)
    return EXIT_OK


def cmd_lights(args, out, err):
    if args.danger:
        ring = danger_lights()
    elif args.heading is not None:
        ring = nav_lights(args.heading)
    else:
        raise UsageError("give --heading or --danger")
    print(ring, file=out)
    return EXIT_OK


def cmd_pattern(args, out, err):
    kind = PatternKind.parse(args.kind)
    kw = dict(height_m=args.height, speed_mps=args.speed, amplitude=args.amplitude)
    if args.area:
        kw["area"] = tuple(args.area)
    if args.target:
        kw["target"] = tuple(args.target)
    text = make_pattern(kind, PatternParams(**kw)).to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signwave", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="render a synthetic sign corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--signs", nargs="+", default=list(CANONICAL_SIGNS))
    p.add_argument("--azimuth", type=_list_arg, default=parse_list("0:90:5"))
    p.add_argument("--altitude", type=_list_arg, default=parse_list("2:5:1"))
    p.add_argument("--distance", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("enroll", help="add templates to a saxdb file")
    p.add_argument("--db", required=True)
    p.add_argument("--sign")
    p.add_argument("--manifest")
    p.add_argument("--azimuth", type=_list_arg)
    p.add_argument("--altitude", type=_list_arg)
    p.add_argument("--distance", type=float)
    p.add_argument("files", nargs="*")
    _add_pipeline(p)
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("recognize", help="match frames against a saxdb file")
    p.add_argument("--db", required=True)
    p.add_argument("files", nargs="+")
    _add_pipeline(p)
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("sweep", help="correctness per azimuth over a corpus manifest")
    p.add_argument("--db", required=True)
    p.add_argument("manifest")
    p.add_argument("--out")
    p.add_argument("--bin", type=float, default=5.0)
    p.add_argument("--by-altitude", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    _add_pipeline(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("uniqueness", help="pairwise distances between signs in a saxdb file")
    p.add_argument("--db", required=True)
    _add_pipeline(p)
    p.set_defaults(func=cmd_uniqueness)

    p = sub.add_parser("bench", help="time decode + recognition per frame")
    p.add_argument("--db")
    p.add_argument("--manifest")
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("files", nargs="*")
    _add_pipeline(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("simulate", help="replay an event script through the protocol")
    p.add_argument("script", nargs="?")
    p.add_argument("--attention-timeout", type=float, default=10.0)
    p.add_argument("--decision-timeout", type=float, default=15.0)
    p.add_argument("--max-repokes", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lights", help="print the LED ring state")
    p.add_argument("--heading", type=float)
    p.add_argument("--danger", action="store_true")
    p.set_defaults(func=cmd_lights)

    p = sub.add_parser("pattern", help="emit a flight pattern as CSV")
    p.add_argument("kind", help=", ".join(k.value for k in PatternKind))
    p.add_argument("--height", type=float, default=5.0)
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--area", type=_list_arg, help="x,y,width,depth")
    p.add_argument("--target", type=_list_arg, help="x,y")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pattern)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if hasattr(args, "threshold"):
            _pipeline(args)  # validate before doing any work
        return args.func(args, out, err)
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except (InvalidInput, SignwaveError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
