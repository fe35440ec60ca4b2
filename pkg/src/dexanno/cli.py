"""``dexanno`` command line: each pipeline stage over line-delimited JSON.

Exit codes: 0 success, 1 input or usage error, 2 numerical failure.
Diagnostics go to stderr; data goes to --out or stdout.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .actuation import joints_to_actuators
from .closure import DEFAULT_EDGES, DEFAULT_TOL, contacts_closure
from .dataset import (
    DEFAULT_RATIO,
    DatasetManifest,
    annotate_items,
    dataset_stats,
    evaluate_pairs,
    split_dataset,
    summarize_reports,
)
from .errors import DexAnnoError, InputError, NumericalError
from .jsonio import iter_lines, parse_line, read_jsonl, write_jsonl
from .kinematics import HUMAN_DOF, extract_angles
from .profile import load_profile
from .retarget import CalibrationSet, apply_mapping, fit_mapping
from .streams import parse_contacts, read_contact_sets, read_keypoint_stream

log = logging.getLogger("dexanno")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _io(p, inp_help="input file ('-' for stdin)"):
    p.add_argument("--in", dest="inp", default="-", metavar="PATH", help=inp_help)
    p.add_argument("--out", default="-", metavar="PATH", help="output file ('-' for stdout)")


def _closure_flags(p):
    p.add_argument("--mu", type=float, default=None,
                   help="friction coefficient (dimensionless, >= 0) for contacts that omit mu")
    p.add_argument("--edges", type=int, default=DEFAULT_EDGES,
                   help=f"friction cone edges per contact (count, >= 3; default {DEFAULT_EDGES})")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                   help=f"interior margin tolerance (normalised wrench units, > 0; default {DEFAULT_TOL:g})")


def _jobs(p):
    p.add_argument("--jobs", type=int, default=1, help="worker processes (count, >= 1); output order is preserved")


def _profile(p):
    p.add_argument("--profile", required=True, metavar="PATH|NAME",
                   help="hand profile JSON file, or built-in name: inspire, shadow, generic_underactuated")


def build_parser():
    parser = _Parser(prog="dexanno", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dexanno {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("angles", help="keypoint stream -> 20 human joint angles (rad) per frame")
    _io(p, "keypoint stream: optional intrinsics header (pixels) then frames (meters or pixel+depth)")

    p = sub.add_parser("retarget", help="human angles (rad) -> robot joint angles (rad)")
    _io(p, "angle records {frame_index, angles[20]} in radians")
    _profile(p)

    p = sub.add_parser("fit-map", help="fit one finger's mapping block from calibration pairs")
    _io(p, "calibration records {human[...], robot[...]} in radians")
    p.add_argument("--finger", default="index", help="finger the samples belong to (default index)")
    p.add_argument("--columns", default="1,2,3",
                   help="human finger columns used, 0=abd 1..3=flexions (default 1,2,3)")
    p.add_argument("--ridge", type=float, default=0.0, help="ridge penalty (dimensionless, >= 0; default 0)")

    p = sub.add_parser("actuate", help="robot joint angles (rad) -> actuator commands")
    _io(p, "records {frame_index, Q[d_RH]} in radians")
    _profile(p)

    p = sub.add_parser("fc-check", help="force-closure verdict per contact set")
    _io(p, "contact sets {grasp_id, contacts: [{p (m), n (unit), mu}]}")
    _closure_flags(p)
    _jobs(p)

    p = sub.add_parser("annotate", help="keypoint stream -> grasp records")
    _io(p, "keypoint stream (see `angles`)")
    _profile(p)
    p.add_argument("--object-id", default="unknown", help="object identifier written into every record")
    p.add_argument("--category", default="unknown", help="object category written into every record")
    p.add_argument("--contacts", default=None, metavar="PATH",
                   help="contact sets keyed by grasp_id = frame_index; frames without one stay unvalidated")
    _closure_flags(p)
    _jobs(p)

    p = sub.add_parser("split", help="train/test split of a manifest by object id")
    _io(p, "manifest JSON {categories, objects: [{object_id, category}], split}")
    p.add_argument("--seed", type=int, default=0, help="split seed (integer; default 0)")
    p.add_argument("--ratio", default=None, help=f"train:test ratio (default manifest value or {DEFAULT_RATIO})")

    p = sub.add_parser("eval", help="weighted L1 error between predicted and ground-truth records")
    _io(p, "predicted grasp records")
    p.add_argument("--truth", required=True, metavar="PATH", help="ground-truth grasp records, line-aligned with --in")
    p.add_argument("--lambda", dest="lam", default="1,1,1",
                   help="weights r,t,j for rotation (quaternion units), translation (m), joints (rad)")

    p = sub.add_parser("stats", help="counts and closure pass rate for a record file")
    _io(p, "grasp records")
    p.add_argument("--manifest", default=None, metavar="PATH", help="manifest JSON for per-category object counts")
    return parser


@contextlib.contextmanager
def _open_in(path):
    if path == "-":
        yield sys.stdin
    else:
        try:
            fh = open(path, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc}") from None
        with fh:
            yield fh


@contextlib.contextmanager
def _open_out(path):
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        try:
            fh = open(path, "w", encoding="utf-8", newline="\n")
        except OSError as exc:
            raise InputError(f"cannot write {path}: {exc}") from None
        with fh:
            yield fh


def _pmap(jobs):
    if jobs <= 1:
        return contextlib.nullcontext(map)
    return _PoolMap(jobs)


class _PoolMap:
    def __init__(self, jobs):
        self.jobs = jobs

    def __enter__(self):
        self.pool = ProcessPoolExecutor(self.jobs)
        return lambda fn, items: self.pool.map(fn, items, chunksize=16)

    def __exit__(self, *exc):
        self.pool.shutdown()


def _check_closure_args(args):
    if args.edges < 3:
        raise InputError("--edges must be >= 3")
    if not args.tol > 0:
        raise InputError("--tol must be > 0")
    if args.mu is not None and not args.mu >= 0:
        raise InputError("--mu must be >= 0")
    if args.jobs < 1:
        raise InputError("--jobs must be >= 1")


def cmd_angles(args):
    with _open_in(args.inp) as fh, _open_out(args.out) as out:
        for item in read_keypoint_stream(fh):
            if item.frame is None:
                log.warning("skipping: %s", item.error)
                continue
            try:
                ang = extract_angles(item.frame)
            except DexAnnoError as exc:
                log.warning("skipping frame %d: %s", item.frame.frame_index, exc)
                continue
            write_jsonl([{"frame_index": item.frame.frame_index, "angles": ang.values.tolist()}], out)


def _numeric(doc, key, lineno, size=None):
    try:
        v = np.asarray(doc[key], dtype=float).reshape(-1)
    except (KeyError, TypeError, ValueError):
        raise InputError(f"line {lineno}: missing or non-numeric {key!r}") from None
    if size is not None and v.size != size:
        raise InputError(f"line {lineno}: {key!r} has {v.size} values, expected {size}")
    return v


def cmd_retarget(args):
    prof = load_profile(args.profile)
    with _open_in(args.inp) as fh, _open_out(args.out) as out:
        for lineno, text in iter_lines(fh):
            doc = parse_line(lineno, text)
            theta = _numeric(doc, "angles", lineno, HUMAN_DOF)
            res = apply_mapping(theta, prof.mapping, prof.lower, prof.upper)
            write_jsonl([{
                "frame_index": doc.get("frame_index", lineno - 1),
                "hand_id": prof.hand_id,
                "Q": res.values.tolist(),
                "saturated": np.flatnonzero(res.saturated).tolist(),
            }], out)


def cmd_fit_map(args):
    try:
        cols = tuple(int(c) for c in args.columns.split(","))
    except ValueError:
        raise InputError(f"--columns must be comma-separated integers, got {args.columns!r}") from None
    with _open_in(args.inp) as fh:
        docs = read_jsonl(fh)
    human = [_numeric(d, "human", k + 1, len(cols)) for k, d in enumerate(docs)]
    robot = [_numeric(d, "robot", k + 1) for k, d in enumerate(docs)]
    if not docs:
        raise InputError("no calibration samples")
    cal = CalibrationSet(np.array(human), np.array(robot), args.finger, cols)
    fit = fit_mapping(cal, args.ridge)
    with _open_out(args.out) as out:
        write_jsonl([{
            "finger": fit.finger,
            "columns": list(fit.columns),
            "n_samples": cal.n_samples,
            "W": fit.block.tolist(),
            "W_full": fit.full_block().tolist(),
            "error": fit.error,
        }], out)


def cmd_actuate(args):
    prof = load_profile(args.profile)
    with _open_in(args.inp) as fh, _open_out(args.out) as out:
        for lineno, text in iter_lines(fh):
            doc = parse_line(lineno, text)
            q = _numeric(doc, "Q", lineno, prof.dof)
            cmd = joints_to_actuators(q, prof.coupling)
            if not cmd.consistent:
                log.warning("line %d: pose is %.3g rad from the coupling's reachable set", lineno, cmd.residual)
            write_jsonl([{
                "frame_index": doc.get("frame_index", lineno - 1),
                "U": cmd.u.tolist(),
                "residual": cmd.residual,
                "consistent": cmd.consistent,
                "saturated": np.flatnonzero(cmd.saturated).tolist(),
            }], out)


def _fc_job(job):
    gid, contacts, edges, tol = job
    v = contacts_closure(contacts, edges, tol)
    return {"grasp_id": gid, "closed": v.closed, "margin": v.margin, "rank": v.rank}


def cmd_fc_check(args):
    _check_closure_args(args)
    jobs = []
    with _open_in(args.inp) as fh:
        for lineno, text in iter_lines(fh):
            doc = parse_line(lineno, text)
            jobs.append((doc.get("grasp_id", lineno - 1), parse_contacts(doc, args.mu), args.edges, args.tol))
    with _pmap(args.jobs) as pmap, _open_out(args.out) as out:
        write_jsonl(pmap(_fc_job, jobs), out)


def cmd_annotate(args):
    _check_closure_args(args)
    prof = load_profile(args.profile)
    contacts = read_contact_sets(args.contacts, args.mu) if args.contacts else None
    with _open_in(args.inp) as fh:
        items = list(read_keypoint_stream(fh))
    with _pmap(args.jobs) as pmap:
        res = annotate_items(items, prof, args.object_id, args.category, contacts, args.edges, args.tol,
                             map_fn=pmap)
    with _open_out(args.out) as out:
        write_jsonl((r.to_json() for r in res.records), out)
    log.info("frames: %d in, %d emitted, %d skipped", res.n_input, len(res.records), len(res.skipped))


def _load_manifest(path):
    with _open_in(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"manifest {path} is not valid JSON: {exc}") from None
    return DatasetManifest.from_json(doc)


def cmd_split(args):
    manifest = _load_manifest(args.inp)
    train, test = split_dataset(manifest, args.seed, args.ratio)
    side = {**{o: "train" for o in train}, **{o: "test" for o in test}}
    with _open_out(args.out) as out:
        write_jsonl(({"object_id": o, "category": c, "split": side[o]} for o, c in manifest.objects), out)


def cmd_eval(args):
    try:
        lam = tuple(float(x) for x in args.lam.split(","))
    except ValueError:
        lam = ()
    if len(lam) != 3 or min(lam) < 0:
        raise InputError(f"--lambda needs three non-negative weights r,t,j, got {args.lam!r}")
    with _open_in(args.inp) as fh:
        pred = read_jsonl(fh)
    with _open_in(args.truth) as fh:
        truth = read_jsonl(fh)
    reports = evaluate_pairs(pred, truth, lam)
    with _open_out(args.out) as out:
        write_jsonl(({"index": k, **r.to_json()} for k, r in enumerate(reports)), out)
        write_jsonl([{"summary": summarize_reports(reports)}], out)


def cmd_stats(args):
    manifest = _load_manifest(args.manifest) if args.manifest else None
    with _open_in(args.inp) as fh:
        summary = dataset_stats(fh, manifest)
    if summary["malformed"]:
        log.warning("%d malformed record line(s)", summary["malformed"])
    with _open_out(args.out) as out:
        write_jsonl([summary], out)


COMMANDS = {
    "angles": cmd_angles,
    "retarget": cmd_retarget,
    "fit-map": cmd_fit_map,
    "actuate": cmd_actuate,
    "fc-check": cmd_fc_check,
    "annotate": cmd_annotate,
    "split": cmd_split,
    "eval": cmd_eval,
    "stats": cmd_stats,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        COMMANDS[args.command](args)
    except NumericalError as exc:
        print(f"dexanno {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"dexanno {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
