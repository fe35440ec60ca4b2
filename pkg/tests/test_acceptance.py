"""Acceptance suite: nine end-to-end criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py`` for the summary lines alone.
"""

import hashlib
import io
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dexanno.actuation import pseudoinverse, pseudoinverse_normal  # noqa: E402
from dexanno.cli import main as cli_main  # noqa: E402
from dexanno.closure import Contact, check_force_closure, cone_edges, contacts_closure, grasp_matrix  # noqa: E402
from dexanno.dataset import DatasetManifest, GraspRecord, annotate_stream, grasp_l1_error, split_dataset  # noqa: E402
from dexanno.errors import ConditioningWarning, SmallCategoryWarning  # noqa: E402
from dexanno.kinematics import KeypointFrame, extract_angles  # noqa: E402
from dexanno.profile import load_profile  # noqa: E402
from dexanno.retarget import INSPIRE_INDEX_BLOCK, CalibrationSet, MappingMatrix, apply_mapping, fit_mapping  # noqa: E402
from handgen import random_hand, stream_lines  # noqa: E402
from oracles import brute_force_closure, random_contact_set, random_rotation, random_unit, tetrahedron_contacts  # noqa: E402

SEED = 20240917


class Outcome:
    def __init__(self, ok, detail):
        self.ok = bool(ok)
        self.detail = detail


# ---------------------------------------------------------------- criteria


def criterion_1():
    rng = np.random.default_rng(SEED)
    shapes = {
        "12x6": lambda: rng.normal(size=(12, 6)),
        "6x12": lambda: rng.normal(size=(6, 12)),
        "6x6": lambda: rng.normal(size=(6, 6)),
        "12x6 rank 4": lambda: rng.normal(size=(12, 4)) @ rng.normal(size=(4, 6)),
    }
    worst_mp = worst_cf = 0.0
    t0 = time.perf_counter()
    for name, make in shapes.items():
        for _ in range(100):
            A = make()
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ConditioningWarning)
                P = pseudoinverse(A)
            res = [
                A @ P @ A - A,
                P @ A @ P - P,
                (A @ P).T - A @ P,
                (P @ A).T - P @ A,
            ]
            worst_mp = max(worst_mp, max(np.abs(r).max() for r in res))
            if np.linalg.matrix_rank(A) == A.shape[1]:
                worst_cf = max(worst_cf, np.abs(pseudoinverse_normal(A) - P).max())
    dt = time.perf_counter() - t0
    ok = worst_mp <= 1e-8 and worst_cf <= 1e-8 and dt < 5
    return Outcome(ok, f"max MP residual {worst_mp:.2e}, closed form vs SVD {worst_cf:.2e}, {dt:.2f}s")


def criterion_2():
    rng = np.random.default_rng(SEED + 2)
    a, b, c = 0.3530, 0.4310, 0.2827
    d, e, z = 0.2584, 0.4130, -0.0018
    w = MappingMatrix(("index",), {"index": np.hstack([np.zeros((2, 1)), INSPIRE_INDEX_BLOCK])})
    worst = 0.0
    for _ in range(1000):
        theta = np.zeros(20)
        abd, f0, f1, f2 = rng.uniform(-0.5, 1.6, size=4)
        theta[4:8] = [abd, f0, f1, f2]
        got = apply_mapping(theta, w).values
        ref = np.array([a * f0 + b * f1 + c * f2, d * f0 + e * f1 + z * f2])
        worst = max(worst, np.abs(got - ref).max())
    return Outcome(worst <= 1e-12, f"max deviation from hand-coded multiply {worst:.2e} over 1000 inputs")


def _cal_set(rng, W0, noise):
    X = rng.uniform(0.0, 1.6, size=(60, 3))
    Y = X @ W0.T + noise * rng.normal(size=(60, 2))
    return CalibrationSet(X, Y)


def criterion_3():
    rng = np.random.default_rng(SEED + 3)
    t0 = time.perf_counter()
    worst = 0.0
    targets = [INSPIRE_INDEX_BLOCK] + [rng.uniform(-1, 1, size=(2, 3)) for _ in range(19)]
    for W0 in targets:
        fit = fit_mapping(_cal_set(rng, W0, 0.0))
        worst = max(worst, np.abs(fit.block - W0).max())
    errs = [fit_mapping(_cal_set(np.random.default_rng(s), INSPIRE_INDEX_BLOCK, 0.01)).error for s in range(20)]
    dt = time.perf_counter() - t0
    mean = float(np.mean(errs))
    ok = worst <= 1e-9 and mean <= 0.02 and dt < 10
    return Outcome(ok, f"noiseless max entry error {worst:.2e}, noisy mean fit error {mean:.4f} rad, {dt:.2f}s")


def _fixture(P, N, mu):
    return [Contact(p, n, mu) for p, n in zip(P, N)]


def criterion_4():
    rng = np.random.default_rng(SEED + 4)
    orng = np.random.default_rng(SEED + 40)
    agree = closed = 0
    t_lib = 0.0
    t0 = time.perf_counter()
    for _ in range(200):
        P, N, mu = random_contact_set(rng)
        G = grasp_matrix(_fixture(P, N, mu)).G
        t1 = time.perf_counter()
        v = check_force_closure(G, tol=1e-9)
        t_lib += time.perf_counter() - t1
        ref, _ = brute_force_closure(G, tol=1e-9, rng=orng)
        agree += v.closed == ref
        closed += ref
    dt = time.perf_counter() - t0

    tet = contacts_closure(_fixture(*tetrahedron_contacts()))
    single = contacts_closure([Contact([0, 0, 1.0], [0, 0, -1.0], 0.8)])
    anti = contacts_closure(_fixture(np.array([[1.0, 0, 0], [-1.0, 0, 0]]), np.array([[-1.0, 0, 0], [1.0, 0, 0]]), 0.0))
    fixtures_ok = tet.closed and not single.closed and not anti.closed
    ok = agree == 200 and fixtures_ok and dt < 30
    return Outcome(
        ok,
        f"agreement {agree}/200 ({closed} closed), fixtures {'ok' if fixtures_ok else 'WRONG'}, "
        f"library {t_lib:.2f}s, total with oracle {dt:.2f}s",
    )


def criterion_5():
    rng = np.random.default_rng(SEED + 5)
    m = 6
    worst_norm = worst_ang = worst_sum = 0.0
    for _ in range(1000):
        n = random_unit(rng, 1)[0]
        mu = rng.uniform(0, 2)
        E = cone_edges(Contact([0.0, 0.0, 0.0], n, mu), m).edges
        theta = np.arctan(mu)
        worst_norm = max(worst_norm, np.abs(np.linalg.norm(E, axis=1) - 1).max())
        ang = np.arctan2(np.linalg.norm(np.cross(E, n), axis=1), E @ n)
        worst_ang = max(worst_ang, np.abs(ang - theta).max())
        worst_sum = max(worst_sum, np.abs(E.sum(axis=0) - m * np.cos(theta) * n).max())
    ok = worst_norm <= 1e-12 and worst_ang <= 1e-9 and worst_sum <= 1e-9
    return Outcome(ok, f"unit-norm {worst_norm:.2e}, half-angle {worst_ang:.2e}, edge sum {worst_sum:.2e}")


def criterion_6():
    rng = np.random.default_rng(SEED + 6)
    worst = 0.0
    in_range = True
    for _ in range(100):
        pts = random_hand(rng) + 0.003 * rng.normal(size=(21, 3))
        R = random_rotation(rng)
        t = rng.uniform(-1, 1, size=3)
        a = extract_angles(KeypointFrame(0, pts)).values
        b = extract_angles(KeypointFrame(0, pts @ R.T + t)).values
        worst = max(worst, np.abs(a - b).max())
        in_range &= bool(np.all((a >= 0) & (a <= np.pi)) and np.all((b >= 0) & (b <= np.pi)))
    ok = worst <= 1e-9 and in_range
    return Outcome(ok, f"max angle change {worst:.2e} rad, all angles in [0, pi]: {in_range}")


def criterion_7(tmp_dir):
    rng = np.random.default_rng(SEED + 7)
    lines = stream_lines(500, rng, intrinsics={"fx": 615.0, "fy": 615.0, "cx": 320.0, "cy": 240.0}, bad_every=50)
    src = Path(tmp_dir) / "stream.jsonl"
    src.write_text("\n".join(lines) + "\n")
    digests = []
    for k in range(2):
        out = Path(tmp_dir) / f"records{k}.jsonl"
        code = cli_main(["annotate", "--in", str(src), "--out", str(out), "--profile", "inspire",
                         "--object-id", "mug_001", "--category", "mug"])
        if code != 0:
            return Outcome(False, f"annotate exited {code}")
        digests.append(hashlib.sha256(out.read_bytes()).hexdigest())
    emitted = len(out.read_text().splitlines())
    res = annotate_stream(io.StringIO(src.read_text()), load_profile("inspire"), "mug_001", "mug")
    counts_ok = len(res.records) + len(res.skipped) == res.n_input == 500 and emitted == len(res.records)
    ok = digests[0] == digests[1] and counts_ok
    return Outcome(ok, f"identical sha256 {digests[0] == digests[1]}, emitted {emitted} + skipped {len(res.skipped)} "
                       f"of {res.n_input} frames")


def criterion_8():
    rng = np.random.default_rng(SEED + 8)
    cats = [f"cat{k:02d}" for k in range(21)]
    sizes = rng.multinomial(1108 - 21 * 5, np.ones(21) / 21) + 5
    objs = [(f"{c}_{i:03d}", c) for c, n in zip(cats, sizes) for i in range(n)]
    manifest = DatasetManifest(cats, objs, "8.5:1.5")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallCategoryWarning)
        train, test = split_dataset(manifest, seed=7)
        again = split_dataset(manifest, seed=7)
    ids = {o for o, _ in objs}
    partition = set(train) | set(test) == ids and not set(train) & set(test) and len(train) + len(test) == 1108
    worst = 0.0
    test_set = set(test)
    for c, n in zip(cats, sizes):
        k = sum(1 for o, cc in objs if cc == c and o in test_set)
        worst = max(worst, abs(k - 0.15 * n))
    ok = partition and worst <= 1 and again == (train, test)
    return Outcome(ok, f"{len(train)}/{len(test)} split, worst per-category deviation {worst:.2f} objects, "
                       f"partition {partition}, seed-stable {again == (train, test)}")


def criterion_9():
    def rec(R=(1.0, 0, 0, 0), T=(0.0, 0, 0), Q=None):
        return GraspRecord("o", "c", "inspire", np.array(R, dtype=float), np.array(T, dtype=float),
                           np.zeros(12) if Q is None else np.asarray(Q, dtype=float))

    c, s = np.cos(0.15), np.sin(0.15)
    fixtures = [
        # translation only, lambda = (0, 1, 0): |0.1| + 0 + 0
        (rec(T=(0.1, 0, 0)), rec(), (0, 1, 0), 0.1),
        # 12 joints each off by 0.05, lambda = (0, 0, 1)
        (rec(Q=np.full(12, 0.05)), rec(), (0, 0, 1), 0.6),
        # rotation about x by 0.3 rad, translation (0.01, -0.02, 0.03), joint 3 off by 0.2, lambda = (2, 3, 4)
        (rec(R=(c, s, 0, 0), T=(0.01, -0.02, 0.03), Q=np.eye(12)[3] * 0.2), rec(), (2, 3, 4),
         2 * ((1 - c) + s) + 3 * 0.06 + 4 * 0.2),
    ]
    worst = 0.0
    for pred, truth, lam, expected in fixtures:
        worst = max(worst, abs(grasp_l1_error(pred, truth, lam).aggregate - expected))
    r = rec(R=(0.5, 0.5, -0.5, 0.5), T=(0.3, 0.2, 0.1), Q=np.linspace(0, 1, 12))
    zero = grasp_l1_error(r, r).aggregate
    ok = worst <= 1e-12 and zero == 0.0
    return Outcome(ok, f"max fixture deviation {worst:.2e}, identical records {zero}")


CRITERIA = [
    ("1 Moore-Penrose suite", criterion_1),
    ("2 retarget exactness", criterion_2),
    ("3 calibration recovery", criterion_3),
    ("4 force-closure oracle agreement", criterion_4),
    ("5 cone geometry", criterion_5),
    ("6 kinematics equivariance", criterion_6),
    ("7 pipeline determinism", criterion_7),
    ("8 split contract", criterion_8),
    ("9 eval metrics", criterion_9),
]


def _line(name, out):
    return f"[{'PASS' if out.ok else 'FAIL'}] criterion {name}: {out.detail}"


# ---------------------------------------------------------------- pytest


@pytest.mark.parametrize("name,fn", CRITERIA, ids=[n.split(" ", 1)[0] for n, _ in CRITERIA])
def test_criterion(name, fn, tmp_path, capsys):
    out = fn(tmp_path) if fn is criterion_7 else fn()
    with capsys.disabled():
        print("\n" + _line(name, out))
    assert out.ok, out.detail


if __name__ == "__main__":
    import logging
    import tempfile

    # criterion 7 skips degenerate frames on purpose
    logging.getLogger("dexanno").setLevel(logging.ERROR)

    failed = 0
    for name, fn in CRITERIA:
        with tempfile.TemporaryDirectory() as tmp:
            out = fn(tmp) if fn is criterion_7 else fn()
        print(_line(name, out), flush=True)
        failed += not out.ok
    sys.exit(1 if failed else 0)
