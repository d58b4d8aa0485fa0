"""Acceptance criteria 1-9, each at its stated tolerance.

Every test records a single PASS/FAIL line (echoed in the terminal summary)
before asserting.
"""
import itertools
import time

import numpy as np

from cdloc.compare import compare_localizations, compare_via_metric
from cdloc.jets import HoloJet, holo_invert, holo_mul
from cdloc.kernels import ConjugateBy, PowerSeries, ProductPolydisc, jet_at, jet_at_numeric
from cdloc.localization import (
    build_block_gram,
    extract_invariants,
    normalize,
    oracle_invariants_direct,
)
from cdloc.multiindex import enumerate_indices
from cdloc.specht import MatrixTuple, Status, conjugate, find_certificate, specht_test
from conftest import ACCEPTANCE_LINES, random_point, random_unitary
from oracles import log_curvature, symbolic_jet


def record(n: int, ok: bool, detail: str):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_golden_invariants(models):
    import sympy as sp

    # series oracle for the metric jets the goldens are computed from
    z, wb = sp.symbols("z wb")
    for lam in (1, 2):
        exact = symbolic_jet(sp.Matrix([[(1 - z * wb) ** (-lam)]]), [z], [wb], [0.0], 1)
        assert np.allclose(jet_at(ProductPolydisc((float(lam),)), [0.0], 1).data, exact, atol=1e-14)

    start = time.perf_counter()
    values = {}
    for name in ("szego", "bergman"):
        jet, _ = normalize(jet_at(models[name], [0.0], 1))
        values[name] = extract_invariants(jet, 2)[(1,), (1,)][0, 0]
    res = compare_localizations(models["szego"], models["bergman"], [0.0], k=2)
    elapsed = time.perf_counter() - start

    err = max(abs(values["szego"] - 1.0), abs(values["bergman"] - 0.5))
    a, b = res.verdict.witness_values
    sound = (
        res.status == "Inequivalent"
        and res.verdict.witness is not None
        and abs(a - b) > 1e-8
        and abs(a - 1.0) < 1e-10 and abs(b - 0.5) < 1e-10
    )
    record(1, err <= 1e-10 and sound and elapsed < 1.0,
           f"|M-golden| = {err:.1e}, {res.status} via '{res.verdict.witness_text}' ({a.real:.6g} vs {b.real:.6g}), "
           f"{elapsed * 1e3:.1f} ms")


def test_criterion_2_unitary_frame_change_equivalent(models):
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst, failures, runs = 0.0, [], 0
    for name, model in models.items():
        assert model.n <= 2 and model.m <= 2
        for _ in range(5):
            other = ConjugateBy(model, random_unitary(rng, model.n))
            for _ in range(5):
                z = random_point(rng, model.m)
                for k in (2, 3):
                    res = compare_localizations(model, other, z, k)
                    runs += 1
                    if res.status != "Equivalent" or res.verdict.residual is None or res.verdict.residual > 1e-6:
                        failures.append((name, k, res.verdict.reason))
                    else:
                        worst = max(worst, res.verdict.residual)
    elapsed = time.perf_counter() - start
    record(2, not failures and elapsed < 30.0,
           f"{runs - len(failures)}/{runs} Equivalent, max residual {worst:.1e}, {elapsed:.2f} s"
           + (f"; first failure {failures[0]}" if failures else ""))


def test_criterion_3_oracle_equivalence(models):
    rng = np.random.default_rng(3)
    names = list(models)
    worst, count = 0.0, 0
    for trial in range(66):
        model = models[names[trial % len(names)]]
        k = int(rng.integers(2, 4))
        z = random_point(rng, model.m, 0.7)
        jet, _ = normalize(jet_at(model, z, k - 1))
        a, b = extract_invariants(jet, k), oracle_invariants_direct(jet, k)
        worst = max(worst, float(np.max(np.abs(a.data - b.data))))
        count += 1
    record(3, count >= 50 and worst <= 1e-8, f"{count} instances, max entrywise gap {worst:.1e}")


def test_criterion_4_curvature_identity(models):
    worst = 0.0
    for name, lam in (("szego", 1), ("bergman", 2)):
        for z in (0.0, 0.3, 0.5 + 0.2j):
            jet, _ = normalize(jet_at(models[name], [z], 1))
            M = extract_invariants(jet, 2)[(1,), (1,)][0, 0]
            worst = max(worst, abs(M * log_curvature(lam, z) - 1))
    record(4, worst <= 1e-8, f"max |M * ddbar log K - 1| = {worst:.1e}")


def test_criterion_5_structural_invariants(models):
    rng = np.random.default_rng(5)
    worst = {k: 0.0 for k in ("hermitian", "borders", "adjoint", "idempotence", "scale")}
    min_eig = np.inf
    for name, model in models.items():
        for _ in range(3):
            z = random_point(rng, model.m)
            for k in (2, 3):
                raw = jet_at(model, z, k - 1)
                rel = max(1.0, float(np.max(np.abs(raw.data))))
                worst["hermitian"] = max(worst["hermitian"], raw.hermitian_defect() / rel)
                jet, _ = normalize(raw)
                worst["borders"] = max(worst["borders"], jet.normalization_defect())
                H = build_block_gram(jet, k)
                min_eig = min(min_eig, float(H.eigenvalues[0]))
                worst["adjoint"] = max(worst["adjoint"], extract_invariants(jet, k).adjoint_defect())
                again, _ = normalize(jet)
                worst["idempotence"] = max(worst["idempotence"], float(np.max(np.abs(again.data - jet.data))))
                c = float(rng.uniform(0.1, 10.0))
                scaled, _ = normalize(raw.scaled(c))
                worst["scale"] = max(worst["scale"], float(np.max(np.abs(scaled.data - jet.data))))
    ok = all(v <= 1e-12 for v in worst.values()) and min_eig > 0
    record(5, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", min Gram eigenvalue {min_eig:.2e}")


def test_criterion_6_constant_unitary_between_normalized_frames(models):
    rng = np.random.default_rng(6)
    pool = [m for m in models.values()]
    worst_const, worst_unit, worst_blocks, recovered = 0.0, 0.0, 0.0, 0
    for trial in range(20):
        model = pool[trial % len(pool)]
        m, n, d = model.m, model.n, 2
        L = len(enumerate_indices(m, d))
        coeffs = 0.3 * (rng.standard_normal((L, n, n)) + 1j * rng.standard_normal((L, n, n)))
        coeffs[0] = random_unitary(rng, n) @ np.diag(rng.uniform(0.5, 2.0, n))
        change = HoloJet(m, n, d, np.zeros(m), coeffs)
        z = random_point(rng, m, 0.3)
        ja, phi_a = normalize(jet_at(model, z, d))
        jb, phi_b = normalize(jet_at(ConjugateBy(model, change), z, d))
        # transition between the two normalized frames
        W = holo_mul(phi_b, holo_mul(change.reexpand(z, d), holo_invert(phi_a)))
        U = W.data[0]
        worst_const = max(worst_const, float(np.max(np.abs(W.data[1:]))))
        worst_unit = max(worst_unit, float(np.max(np.abs(U.conj().T @ U - np.eye(n)))))
        worst_blocks = max(worst_blocks, float(np.max(np.abs(U @ ja.data @ U.conj().T - jb.data))))
        # independent recovery from the normalized blocks alone
        flat = lambda j: MatrixTuple(j.data.reshape(-1, n, n))
        V = find_certificate(flat(ja), flat(jb), tol=1e-10)
        if V is not None and np.max(np.abs(V @ ja.data @ V.conj().T - jb.data)) <= 1e-10:
            recovered += 1
    ok = max(worst_const, worst_unit, worst_blocks) <= 1e-10 and recovered == 20
    record(6, ok, f"20 trials: transition non-constant part {worst_const:.1e}, unitarity {worst_unit:.1e}, "
                  f"block mismatch {worst_blocks:.1e}, recovered {recovered}/20")


def test_criterion_7_specht_module():
    A = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    vt = specht_test(MatrixTuple(A[None]), MatrixTuple(A.T[None]))
    v2 = specht_test(MatrixTuple(A[None]), MatrixTuple(2 * A[None]))
    rng = np.random.default_rng(7)
    hits, unit = 0, 0.0
    for trial in range(20):
        p, s = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        tA = MatrixTuple(rng.standard_normal((s, p, p)) + 1j * rng.standard_normal((s, p, p)))
        tB = conjugate(tA, random_unitary(rng, p))
        v = specht_test(tA, tB, seed=trial)
        if v.status is Status.EQUIVALENT:
            hits += 1
        if v.certificate is not None:
            U = v.certificate
            unit = max(unit, float(np.linalg.norm(U.conj().T @ U - np.eye(p), 2)))
    U = vt.certificate
    unit = max(unit, float(np.linalg.norm(U.conj().T @ U - np.eye(2), 2)))
    ok = (
        vt.status is Status.EQUIVALENT
        and v2.status is Status.INEQUIVALENT and v2.witness_text == "a a*"
        and hits == 20 and unit <= 1e-10
    )
    record(7, ok, f"A vs A^T {vt.status.value}; A vs 2A {v2.status.value} via '{v2.witness_text}'; "
                  f"random conjugates {hits}/20; max ||U*U - I|| {unit:.1e}")


def test_criterion_8_path_agreement(models):
    rng = np.random.default_rng(8)
    names = list(models)
    pairs = [(a, b) for a, b in itertools.product(names, names)
             if (models[a].m, models[a].n) == (models[b].m, models[b].n)]
    mismatches, total, equivalent = [], 0, 0
    for a, b in pairs:
        for _ in range(3):
            z = random_point(rng, models[a].m)
            s1 = compare_localizations(models[a], models[b], z).status
            s2 = compare_via_metric(models[a], models[b], z).status
            total += 1
            equivalent += s1 == "Equivalent"
            if s1 != s2:
                mismatches.append((a, b, s1, s2))
    record(8, not mismatches,
           f"{total - len(mismatches)}/{total} agree over {len(pairs)} shape-compatible pairs "
           f"({equivalent} Equivalent, {total - equivalent} other)"
           + (f"; first mismatch {mismatches[0]}" if mismatches else ""))


def test_criterion_9_quadrature(models):
    rng = np.random.default_rng(9)
    worst_cat = 0.0
    for name, model in models.items():
        for _ in range(2):
            z = random_point(rng, model.m, 0.6)
            for d in (1, 2, 3):
                exact = jet_at(model, z, d).data
                num = jet_at_numeric(model, z, d).data
                worst_cat = max(worst_cat, float(np.max(np.abs(num - exact))) / max(1.0, float(np.max(np.abs(exact)))))
    # polynomial kernels: per-variable degree 4 < N
    terms = {}
    for P in enumerate_indices(2, 2):
        B = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        terms[(P, P)] = 0.5 * B @ B.conj().T
    polys = [models["poly_rank2"], PowerSeries(2, 2, terms)]
    worst_poly = 0.0
    for model in polys:
        for z in (np.zeros(model.m), random_point(rng, model.m, 0.6)):
            for d in (1, 2, 3):
                diff = jet_at_numeric(model, z, d).data - jet_at(model, z, d).data
                worst_poly = max(worst_poly, float(np.max(np.abs(diff))))
    record(9, worst_cat <= 1e-8 and worst_poly <= 1e-12,
           f"catalog (d <= 3) max scaled error {worst_cat:.1e}; polynomial kernels max error {worst_poly:.1e}")
