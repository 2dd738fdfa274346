"""Acceptance criteria, one test each; a pass/fail line per criterion is printed at the end."""

import subprocess
import sys
import time
from fractions import Fraction

from conftest import ACCEPTANCE_LINES, context
from tractor_poisson.checks import SIGMA_KS, calibrate, run_check

NS = (2, 3, 4, 5)


def _record(tag, title, fn):
    t0 = time.perf_counter()
    try:
        detail = fn() or ""
    except AssertionError as exc:
        ACCEPTANCE_LINES.append(f"FAIL {tag} {title} ({time.perf_counter() - t0:.1f}s): {exc}")
        raise
    ACCEPTANCE_LINES.append(f"PASS {tag} {title} ({time.perf_counter() - t0:.1f}s) {detail}".rstrip())


def _passes(check_id, n, params=None):
    r = run_check(check_id, n, params, ctx=context(n))
    assert r.status == "pass", r.line()
    return r


def test_01_structural_suite():
    def body():
        for n in NS:
            t0 = time.perf_counter()
            _passes("V00", n)
            _passes("V16", n)
            elapsed = time.perf_counter() - t0
            assert elapsed < 10, f"n={n} took {elapsed:.1f}s"

    _record("C01", "structure: Jacobi, grading, B-orthogonality, theta, P-filtration, n=2..5", body)


def test_02_self_adjointness():
    def body():
        for n in (2, 3, 4):
            for k in range(1, n + 1):
                _passes("V01", n, {"k": k})

    _record("C02", "(d*a)^b = (-1)^k a^(d*b) on full chain bases, n=2..4", body)


def test_03_E_star():
    def body():
        for n in NS:
            _passes("V02", n)

    _record("C03", "d_K E* = 0 and d_P E*(F_i, G_j) = delta_ij, n=2..5", body)


def test_04_sigma_recurrence():
    def body():
        for n in NS:
            for k in SIGMA_KS:
                _passes("V05", n, {"k": k})

    _record("C04", "k sigma_k + sigma_-1 = (k+1) sigma_(k-1) via the affine family, n=2..5", body)


def test_05_kernel_suite():
    def body():
        for n in NS:
            t0 = time.perf_counter()
            for k in range(1, n):
                _passes("V06", n, {"k": k})
                _passes("V07_kernel_bgg_criterion", n, {"k": k})
            if n == 5:
                elapsed = time.perf_counter() - t0
                assert elapsed < 300, f"n=5 sweep took {elapsed:.0f}s"

    _record("C05", "d*_P phi = delta_K phi = d*_P d_P phi = 0 and d_P phi closed form, n=2..5", body)


def test_06_harmonicity():
    def body():
        for n in NS:
            c = context(n).calc()
            for k in range(1, n):
                assert c.laplace_K(context(n).kernel(k).phi).is_zero(), f"n={n} k={k}"

    _record("C06", "Laplace_K phi_k = 0, n=2..5", body)


def test_07_weighted_eigenvalue():
    def body():
        for n in NS:
            for k in range(1, n):
                for lam in (0, 1, -1, 2):
                    _passes("V10", n, {"k": k, "lambda": Fraction(lam)})
        r = _passes("V10", 4, {"k": 1, "lambda": Fraction(1)})
        assert r.info["eigenvalue"] == "-3"
        return "eigenvalue(n=4,k=1,lambda=1) = -3"

    _record("C07", "weighted delta_K and Laplace_K at lambda in {0,1,-1,2}, n=2..5", body)


def test_08_image_membership():
    def body():
        for n in NS:
            for k in range(1, n):
                _passes("V11", n, {"k": k})

    _record("C08", "i_E phi_k and phi_k|V_-1 in im d*_P with certificates, n=2..5", body)


def test_09_bgg_compatibility():
    def body():
        for n in (3, 4, 5):
            for k in range(1, n - 1):
                _passes("V12", n, {"k": k})
        for n in (2, 4):
            _passes("V12", n, {"k": n // 2, "middle": True})

    _record("C09", "(k+2) d_K phi_k = (-1)^(k+1) k(n-2k) d_P phi_(k+1), n=3..5; d_K phi_(n/2) = 0", body)


def test_10_sign_calculus():
    def body():
        for n in NS:
            _passes("V08", n)

    _record("C10", "*_K d_P = (-1)^(n+1) d_P *_K and *_K d*_P = (-1)^(n+1) d*_P *_K, n=2..5", body)


def test_11_lie_derivative_lemma():
    def body():
        for n in (2, 3):
            cal = calibrate(n)
            assert cal == {str(Fraction(1, 2 * n)): True, "1": False}, cal
        for n in NS:
            assert context(n).normalization == Fraction(1, 2 * n)
            _passes("V09", n)
        return "calibrated normalization 1/(2n)"

    _record("C11", "Lie-derivative identities at the calibrated metric, n=2..5", body)


def test_12_uniqueness():
    dims = {}

    def body():
        for n in (3, 4, 5):
            for k in range(1, n):
                r = _passes("V15", n, {"k": k})
                dims[(n, k)] = r.info["dimension"]
        bad = {nk: d for nk, d in dims.items() if d != 1}
        assert not bad, f"dimension != 1 at (n,k) = {bad}"

    _record("C12", "constrained invariant kernel space has dimension 1, n=3..5", body)


def test_13_casimir_consistency():
    def body():
        signs = {}
        for n in NS:
            r = _passes("V14", n)
            signs[n] = r.info["sign"]
        assert len(set(signs.values())) == 1 and signs[2] in (1, -1), signs
        return f"s = {signs[2]:+d}"

    _record("C13", "Laplace_K = s 2(d_P d*_P + d*_P d_P) on invariants with one global sign, n=2..5", body)


def test_14_determinism():
    def body():
        cmd = [sys.executable, "-m", "tractor_poisson.cli", "verify", "--n", "4", "--format", "json"]
        a = subprocess.run(cmd, capture_output=True, check=False)
        b = subprocess.run(cmd, capture_output=True, check=False)
        assert a.returncode == 0, a.stdout.decode()[-400:]
        assert a.stdout == b.stdout and a.stdout

    _record("C14", "two verify --n 4 JSON reports are byte-identical", body)

