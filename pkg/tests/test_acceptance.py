"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import bisect

from keyagree.catalog import (
    EXAMPLE1_THRESHOLD,
    example1,
    example2_horodecki,
    example3_alpha,
    example4_werner,
    example5_condition,
    example5_erasure,
    example6,
    example6_rotated_form,
    example7,
    werner_rho,
)
from keyagree.dist import conditional_mutual_information, mutual_information
from keyagree.intrinsic import intrinsic_upper_bound, verify_zero_certificate
from keyagree.keyproto import (
    example3_protocol,
    repeat_code_analytic,
    repeat_code_beta_exact,
    repeat_code_gamma_exact,
    repeat_code_simulate,
)
from keyagree.mu import mu_estimate, werner_mu_closed_form
from keyagree.qstate import (
    DensityMatrix,
    LocalBasis,
    SeparableDecomposition,
    hermitian_eigenvalues,
    local_rotation,
    measure_state,
    partial_transpose,
    ppt_min_eigenvalue,
    random_unit_vector,
    random_unitary,
    separable_purification,
)

from oracles import FROZEN, ppt_min_numpy


class Report:
    """Collects named checks and prints one line for the criterion."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.failures: list[str] = []
        self.notes: list[str] = []

    def check(self, ok: bool, what: str) -> None:
        (self.notes if ok else self.failures).append(what)

    def finish(self, capsys) -> None:
        status = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.failures) if self.failures else "; ".join(self.notes[-3:])
        with capsys.disabled():
            print(f"\n[criterion {self.number:2d}] {status}: {self.title} -- {detail}")
        assert not self.failures, self.failures


def test_criterion_01_example1_threshold(capsys):
    rep = Report(1, "entanglement threshold of the disturbance scenario")
    f = lambda D: ppt_min_eigenvalue(example1(D).rho)
    root = bisect(f, 0.2, 0.4, xtol=1e-12)
    rep.check(abs(root - (1 - 1 / math.sqrt(2))) <= 1e-6, f"PPT zero at D={root:.9f}")
    for D in (0.293, 0.35, 0.45):
        sc = example1(D)
        r = verify_zero_certificate(sc.distribution, sc.certificate).residual
        rep.check(r <= 1e-9, f"certificate residual {r:.2e} at D={D}")
    for D in (0.05, 0.15, 0.25):
        sc = example1(D)
        r = verify_zero_certificate(sc.distribution, sc.certificate).residual
        rep.check(r >= 1e-4, f"certificate fails with residual {r:.3g} at D={D}")
    rep.finish(capsys)


def test_criterion_02_closed_form_spectra(capsys):
    rep = Report(2, "partial-transpose spectra vs closed forms")
    worst = 0.0
    for D in np.round(np.arange(0, 0.5001, 0.01), 2):
        got = hermitian_eigenvalues(partial_transpose(example1(D).rho))
        ref = np.sort([
            0.5 * (D + (1 - D) * (1 - 2 * D)),
            0.5 * (D - (1 - D) * (1 - 2 * D)),
            0.5 * ((1 - D) + D * (1 - 2 * D)),
            0.5 * ((1 - D) - D * (1 - 2 * D)),
        ])
        worst = max(worst, float(np.max(np.abs(got - ref))))
    rep.check(worst <= 1e-10, f"max abs error {worst:.2e} over 51 values of D")
    rep.finish(capsys)


def test_criterion_03_bound_information_signature(capsys):
    rep = Report(3, "PPT yet positive intrinsic information (a=1/2)")
    sc = example2_horodecki(0.5)
    m = ppt_min_eigenvalue(sc.rho)
    rep.check(m >= -1e-10, f"ppt_min={m:.3g}")
    lowest = np.inf
    for nz in range(2, 8):
        est = intrinsic_upper_bound(sc.distribution, nz, restarts=64, seed=0)
        low = min(est.value, min(est.per_restart_values))
        lowest = min(lowest, low)
        rep.check(low >= 1e-3, f"nzbar={nz}: lowest value {low:.5g}")
    rep.check(True, f"lowest over all nzbar {lowest:.5g} bits")
    rep.finish(capsys)


def test_criterion_04_example3_phases(capsys):
    rep = Report(4, "separable / bound entangled / free entangled phases")
    for alpha in (2.0, 2.5, 3.0):
        sc = example3_alpha(alpha)
        r = verify_zero_certificate(sc.distribution, sc.certificate).residual
        rep.check(r <= 1e-9, f"residual {r:.2e} at alpha={alpha}")
    m35 = ppt_min_eigenvalue(example3_alpha(3.5).rho)
    m45 = ppt_min_eigenvalue(example3_alpha(4.5).rho)
    rep.check(m35 >= -1e-10, f"ppt_min(3.5)={m35:.4g}")
    rep.check(m45 <= -1e-4, f"ppt_min(4.5)={m45:.4g}")
    p45 = example3_protocol(4.5)
    rep.check(abs(p45.prob_agree - 0.52071) <= 1e-5, f"prob_agree(4.5)={p45.prob_agree:.8f}")
    rep.check(p45.eve_tv_on_agree <= 1e-12, f"Eve TV on agreement {p45.eve_tv_on_agree:.1e}")
    p4 = example3_protocol(4.0).prob_agree
    rep.check(abs(p4 - 0.5) <= 1e-12, f"prob_agree(4)={p4!r}")
    rep.finish(capsys)


def test_criterion_05_werner_family(capsys):
    rep = Report(5, "Werner certificates, threshold and entanglement measure")
    for lam in (0.1, 0.2, 1 / 3):
        sc = example4_werner(lam)
        r = verify_zero_certificate(sc.distribution, sc.certificate).residual
        rep.check(r <= 1e-9, f"residual {r:.1e} at lambda={lam:.4f}")
    root = bisect(lambda l: ppt_min_eigenvalue(werner_rho(l)), 0.2, 0.6, xtol=1e-12)
    rep.check(abs(root - 1 / 3) <= 1e-6, f"PPT sign change at {root:.9f}")
    cf = werner_mu_closed_form(0.5)
    rep.check(abs(cf - 0.061278) <= 1e-6, f"closed form {cf:.7f}")
    t0 = time.perf_counter()
    mu = mu_estimate(werner_rho(0.5), seed=0).value
    elapsed = time.perf_counter() - t0
    rep.check(abs(mu - cf) <= 5e-3, f"mu_estimate(0.5)={mu:.5f} in {elapsed:.0f}s")
    rep.check(elapsed <= 600, f"runtime {elapsed:.0f}s")
    bell = DensityMatrix.from_vector(np.array([1, 0, 0, 1]) / math.sqrt(2), 2, 2)
    mb = mu_estimate(bell).value
    rep.check(abs(mb - 1) <= 5e-3, f"mu(Bell)={mb:.6f}")
    rep.finish(capsys)


def test_criterion_06_repeat_code(capsys):
    rep = Report(6, "repeat-code advantage distillation")
    beta = repeat_code_beta_exact(Fraction(1, 4), 4)
    rep.check(beta == Fraction(1, 82), f"beta_4={beta}")
    a = repeat_code_analytic(0.25, 0.8, 4)
    rep.check(abs(a.beta_N - 1 / 82) <= 1e-15 / 82, "float beta_4 = 1/82")
    rep.check(abs(a.gamma_N_lower - 0.0768) <= 1e-15, f"gamma_4={a.gamma_N_lower!r}")
    rep.check(repeat_code_gamma_exact(Fraction(4, 5), 4) == Fraction(48, 625), "gamma_4 = 48/625 exactly")
    sim = repeat_code_simulate(0.25, 0.8, 4, 1_000_000, seed=7)
    se_b, se_e = sim.standard_errors
    z = (sim.bob_error_rate - 1 / 82) / se_b
    rep.check(abs(z) <= 3, f"Bob rate {sim.bob_error_rate:.6f} (z={z:.2f})")
    rep.check(sim.eve_error_rate >= 0.0768 - 3 * se_e, f"Eve rate {sim.eve_error_rate:.4f} >= 0.0768 - 3 sigma")
    ratios = [repeat_code_analytic(0.1, 0.8, N) for N in (2, 4, 8, 16)]
    ratios = [r.beta_N / r.gamma_N_lower for r in ratios]
    rep.check(all(b < a for a, b in zip(ratios, ratios[1:])), "beta/gamma strictly decreasing over N=2,4,8,16")
    rep.finish(capsys)


def test_criterion_07_example5_boundary(capsys):
    rep = Report(7, "erasure-scenario PPT boundary")
    bad = []
    for alpha in np.round(np.arange(0.05, 0.4501, 0.05), 2):
        for delta in (0.3, 0.5, 0.7):
            c = example5_condition(alpha, delta, delta) - 1
            m = ppt_min_eigenvalue(example5_erasure(alpha, delta, delta).rho)
            sc = 0 if abs(c) <= 1e-10 else int(np.sign(c))
            sm = 0 if abs(m) <= 1e-10 else int(np.sign(m))
            if sc != sm:
                bad.append((alpha, delta))
    rep.check(not bad, f"closed-form sign agrees with PPT at all 27 grid points{'' if not bad else ': ' + str(bad)}")
    cross = bisect(lambda a: ppt_min_eigenvalue(example5_erasure(a, 0.5, 0.5).rho), 0.05, 0.3, xtol=1e-12)
    rep.check(abs(cross - 0.127322) <= 1e-4, f"zero crossing at alpha={cross:.6f} (target 0.127322)")
    rep.finish(capsys)


def test_criterion_08_example6(capsys):
    rep = Report(8, "separable state measured in bad bases")
    sc = example6()
    rho = sc.rho.matrix
    dev = float(np.max(np.abs(partial_transpose(rho, 2, 2) - rho)))
    rep.check(dev <= 1e-12, f"|rho^t - rho| = {dev:.1e}")
    P = sc.measured("standard")
    cells = sorted(P.mass.values())
    rep.check(cells == [0.2] * 5, f"standard frame cells {cells}")
    cmi = conditional_mutual_information(sc.measured("rotated"))
    rep.check(cmi <= 1e-12, f"rotated-frame CMI {cmi:.1e}")
    ident = float(np.max(np.abs(example6_rotated_form() - sc.state.amp)))
    rep.check(ident <= 1e-10, f"rotated-form identity {ident:.1e}")
    est = intrinsic_upper_bound(P, restarts=64, seed=0)
    low = min(est.value, min(est.per_restart_values))
    rep.check(low >= 1e-2, f"intrinsic upper bound {low:.5f} over 64 restarts")
    rep.finish(capsys)


def test_criterion_09_example7(capsys):
    rep = Report(9, "entangled state with independent measured bits")
    sc = example7()
    Pxy = sc.distribution.array.sum(axis=2)
    i = mutual_information(Pxy)
    rep.check(i <= 1e-9, f"I(X;Y)={i:.2e}")
    m = ppt_min_eigenvalue(sc.rho)
    oracle = ppt_min_numpy(sc.rho.matrix, 2, 2)
    rep.check(m < -1e-8, f"ppt_min={m:.5g}")
    rep.check(abs(m - oracle) <= 1e-12, f"eigensolver oracle {oracle:.5g}")
    rep.finish(capsys)


def test_criterion_10_separable_construction(capsys):
    rep = Report(10, "separable decompositions give conditionally independent outcomes")
    worst_cmi, worst_povm, cases = 0.0, 0.0, 0
    for k in range(50):
        rng = np.random.default_rng([2024, k])
        dA, dB = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        terms = int(rng.integers(1, 7))
        w = rng.random(terms) + 0.05
        dec = SeparableDecomposition(
            w / w.sum(),
            np.array([random_unit_vector(dA, rng) for _ in range(terms)]),
            np.array([random_unit_vector(dB, rng) for _ in range(terms)]),
        )
        Psi, eve = separable_purification(dec)
        v = eve.vectors
        worst_povm = max(worst_povm, float(np.max(np.abs(v.T @ v.conj() - np.eye(v.shape[1])))))
        for _ in range(10):
            bA = LocalBasis(random_unitary(dA, rng).T)
            bB = LocalBasis(random_unitary(dB, rng).T)
            worst_cmi = max(worst_cmi, conditional_mutual_information(measure_state(Psi, bA, bB, eve)))
            cases += 1
    rep.check(cases == 500, f"{cases} cases")
    rep.check(worst_cmi <= 1e-10, f"max CMI {worst_cmi:.1e} over {cases} cases")
    rep.check(worst_povm <= 1e-10, f"POVM completeness deviation {worst_povm:.1e}")
    rep.finish(capsys)


def test_criterion_11_spectrum_invariance(capsys):
    rep = Report(11, "partial-transpose spectrum invariant under local unitaries")
    worst = 0.0
    for k in range(100):
        rng = np.random.default_rng([77, k])
        dA, dB = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        n = dA * dB
        G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        m = G @ G.conj().T
        rho = DensityMatrix(m / np.trace(m).real, dA, dB)
        rot = local_rotation(rho, random_unitary(dA, rng), random_unitary(dB, rng))
        a = hermitian_eigenvalues(partial_transpose(rho))
        b = hermitian_eigenvalues(partial_transpose(rot))
        worst = max(worst, float(np.max(np.abs(a - b))))
    rep.check(worst <= 1e-9, f"max spectral deviation {worst:.1e} over 100 pairs")
    rep.finish(capsys)
