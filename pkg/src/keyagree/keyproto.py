"""Advantage distillation: the repeat-code protocol and the Example-3 preprocessing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dist import JointDistribution


@dataclass(frozen=True)
class RepeatCodeAnalytic:
    N: int
    p_accept: float
    beta_N: float
    gamma_N_lower: float


@dataclass(frozen=True)
class SimulationResult:
    trials: int
    accepted: int
    correctly_accepted: int
    bob_errors: int
    eve_errors: int
    eve_errors_on_correct: int
    bob_error_rate: float
    eve_error_rate: float
    standard_errors: tuple[float, float]
    seed: int


def _check_N(N: int) -> None:
    if int(N) != N or N < 2 or N % 2:
        raise ValueError(f"block length N must be an even integer >= 2, got {N}")


def _check_unit(**kw: float) -> None:
    for name, v in kw.items():
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")


def repeat_code_analytic(D: float, delta: float, N: int) -> RepeatCodeAnalytic:
    _check_N(N)
    _check_unit(D=D, delta=delta)
    p_accept = D**N + (1 - D) ** N
    beta = D**N / p_accept
    gamma = 0.5 * math.comb(N, N // 2) * ((1 - delta) * delta) ** (N // 2)
    return RepeatCodeAnalytic(N=N, p_accept=p_accept, beta_N=beta, gamma_N_lower=gamma)


def repeat_code_beta_exact(D: Fraction, N: int) -> Fraction:
    """Bob's error given acceptance, in exact rational arithmetic."""
    _check_N(N)
    D = Fraction(D)
    return D**N / (D**N + (1 - D) ** N)


def repeat_code_gamma_exact(delta: Fraction, N: int) -> Fraction:
    _check_N(N)
    delta = Fraction(delta)
    return Fraction(1, 2) * math.comb(N, N // 2) * ((1 - delta) * delta) ** (N // 2)


def repeat_code_simulate(
    D: float, delta: float, N: int, trials: int, seed: int, chunk: int = 1 << 18
) -> SimulationResult:
    """Monte Carlo run of the repeat-code protocol in the Example-1 scenario.

    Per position: X uniform, Y = X flipped with probability D, Eve holds
    Z1 = X xor Y and Z2 equal to Y with probability delta. Bob accepts when
    (C xor X_i) xor Y_i is constant over the block and guesses C from it. Eve
    decodes C xor Y_i xor Z2_i by majority, breaking ties uniformly. Error
    rates are conditioned on Bob accepting.
    """
    _check_N(N)
    _check_unit(D=D, delta=delta)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    # per-chunk generators make the result independent of how trials are split across workers
    accepted = correct_acc = bob_err = eve_err = eve_err_correct = 0
    start = 0
    index = 0
    while start < trials:
        n = min(chunk, trials - start)
        rng = np.random.default_rng([seed, index])
        C = rng.integers(0, 2, size=n, dtype=np.int8)
        X = rng.integers(0, 2, size=(n, N), dtype=np.int8)
        flip = (rng.random((n, N)) < D).astype(np.int8)
        Y = X ^ flip
        z2_wrong = (rng.random((n, N)) >= delta).astype(np.int8)
        Z1 = X ^ Y
        Z2 = Y ^ z2_wrong
        sent = X ^ C[:, None]
        bob_block = sent ^ Y
        acc = np.all(bob_block == bob_block[:, :1], axis=1)
        bob_guess = bob_block[:, 0]
        eve_block = sent ^ Z1 ^ Z2  # equals C xor (Eve's wrong-guess indicator)
        zeros = N - eve_block.sum(axis=1)
        tie = zeros * 2 == N
        eve_guess = np.where(zeros * 2 > N, 0, 1).astype(np.int8)
        coin = rng.integers(0, 2, size=n, dtype=np.int8)
        eve_guess = np.where(tie, coin, eve_guess)
        correct = acc & (flip[:, 0] == 0)
        accepted += int(acc.sum())
        correct_acc += int(correct.sum())
        bob_err += int((acc & (bob_guess != C)).sum())
        eve_err += int((acc & (eve_guess != C)).sum())
        eve_err_correct += int((correct & (eve_guess != C)).sum())
        start += n
        index += 1
    if accepted:
        rb, re = bob_err / accepted, eve_err / accepted
        se = (math.sqrt(rb * (1 - rb) / accepted), math.sqrt(re * (1 - re) / accepted))
    else:
        rb = re = float("nan")
        se = (float("nan"), float("nan"))
    return SimulationResult(
        trials=trials,
        accepted=accepted,
        correctly_accepted=correct_acc,
        bob_errors=bob_err,
        eve_errors=eve_err,
        eve_errors_on_correct=eve_err_correct,
        bob_error_rate=rb,
        eve_error_rate=re,
        standard_errors=se,
        seed=seed,
    )


def advantage_condition(D: float, delta: float) -> bool:
    """True iff D/(1-D) < 2 sqrt((1-delta) delta), i.e. the repeat code gives an advantage."""
    if D >= 1.0:
        raise ValueError("D must be < 1")
    _check_unit(D=D, delta=delta)
    return D / (1 - D) < 2 * math.sqrt((1 - delta) * delta)


@dataclass(frozen=True)
class Example3Protocol:
    joint: JointDistribution
    prob_agree: float
    eve_tv_on_agree: float
    flip_probability: float


def example3_protocol(alpha: float) -> Example3Protocol:
    """Restrict X, Y to {1, 2}, then symmetrize both bits locally.

    Alice moves X=1 to 2 and Bob moves Y=2 to 1, each with probability
    (2 alpha - 5)/(2 alpha + 4). The returned joint is over (Xbar, Ybar, Z)
    with Xbar, Ybar stored as 0 (for 1) and 1 (for 2) and Z keeping the
    original seven symbols.
    """
    if not 2.5 < alpha <= 5.0:
        raise ValueError(f"alpha must lie in (2.5, 5], got {alpha}")
    from .catalog import example3_alpha

    P = example3_alpha(alpha).distribution.array[:2, :2, :]
    P = P / P.sum()
    p = (2 * alpha - 5) / (2 * alpha + 4)
    chan_x = np.array([[1 - p, p], [0.0, 1.0]])  # rows x, cols xbar
    chan_y = np.array([[1.0, 0.0], [p, 1 - p]])
    Q = np.einsum("xyz,xa,yb->abz", P, chan_x, chan_y)
    joint = JointDistribution.from_array(Q, tol=1e-10)
    agree = float(Q[0, 0].sum() + Q[1, 1].sum())
    cond1 = Q[0, 0] / Q[0, 0].sum()
    cond2 = Q[1, 1] / Q[1, 1].sum()
    tv = 0.5 * float(np.abs(cond1 - cond2).sum())
    return Example3Protocol(joint=joint, prob_agree=agree, eve_tv_on_agree=tv, flip_probability=p)
