"""Intrinsic conditional information I(X;Y|Z-down) by search over Eve's channels.

The search runs a Nelder-Mead simplex over a softmax parametrization of the
channel rows, started from the identity, every deterministic merge of Z
(when there are few enough), injected channels and seeded random points.
The result is an upper bound on the infimum: the true value can only be lower.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numba as nb
import numpy as np

from .dist import Channel, DistributionError, JointDistribution, apply_channel, cmi_array

# cap on the number of deterministic channels evaluated exhaustively
ENUMERATION_LIMIT = 4096
_SMOOTH_LOGIT = 8.0


@dataclass(frozen=True)
class IntrinsicEstimate:
    value: float
    best_channel: Channel
    restarts_run: int
    per_restart_values: list[float] = field(repr=False)
    converged: bool


@dataclass(frozen=True)
class CertificateCheck:
    passes: bool
    residual: float


@nb.njit(cache=True)
def _softmax_rows(theta, nz, nw):
    W = np.empty((nz, nw))
    k = nw - 1
    for z in range(nz):
        m = 0.0
        for j in range(k):
            if theta[z * k + j] > m:
                m = theta[z * k + j]
        s = 0.0
        for j in range(k):
            W[z, j] = np.exp(theta[z * k + j] - m)
            s += W[z, j]
        W[z, k] = np.exp(-m)
        s += W[z, k]
        for j in range(nw):
            W[z, j] /= s
    return W


@nb.njit(cache=True)
def _cmi_after(P, W):
    nx, ny, nz = P.shape
    nw = W.shape[1]
    Q = np.empty((nx, ny))
    total = 0.0
    for w in range(nw):
        qw = 0.0
        for x in range(nx):
            for y in range(ny):
                acc = 0.0
                for z in range(nz):
                    acc += P[x, y, z] * W[z, w]
                Q[x, y] = acc
                qw += acc
        if qw <= 0.0:
            continue
        h = qw * np.log2(qw)
        for x in range(nx):
            r = 0.0
            for y in range(ny):
                r += Q[x, y]
                if Q[x, y] > 0.0:
                    h += Q[x, y] * np.log2(Q[x, y])
            if r > 0.0:
                h -= r * np.log2(r)
        for y in range(ny):
            c = 0.0
            for x in range(nx):
                c += Q[x, y]
            if c > 0.0:
                h -= c * np.log2(c)
        total += h
    return total


@nb.njit(cache=True)
def _objective(theta, P, nz, nw):
    return _cmi_after(P, _softmax_rows(theta, nz, nw))


@nb.njit(cache=True)
def _nelder_mead(x0, P, nz, nw, step, tol, max_iters):
    # adaptive coefficients for higher dimensions (Gao & Han)
    n = x0.size
    S = np.empty((n + 1, n))
    F = np.empty(n + 1)
    S[0] = x0
    for i in range(n):
        S[i + 1] = x0
        S[i + 1, i] += step
    for i in range(n + 1):
        F[i] = _objective(S[i], P, nz, nw)
    a = 1.0
    b = 1.0 + 2.0 / n
    g = 0.75 - 0.5 / n
    d = 1.0 - 1.0 / n
    it = 0
    converged = False
    c = np.empty(n)
    while it < max_iters:
        order = np.argsort(F)
        S = S[order]
        F = F[order]
        if F[n] - F[0] <= tol:
            spread = 0.0
            for i in range(1, n + 1):
                for j in range(n):
                    v = abs(S[i, j] - S[0, j])
                    if v > spread:
                        spread = v
            if spread <= 1e-7 or F[n] - F[0] <= 1e-3 * tol:
                converged = True
                break
        it += 1
        c[:] = 0.0
        for i in range(n):
            c += S[i]
        c /= n
        xr = c + a * (c - S[n])
        fr = _objective(xr, P, nz, nw)
        if fr < F[0]:
            xe = c + b * (xr - c)
            fe = _objective(xe, P, nz, nw)
            if fe < fr:
                S[n] = xe
                F[n] = fe
            else:
                S[n] = xr
                F[n] = fr
        elif fr < F[n - 1]:
            S[n] = xr
            F[n] = fr
        else:
            if fr < F[n]:
                xc = c + g * (xr - c)
                fc = _objective(xc, P, nz, nw)
                accept = fc <= fr
            else:
                xc = c - g * (c - S[n])
                fc = _objective(xc, P, nz, nw)
                accept = fc < F[n]
            if accept:
                S[n] = xc
                F[n] = fc
            else:
                for i in range(1, n + 1):
                    S[i] = S[0] + d * (S[i] - S[0])
                    F[i] = _objective(S[i], P, nz, nw)
    k = np.argmin(F)
    return S[k].copy(), F[k], it, converged


def channel_cmi(P: np.ndarray, W: np.ndarray) -> float:
    """I(X;Y|Zbar) for dense P[x,y,z] and channel matrix W[z,zbar]."""
    return max(0.0, float(_cmi_after(np.ascontiguousarray(P, dtype=float), np.ascontiguousarray(W, dtype=float))))


def set_partitions(n: int, max_blocks: int):
    """Restricted-growth strings of length n using at most max_blocks labels."""
    labels = [0] * n

    def rec(i: int, used: int):
        if i == n:
            yield tuple(labels)
            return
        for b in range(min(used + 1, max_blocks)):
            labels[i] = b
            yield from rec(i + 1, max(used, b + 1))

    if n == 0:
        return
    yield from rec(0, 0)


def count_set_partitions(n: int, max_blocks: int, limit: int) -> int:
    """Number of partitions of an n-set into at most max_blocks blocks, capped at limit + 1."""
    # Stirling numbers of the second kind by recurrence
    row = [1] + [0] * max_blocks
    for _ in range(n):
        new = [0] * (max_blocks + 1)
        for k in range(1, max_blocks + 1):
            new[k] = k * row[k] + row[k - 1]
        row = new
        if sum(row) > limit:
            return limit + 1
    return sum(row)


def _theta_from_channel(W: np.ndarray) -> np.ndarray:
    logits = np.log(np.clip(W, np.exp(-_SMOOTH_LOGIT), None))
    logits = logits - logits[:, -1:]
    return np.ascontiguousarray(logits[:, :-1].ravel())


def _theta_from_mapping(mapping: Sequence[int], nw: int) -> np.ndarray:
    theta = np.zeros((len(mapping), nw))
    theta[np.arange(len(mapping)), list(mapping)] = _SMOOTH_LOGIT
    theta = theta - theta[:, -1:]
    return np.ascontiguousarray(theta[:, :-1].ravel())


def _local_search(theta, P, nz, nw, tolerance, max_iters, step=1.0, max_rounds=20):
    """Nelder-Mead with fresh simplices from the incumbent until a round gains < tolerance."""
    best_f = np.inf
    converged = False
    for _ in range(max_rounds):
        theta, f, _, converged = _nelder_mead(theta, P, nz, nw, step, tolerance, max_iters)
        if best_f - f < tolerance:
            best_f = min(best_f, f)
            break
        best_f = f
    return theta, best_f, converged


def intrinsic_upper_bound(
    P: JointDistribution,
    nzbar: int | None = None,
    restarts: int = 16,
    seed: int = 0,
    tolerance: float = 1e-9,
    max_iters: int = 5000,
    starts: Sequence[Channel] = (),
    enumeration_limit: int = ENUMERATION_LIMIT,
    deterministic_starts: int = 4,
) -> IntrinsicEstimate:
    """Smallest I(X;Y|Zbar) found over channels Z -> Zbar with |Zbar| = nzbar.

    The identity channel is always a candidate (Zbar = Z is admissible for the
    infimum), so the returned value never exceeds I(X;Y|Z). ``restarts`` random
    starts are seeded from (seed, restart index); the best ``deterministic_starts``
    merges and every channel in ``starts`` are also refined.
    """
    nz = P.nz
    nw = nz if nzbar is None else int(nzbar)
    if nw < 1:
        raise DistributionError(f"nzbar must be >= 1, got {nzbar}")
    if restarts < 0:
        raise ValueError("restarts must be >= 0")
    arr = np.ascontiguousarray(P.array, dtype=float)

    candidates: list[tuple[float, np.ndarray]] = []
    per_run: list[float] = []
    best_converged = True

    identity = np.eye(nz)
    f_id = channel_cmi(arr, identity)
    if not np.isfinite(f_id):
        raise DistributionError("objective is not finite; the distribution is invalid")
    candidates.append((f_id, identity))
    per_run.append(f_id)

    if nw == 1:
        W = np.ones((nz, 1))
        f = channel_cmi(arr, W)
        candidates.append((f, W))
        per_run.append(f)
        return _finish(candidates, per_run, 0, True)

    theta_starts: list[np.ndarray] = []
    for ch in starts:
        W = np.asarray(ch.matrix if isinstance(ch, Channel) else ch, dtype=float)
        if W.shape[0] != nz:
            raise DistributionError(f"injected channel has {W.shape[0]} rows, Z has {nz} symbols")
        f = channel_cmi(arr, W)
        candidates.append((f, W))
        per_run.append(f)
        if W.shape[1] == nw:
            theta_starts.append(_theta_from_channel(W))

    if count_set_partitions(nz, nw, enumeration_limit) <= enumeration_limit:
        scored = []
        for mapping in set_partitions(nz, nw):
            W = np.zeros((nz, nw))
            W[np.arange(nz), mapping] = 1.0
            scored.append((channel_cmi(arr, W), mapping))
        scored.sort(key=lambda t: t[0])
        f, mapping = scored[0]
        W = np.zeros((nz, nw))
        W[np.arange(nz), mapping] = 1.0
        candidates.append((f, W))
        per_run.append(f)
        theta_starts.extend(_theta_from_mapping(m, nw) for _, m in scored[:deterministic_starts])
    elif nw >= nz:
        theta_starts.append(_theta_from_mapping(range(nz), nw))

    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        theta_starts.append(rng.normal(0.0, 2.0, size=nz * (nw - 1)))

    best_run = np.inf
    for theta in theta_starts:
        theta, f, conv = _local_search(np.ascontiguousarray(theta), arr, nz, nw, tolerance, max_iters)
        W = _softmax_rows(theta, nz, nw)
        f = channel_cmi(arr, W)
        candidates.append((f, W))
        per_run.append(f)
        if f < best_run:
            best_run = f
            best_converged = conv
    return _finish(candidates, per_run, len(theta_starts), best_converged)


def _finish(candidates, per_run, runs, converged) -> IntrinsicEstimate:
    f, W = min(candidates, key=lambda t: t[0])
    return IntrinsicEstimate(
        value=max(0.0, f),
        best_channel=Channel(W),
        restarts_run=runs,
        per_restart_values=per_run,
        converged=bool(converged),
    )


def verify_zero_certificate(P: JointDistribution, W: Channel, tol: float = 1e-9) -> CertificateCheck:
    residual = conditional_mutual_information_after(P, W)
    return CertificateCheck(passes=residual <= tol, residual=residual)


def conditional_mutual_information_after(P: JointDistribution, W: Channel) -> float:
    return cmi_array(apply_channel(P, W).array)


def intrinsic_over_basis_set(Psi, bases, eve_set, **opts) -> float:
    """Mean over basis pairs j of the intrinsic bound of the distribution measured in pair j."""
    from .qstate import measure_state

    if not bases:
        raise ValueError("need at least one basis pair")
    values = [
        intrinsic_upper_bound(measure_state(Psi, bA, bB, eve_set), **opts).value for bA, bB in bases
    ]
    return float(np.mean(values))
