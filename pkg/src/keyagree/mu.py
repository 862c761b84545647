"""Entanglement measure mu: min over Eve's bases, max over local bases, of intrinsic information.

The estimator is heuristic. Both optimization layers are derivative-free
searches and the innermost quantity is itself an upper-bound estimate, so the
result is neither a certified upper nor lower bound on mu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .dist import JointDistribution, binary_entropy, shannon_entropy
from .intrinsic import intrinsic_upper_bound
from .qstate import (
    DensityMatrix,
    LocalBasis,
    PureState,
    StateError,
    basis_from_unitary,
    jacobi_eigh,
    purify,
)


@dataclass(frozen=True)
class MuEstimate:
    value: float
    eve_basis: LocalBasis
    local_bases: tuple[LocalBasis, LocalBasis]
    inner_estimates: list[float] = field(repr=False)
    quality: str = "heuristic"


def pure_state_entanglement_entropy(psi, dA: int, dB: int) -> float:
    """Entropy of the squared Schmidt coefficients of a bipartite unit vector."""
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != dA * dB:
        raise StateError(f"vector of length {psi.size} does not factor as {dA}x{dB}")
    norm = float(np.vdot(psi, psi).real)
    if abs(norm - 1.0) > 1e-12:
        raise StateError(f"state is not normalized (norm^2 = {norm!r})")
    M = psi.reshape(dA, dB)
    w = jacobi_eigh(M @ M.conj().T)[0]
    w = np.clip(w, 0.0, None)
    return shannon_entropy(w / w.sum())


def werner_mu_closed_form(lam: float) -> float:
    """((1+lam)/2) * (1 - h(2 lam / (1 + lam))) above the separability threshold, else 0."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    if lam <= 1.0 / 3.0:
        return 0.0
    q = 2 * lam / (1 + lam)
    return (1 + lam) / 2 * (1 - binary_entropy(q))


def givens_unitary(params: np.ndarray, d: int) -> np.ndarray:
    """Product over all coordinate pairs (p, q) of a rotation with one angle and one phase."""
    U = np.eye(d, dtype=complex)
    k = 0
    for p in range(d - 1):
        for q in range(p + 1, d):
            th, ph = params[k], params[k + 1]
            k += 2
            c, s = math.cos(th), math.sin(th)
            e = complex(math.cos(ph), math.sin(ph))
            col_p = U[:, p].copy()
            U[:, p] = c * col_p + e.conjugate() * s * U[:, q]
            U[:, q] = -e * s * col_p + c * U[:, q]
    return U


def n_unitary_params(d: int) -> int:
    return d * (d - 1)


def _measure(amp: np.ndarray, UA, UB, UE) -> np.ndarray:
    out = np.einsum("xa,yb,ze,abe->xyz", UA.T.conj(), UB.T.conj(), UE.T.conj(), amp)
    P = np.abs(out) ** 2
    return P / P.sum()


def _seed_local_params(d: int) -> list[np.ndarray]:
    """Standard, real-Hadamard-like and complex-Hadamard-like rotations."""
    n = n_unitary_params(d)
    if n == 0:
        return [np.zeros(0)]
    quarter = np.full(n, math.pi / 4)
    circ = quarter.copy()
    circ[1::2] = math.pi / 2
    return [np.zeros(n), quarter, circ]


class _Converged(Exception):
    """Raised inside the outer search once a value at or below tol is found."""


class _MinMax:
    """Evaluation helpers for the nested search on one fixed purification."""

    def __init__(self, amp: np.ndarray, restarts: int, seed: int, tol: float, inner_evals: int):
        self.amp = amp
        self.dA, self.dB, self.dE = amp.shape
        self.restarts = restarts
        self.seed = seed
        self.tol = tol
        self.inner_evals = inner_evals
        self.nA = n_unitary_params(self.dA)
        self.nB = n_unitary_params(self.dB)
        self.trace: list[float] = []

    def intrinsic(self, P: np.ndarray) -> float:
        dist = JointDistribution.from_array(P, tol=1e-9)
        return intrinsic_upper_bound(
            dist, self.dE, restarts=0, deterministic_starts=1, tolerance=self.tol, max_iters=400
        ).value

    def local(self, x: np.ndarray, UE: np.ndarray) -> float:
        UA = givens_unitary(x[: self.nA], self.dA)
        UB = givens_unitary(x[self.nA :], self.dB)
        return self.intrinsic(_measure(self.amp, UA, UB, UE))

    def seeds(self) -> list[np.ndarray]:
        return [np.concatenate([a, b]) for a in _seed_local_params(self.dA) for b in _seed_local_params(self.dB)]

    def inner(self, UE: np.ndarray, salt: int, extra: list[np.ndarray] = ()) -> tuple[float, np.ndarray]:
        """Max over local bases of the intrinsic estimate, for a fixed Eve basis."""
        n = self.nA + self.nB
        rng = np.random.default_rng([self.seed, 1, salt])
        pool = self.seeds() + list(extra) + [rng.uniform(0, math.pi, n) for _ in range(self.restarts)]
        scored = sorted(((self.local(x, UE), i) for i, x in enumerate(pool)), reverse=True)
        best_f, best_x = scored[0][0], pool[scored[0][1]]
        if n == 0:
            return best_f, best_x
        for _, i in scored[: max(1, self.restarts)]:
            res = minimize(lambda x: -self.local(x, UE), pool[i], method="Nelder-Mead",
                           options={"maxfev": self.inner_evals, "xatol": 1e-4, "fatol": self.tol})
            if -res.fun > best_f:
                best_f, best_x = -res.fun, res.x
        return best_f, best_x


def mu_estimate(
    rho: DensityMatrix,
    env_dim: int | None = None,
    restarts: int = 3,
    seed: int = 0,
    tol: float = 1e-7,
    outer_evals: int = 400,
    inner_evals: int = 150,
    rounds: int = 6,
) -> MuEstimate:
    """Heuristic min-max estimate of mu(rho).

    One purification is fixed (spectral, environment padded to ``env_dim``,
    default rank(rho)); Eve's orthonormal bases and the local product bases
    are both parametrized by Givens rotations.

    The min-max is solved by an exchange scheme: the outer Nelder-Mead
    minimizes the worst case over a working set of local bases, then a full
    inner maximization at the incumbent Eve basis either confirms it or adds
    the violating local bases to the set, for up to ``rounds`` rounds. The
    reported value is always a full inner maximum, never the working-set one.
    """
    Psi: PureState = purify(rho, env_dim)
    mm = _MinMax(Psi.amp, restarts, seed, tol, inner_evals)
    nE = n_unitary_params(mm.dE)
    rng = np.random.default_rng([seed, 0])
    eve_starts = [np.zeros(nE)] + [rng.uniform(0, math.pi, nE) for _ in range(max(0, restarts - 1))]

    best: tuple[float, np.ndarray, np.ndarray] | None = None
    for r, y in enumerate(eve_starts):
        working = mm.seeds()
        for k in range(max(1, rounds)):
            if nE > 0:
                def worst(yy):
                    UE = givens_unitary(yy, mm.dE)
                    return max(mm.local(x, UE) for x in working)

                res = minimize(worst, y, method="Nelder-Mead",
                               options={"maxfev": outer_evals, "xatol": 1e-5, "fatol": tol})
                y, inner_set = res.x, res.fun
            else:
                inner_set = -np.inf
            UE = givens_unitary(y, mm.dE)
            v, x = mm.inner(UE, 1000 * r + k, extra=working)
            mm.trace.append(v)
            if best is None or v < best[0]:
                best = (v, y.copy(), x)
            if nE == 0 or v <= inner_set + tol or v <= tol:
                break
            working.append(x)
        if nE == 0 or best[0] <= tol:
            break

    value, y, x = best
    UE = givens_unitary(y, mm.dE)
    UA = givens_unitary(x[: mm.nA], mm.dA)
    UB = givens_unitary(x[mm.nA :], mm.dB)
    return MuEstimate(
        value=max(0.0, value),
        eve_basis=basis_from_unitary(UE),
        local_bases=(basis_from_unitary(UA), basis_from_unitary(UB)),
        inner_estimates=list(mm.trace),
    )
