"""Finite-dimensional tripartite states, reduced density matrices and PPT diagnostics.

Composite indices are row-major: the AB basis state |a, b> sits at a*dB + b.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dist import JointDistribution

STATE_TOL = 1e-12
BASIS_TOL = 1e-10


class StateError(ValueError):
    """Raised when a state, basis or measurement violates its invariants."""


@dataclass(frozen=True)
class PureState:
    amp: np.ndarray

    def __post_init__(self) -> None:
        amp = np.array(self.amp, dtype=complex)
        if amp.ndim != 3:
            raise StateError(f"amplitudes must be indexed (a, b, e), got shape {amp.shape}")
        norm = float(np.sum(np.abs(amp) ** 2))
        if abs(norm - 1.0) > STATE_TOL:
            raise StateError(f"state norm^2 is {norm!r}, expected 1")
        amp.flags.writeable = False
        object.__setattr__(self, "amp", amp)

    @classmethod
    def from_terms(cls, dims: tuple[int, int, int], terms) -> "PureState":
        """Build from (coefficient, a, b, e) terms, normalizing the result."""
        amp = np.zeros(dims, dtype=complex)
        for c, a, b, e in terms:
            amp[a, b, e] += c
        return cls(amp / np.linalg.norm(amp))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.amp.shape


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    dA: int
    dB: int

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        n = self.dA * self.dB
        if m.shape != (n, n):
            raise StateError(f"matrix shape {m.shape} does not match factorization ({self.dA},{self.dB})")
        if np.max(np.abs(m - m.conj().T)) > STATE_TOL:
            raise StateError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > STATE_TOL:
            raise StateError(f"trace is {tr!r}, expected 1")
        lo = np.linalg.eigvalsh(m).min()
        if lo < -1e-10:
            raise StateError(f"density matrix has eigenvalue {lo:g} < 0")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_vector(cls, psi, dA: int, dB: int) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dA, dB)


def _check_orthonormal(vectors: np.ndarray, what: str) -> None:
    gram = vectors.conj() @ vectors.T
    dev = np.max(np.abs(gram - np.eye(len(vectors))))
    if dev > BASIS_TOL:
        raise StateError(f"{what} is not orthonormal (Gram deviation {dev:.3g})")


@dataclass(frozen=True)
class LocalBasis:
    """Orthonormal basis; ``vectors[k]`` is the k-th basis vector."""

    vectors: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise StateError(f"a basis needs d vectors of dimension d, got shape {v.shape}")
        _check_orthonormal(v, "basis")
        v.flags.writeable = False
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def standard(cls, d: int) -> "LocalBasis":
        return cls(np.eye(d))


@dataclass(frozen=True)
class EveMeasurementSet:
    """Vectors |z> with sum_z |z><z| = 1 (a rank-one POVM)."""

    vectors: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.vectors, dtype=complex)
        if v.ndim != 2:
            raise StateError(f"Eve's measurement needs a list of vectors, got shape {v.shape}")
        completeness = v.T @ v.conj()
        dev = np.max(np.abs(completeness - np.eye(v.shape[1])))
        if dev > BASIS_TOL:
            raise StateError(f"Eve's measurement is not complete (deviation {dev:.3g})")
        v.flags.writeable = False
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def outcomes(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def standard(cls, d: int) -> "EveMeasurementSet":
        return cls(np.eye(d))


@dataclass(frozen=True)
class SeparableDecomposition:
    """Mixture sum_z p_z |alpha_z><alpha_z| (x) |beta_z><beta_z|."""

    weights: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.weights, dtype=float)
        a = np.array(self.alphas, dtype=complex)
        b = np.array(self.betas, dtype=complex)
        if not (len(p) == len(a) == len(b)) or len(p) == 0:
            raise StateError("weights, alphas and betas must be nonempty and of equal length")
        if np.any(p < 0) or abs(p.sum() - 1.0) > STATE_TOL:
            raise StateError(f"weights must be a probability vector (sum={p.sum()!r})")
        for name, vecs in (("alpha", a), ("beta", b)):
            norms = np.linalg.norm(vecs, axis=1)
            if np.max(np.abs(norms - 1.0)) > STATE_TOL:
                raise StateError(f"{name} vectors must be unit vectors")
        object.__setattr__(self, "weights", p)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "betas", b)

    def density_matrix(self) -> DensityMatrix:
        rho = sum(
            p * np.kron(np.outer(al, al.conj()), np.outer(be, be.conj()))
            for p, al, be in zip(self.weights, self.alphas, self.betas)
        )
        return DensityMatrix(rho, self.alphas.shape[1], self.betas.shape[1])


def partial_trace_env(Psi: PureState) -> DensityMatrix:
    dA, dB, dE = Psi.dims
    M = Psi.amp.reshape(dA * dB, dE)
    rho = M @ M.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho, dA, dB)


def is_pure(rho: DensityMatrix, tol: float = 1e-10) -> bool:
    m = rho.matrix
    return bool(np.max(np.abs(m @ m - m)) <= tol)


def partial_transpose(rho: DensityMatrix | np.ndarray, dA: int | None = None, dB: int | None = None) -> np.ndarray:
    """(rho^t)[(i,j),(mu,nu)] = rho[(i,nu),(mu,j)]: transpose of the B factor."""
    if isinstance(rho, DensityMatrix):
        m, dA, dB = rho.matrix, rho.dA, rho.dB
    else:
        if dA is None or dB is None:
            raise StateError("partial transpose needs the (dA, dB) factorization")
        m = np.asarray(rho)
    n = dA * dB
    return m.reshape(dA, dB, dA, dB).transpose(0, 3, 2, 1).reshape(n, n)


def jacobi_eigh(M, tol: float = 1e-13, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a Hermitian matrix.

    Returns ascending eigenvalues and the unitary whose columns are the
    matching eigenvectors.
    """
    A = np.array(M, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n):
        raise StateError(f"expected a square matrix, got shape {A.shape}")
    if n and np.max(np.abs(A - A.conj().T)) > 1e-10:
        raise StateError("matrix is not Hermitian")
    A = (A + A.conj().T) / 2
    V = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(A)))
    for _ in range(max_sweeps):
        off = np.linalg.norm(A[~np.eye(n, dtype=bool)])
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                # phase makes the (p, q) entry real, then a real plane rotation zeroes it
                phase = apq / r
                theta = 0.5 * np.arctan2(2.0 * r, (A[q, q] - A[p, p]).real)
                c, s = np.cos(theta), np.sin(theta)
                U = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ U
                A[idx, :] = U.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                V[:, idx] = V[:, idx] @ U
    w = np.diag(A).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def hermitian_eigenvalues(M) -> np.ndarray:
    return jacobi_eigh(M)[0]


def ppt_min_eigenvalue(rho: DensityMatrix) -> float:
    """Smallest eigenvalue of the partial transpose; negative means NPT (entangled)."""
    return float(hermitian_eigenvalues(partial_transpose(rho))[0])


def measure_state(
    Psi: PureState, bA: LocalBasis, bB: LocalBasis, eve: EveMeasurementSet
) -> JointDistribution:
    """P(x,y,z) = |<x,y,z|Psi>|^2."""
    dA, dB, dE = Psi.dims
    if (bA.dim, bB.dim, eve.dim) != (dA, dB, dE):
        raise StateError(
            f"measurement dimensions ({bA.dim},{bB.dim},{eve.dim}) do not match state {Psi.dims}"
        )
    amp = np.einsum("xa,yb,ze,abe->xyz", bA.vectors.conj(), bB.vectors.conj(), eve.vectors.conj(), Psi.amp)
    P = np.abs(amp) ** 2
    return JointDistribution.from_array(P, tol=1e-10)


def canonical_purification(P: JointDistribution) -> PureState:
    """Real nonnegative amplitudes sqrt(P(x,y,z)); measuring in standard bases returns P."""
    return PureState(np.sqrt(P.array))


def standard_measurement(Psi: PureState) -> JointDistribution:
    dA, dB, dE = Psi.dims
    return measure_state(Psi, LocalBasis.standard(dA), LocalBasis.standard(dB), EveMeasurementSet.standard(dE))


def separable_purification(dec: SeparableDecomposition) -> tuple[PureState, EveMeasurementSet]:
    """Purify a separable mixture with one Eve dimension per term.

    Eve's standard-basis outcome z leaves Alice and Bob in the product state
    alpha_z (x) beta_z, so X and Y are independent given Z in every local basis.
    """
    amp = np.einsum("z,za,zb->abz", np.sqrt(dec.weights), dec.alphas, dec.betas)
    amp = amp / np.linalg.norm(amp)
    return PureState(amp), EveMeasurementSet.standard(len(dec.weights))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_unit_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def basis_from_unitary(U: np.ndarray) -> LocalBasis:
    """Columns of U become the basis vectors."""
    return LocalBasis(np.asarray(U).T)


def purify(rho: DensityMatrix, env_dim: int | None = None) -> PureState:
    """Spectral purification sum_k sqrt(p_k) psi_k (x) |k> padded to env_dim."""
    w, V = jacobi_eigh(rho.matrix)
    keep = w > 1e-12
    rank = int(keep.sum())
    env = rank if env_dim is None else int(env_dim)
    if env < rank:
        raise StateError(f"environment dimension {env} is below rank {rank}")
    w, V = w[keep][::-1], V[:, keep][:, ::-1]
    amp = np.zeros((rho.dA * rho.dB, env), dtype=complex)
    amp[:, :rank] = V * np.sqrt(w)
    amp = amp / np.linalg.norm(amp)
    return PureState(amp.reshape(rho.dA, rho.dB, env))


def local_rotation(rho: DensityMatrix, UA: np.ndarray, UB: np.ndarray) -> DensityMatrix:
    U = np.kron(UA, UB)
    m = U @ rho.matrix @ U.conj().T
    return DensityMatrix((m + m.conj().T) / 2, rho.dA, rho.dB)


def as_vectors(seq: Sequence) -> np.ndarray:
    return np.array([np.asarray(v, dtype=complex) for v in seq])
