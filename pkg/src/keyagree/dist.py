"""Finite probability distributions and Shannon-type information quantities.

All quantities are in bits. Distributions are stored sparsely as a map from
index tuples to probabilities; the dense array is built on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

NORM_TOL = 1e-12
AXES = ("X", "Y", "Z")

# index 2 on each erasure component stands for the erasure symbol
ERASED = 2


class DistributionError(ValueError):
    """Raised when a distribution or channel violates its invariants."""


def _check_and_normalize(mass: dict, tol: float) -> dict:
    for key, p in mass.items():
        if not np.isfinite(p) or p < 0:
            raise DistributionError(f"probability at {key} is {p}; must be finite and >= 0")
    total = sum(mass.values())
    if abs(total - 1.0) > tol:
        raise DistributionError(f"total mass is {total!r}, expected 1 within {tol:g}")
    # skip renormalizing at rounding level so stored masses round-trip unchanged
    if abs(total - 1.0) > 4e-16:
        mass = {k: p / total for k, p in mass.items()}
    return mass


@dataclass(frozen=True)
class JointDistribution:
    """Tripartite pmf P_XYZ on {0..nx-1} x {0..ny-1} x {0..nz-1}."""

    nx: int
    ny: int
    nz: int
    mass: Mapping[tuple[int, int, int], float]
    labels: tuple[Sequence[str], Sequence[str], Sequence[str]] | None = field(
        default=None, compare=False
    )

    def __post_init__(self) -> None:
        for name, n in zip(AXES, (self.nx, self.ny, self.nz)):
            if int(n) != n or n < 1:
                raise DistributionError(f"alphabet size of {name} must be a positive integer, got {n}")
        clean: dict[tuple[int, int, int], float] = {}
        for key, p in self.mass.items():
            x, y, z = (int(i) for i in key)
            if not (0 <= x < self.nx and 0 <= y < self.ny and 0 <= z < self.nz):
                raise DistributionError(f"cell {key} outside alphabets ({self.nx},{self.ny},{self.nz})")
            p = float(p)
            if p != 0.0:
                clean[(x, y, z)] = clean.get((x, y, z), 0.0) + p
        object.__setattr__(self, "mass", _check_and_normalize(clean, NORM_TOL))

    @classmethod
    def from_array(cls, arr: np.ndarray, tol: float = NORM_TOL, labels=None) -> "JointDistribution":
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 3:
            raise DistributionError(f"expected a 3-d array, got shape {arr.shape}")
        mass = {tuple(int(i) for i in idx): float(arr[idx]) for idx in zip(*np.nonzero(arr))}
        if np.any(arr < 0):
            raise DistributionError("negative probability in array")
        total = float(arr.sum())
        if abs(total - 1.0) > tol:
            raise DistributionError(f"total mass is {total!r}, expected 1 within {tol:g}")
        mass = {k: p / total for k, p in mass.items()}
        return cls(*arr.shape, mass, labels)

    @classmethod
    def from_weights(cls, shape: tuple[int, int, int], weights: Mapping, labels=None) -> "JointDistribution":
        """Build from unnormalized nonnegative weights (tables given up to normalization)."""
        total = float(sum(weights.values()))
        if total <= 0:
            raise DistributionError("weights must have positive total")
        return cls(*shape, {k: w / total for k, w in weights.items()}, labels)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.zeros((self.nx, self.ny, self.nz))
        for key, p in self.mass.items():
            arr[key] = p
        arr.flags.writeable = False
        return arr

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    def marginal_xy(self) -> "BipartiteDistribution":
        return BipartiteDistribution.from_array(self.array.sum(axis=2))

    def relabel(self, px: Sequence[int], py: Sequence[int], pz: Sequence[int]) -> "JointDistribution":
        """Apply the permutations x -> px[x], y -> py[y], z -> pz[z]."""
        return JointDistribution(
            self.nx, self.ny, self.nz,
            {(px[x], py[y], pz[z]): p for (x, y, z), p in self.mass.items()},
        )


@dataclass(frozen=True)
class BipartiteDistribution:
    nx: int
    ny: int
    mass: Mapping[tuple[int, int], float]

    def __post_init__(self) -> None:
        for n in (self.nx, self.ny):
            if int(n) != n or n < 1:
                raise DistributionError(f"alphabet sizes must be positive integers, got {n}")
        clean = {}
        for (x, y), p in self.mass.items():
            if not (0 <= x < self.nx and 0 <= y < self.ny):
                raise DistributionError(f"cell {(x, y)} outside alphabets ({self.nx},{self.ny})")
            if p != 0.0:
                clean[(int(x), int(y))] = clean.get((int(x), int(y)), 0.0) + float(p)
        object.__setattr__(self, "mass", _check_and_normalize(clean, NORM_TOL))

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "BipartiteDistribution":
        arr = np.asarray(arr, dtype=float)
        mass = {(int(x), int(y)): float(arr[x, y]) for x, y in zip(*np.nonzero(arr))}
        return cls(arr.shape[0], arr.shape[1], mass)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.zeros((self.nx, self.ny))
        for key, p in self.mass.items():
            arr[key] = p
        arr.flags.writeable = False
        return arr


@dataclass(frozen=True)
class Channel:
    """Row-stochastic matrix W[z, zbar] = P(zbar | z)."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise DistributionError(f"channel must be a nonempty 2-d matrix, got shape {m.shape}")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise DistributionError("channel entries must be finite and >= 0")
        rows = m.sum(axis=1)
        if np.max(np.abs(rows - 1.0)) > NORM_TOL:
            raise DistributionError(f"channel rows must sum to 1, got {rows}")
        m = m / rows[:, None]
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def n_in(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_out(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def identity(cls, n: int) -> "Channel":
        return cls(np.eye(n))

    @classmethod
    def deterministic(cls, mapping: Sequence[int], n_out: int) -> "Channel":
        m = np.zeros((len(mapping), n_out))
        m[np.arange(len(mapping)), mapping] = 1.0
        return cls(m)

    def permuted(self, pz: Sequence[int]) -> "Channel":
        """Channel acting on relabelled inputs: row pz[z] of the result is row z of self."""
        m = np.empty_like(self.matrix)
        m[list(pz)] = self.matrix
        return Channel(m)


def _as_axes(axes: Iterable[str]) -> tuple[int, ...]:
    keep = []
    for a in axes:
        a = a.upper()
        if a not in AXES:
            raise DistributionError(f"unknown axis {a!r}")
        keep.append(AXES.index(a))
    if not keep:
        raise DistributionError("axis set must be nonempty")
    return tuple(sorted(set(keep)))


def marginalize(P: JointDistribution, axes: Iterable[str]) -> np.ndarray:
    """Sum out every axis not in ``axes``; returns a dense array over the kept axes in X,Y,Z order."""
    keep = _as_axes(axes)
    drop = tuple(i for i in range(3) if i not in keep)
    return P.array.sum(axis=drop)


def _xlogx(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log2(p[pos])
    return out


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise DistributionError(f"entropy needs a normalized probability vector (sum={p.sum()!r})")
    return float(max(0.0, -_xlogx(p).sum()))


def binary_entropy(q: float) -> float:
    return shannon_entropy([q, 1.0 - q])


def _mi_array(pxy: np.ndarray) -> float:
    px = pxy.sum(axis=1)
    py = pxy.sum(axis=0)
    return float(-_xlogx(px).sum() - _xlogx(py).sum() + _xlogx(pxy).sum())


def mutual_information(P) -> float:
    """I(X;Y) of a bipartite distribution (or a 2-d array)."""
    arr = P.array if isinstance(P, BipartiteDistribution) else np.asarray(P, dtype=float)
    return max(0.0, _mi_array(arr))


def cmi_array(p: np.ndarray) -> float:
    """I(X;Y|Z) of a dense nonnegative array p[x, y, z] summing to 1."""
    pz = p.sum(axis=(0, 1))
    pxz = p.sum(axis=1)
    pyz = p.sum(axis=0)
    # I = H(XZ) + H(YZ) - H(XYZ) - H(Z); zero z-slices contribute 0 automatically
    val = _xlogx(p).sum() + _xlogx(pz).sum() - _xlogx(pxz).sum() - _xlogx(pyz).sum()
    return max(0.0, float(val))


def conditional_mutual_information(P: JointDistribution) -> float:
    return cmi_array(P.array)


def cmi_slicewise(P: JointDistribution) -> float:
    """E_Z[I(X;Y | Z=z)], evaluated slice by slice."""
    arr = P.array
    total = 0.0
    for z in range(P.nz):
        pz = arr[:, :, z].sum()
        if pz > 0:
            total += pz * _mi_array(arr[:, :, z] / pz)
    return total


def apply_channel(P: JointDistribution, W: Channel) -> JointDistribution:
    if W.n_in != P.nz:
        raise DistributionError(f"channel has {W.n_in} input rows but Z has {P.nz} symbols")
    out = np.einsum("xyz,zw->xyw", P.array, W.matrix)
    return JointDistribution.from_array(out, tol=1e-10)


def ck_lower_bound(P: JointDistribution) -> float:
    """max{I(X;Y) - I(X;Z), I(Y;X) - I(Y;Z)}, unclamped."""
    arr = P.array
    ixy = _mi_array(arr.sum(axis=2))
    ixz = _mi_array(arr.sum(axis=1))
    iyz = _mi_array(arr.sum(axis=0))
    return max(ixy - ixz, ixy - iyz)


def erasure_scenario(alpha: float, deltaX: float, deltaY: float) -> JointDistribution:
    """Binary X, Y with P[X != Y] = alpha; Z = [Z_X, Z_Y] from independent erasure channels.

    Z is flattened as 3*z_x + z_y with symbols {0, 1, ERASED} per component.
    """
    for name, v in (("alpha", alpha), ("deltaX", deltaX), ("deltaY", deltaY)):
        if not 0.0 <= v <= 1.0:
            raise DistributionError(f"{name} must lie in [0, 1], got {v}")
    mass = {}
    for x in (0, 1):
        for y in (0, 1):
            pxy = alpha / 2 if x != y else (1 - alpha) / 2
            for zx, px in ((x, 1 - deltaX), (ERASED, deltaX)):
                for zy, py in ((y, 1 - deltaY), (ERASED, deltaY)):
                    p = pxy * px * py
                    if p > 0:
                        mass[(x, y, 3 * zx + zy)] = p
    labels = (("0", "1"), ("0", "1"), tuple(f"[{a},{b}]" for a in "01Δ" for b in "01Δ"))
    return JointDistribution(2, 2, 9, mass, labels)
