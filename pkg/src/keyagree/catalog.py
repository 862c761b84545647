"""Builders for the worked key-agreement / entanglement examples.

Each builder returns a :class:`Scenario` carrying the classical distribution,
the tripartite pure state (when there is one), the measurement bases that link
them, an explicit zero-certificate channel where one is known, and the known
thresholds as metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .dist import Channel, JointDistribution, erasure_scenario
from .qstate import (
    DensityMatrix,
    EveMeasurementSet,
    LocalBasis,
    PureState,
    canonical_purification,
    measure_state,
    partial_trace_env,
)

EXAMPLE1_THRESHOLD = 1.0 - 1.0 / math.sqrt(2.0)
WERNER_THRESHOLD = 1.0 / 3.0
CONSISTENCY_TOL = 1e-10


class ScenarioError(ValueError):
    """Invalid scenario parameters or an inconsistent scenario."""


@dataclass(frozen=True)
class Scenario:
    name: str
    params: Mapping[str, float]
    distribution: JointDistribution | None = None
    state: PureState | None = None
    bases: tuple[LocalBasis, LocalBasis, EveMeasurementSet] | None = None
    certificate: Channel | None = None
    certificate_valid: bool = False
    eve_frames: Mapping[str, EveMeasurementSet] = field(default_factory=dict)
    known_facts: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.state is not None and self.distribution is not None:
            measured = measure_state(self.state, *self.bases)
            dev = np.max(np.abs(measured.array - self.distribution.array)) if (
                measured.shape == self.distribution.shape
            ) else np.inf
            if dev > CONSISTENCY_TOL:
                raise ScenarioError(
                    f"{self.name}: measuring the state does not reproduce the distribution (dev {dev:.3g})"
                )

    @property
    def rho(self) -> DensityMatrix | None:
        return None if self.state is None else partial_trace_env(self.state)

    def measured(self, frame: str = "standard") -> JointDistribution:
        """Distribution from the standard A/B bases and the named Eve frame.

        The standard frame returns the declared table when there is one (exact
        rationals stay exact); other frames measure the state.
        """
        if frame == "standard":
            if self.distribution is not None:
                return self.distribution
            return measure_state(self.state, *self.bases)
        if self.state is None:
            raise ScenarioError(f"{self.name} has no state; only the standard frame exists")
        try:
            eve = self.eve_frames[frame]
        except KeyError:
            raise ScenarioError(f"{self.name} has no Eve frame {frame!r}") from None
        return measure_state(self.state, self.bases[0], self.bases[1], eve)


def _standard(dims) -> tuple[LocalBasis, LocalBasis, EveMeasurementSet]:
    dA, dB, dE = dims
    return LocalBasis.standard(dA), LocalBasis.standard(dB), EveMeasurementSet.standard(dE)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ScenarioError(msg)


# ---------------------------------------------------------------- example 1


def example1_delta(D: float) -> float:
    """Probability that Eve's second bit equals Bob's bit under optimal incoherent attack."""
    return 0.5 + math.sqrt(D * (1.0 - D))


def example1_distribution(D: float) -> JointDistribution:
    """Z = [Z1, Z2] flattened as 2*Z1 + Z2, with Z1 = X xor Y and P[Z2 = Y] = delta."""
    delta = example1_delta(D)
    mass = {}
    for x in (0, 1):
        for y in (0, 1):
            pxy = (1 - D) / 2 if x == y else D / 2
            for z2 in (0, 1):
                p = pxy * (delta if z2 == y else 1 - delta)
                if p > 0:
                    mass[(x, y, 2 * (x ^ y) + z2)] = p
    labels = (("0", "1"), ("0", "1"), ("[0,0]", "[0,1]", "[1,0]", "[1,1]"))
    return JointDistribution(2, 2, 4, mass, labels)


def example1_certificate(D: float) -> Channel:
    """Noise on Z2 down to the equality point, then the two-output merge onto {u, v}.

    Below the threshold no noise helps and the bare merge is returned (it fails there).
    """
    delta = example1_delta(D)
    ratio = D / (1 - D)
    f = 0.0
    if ratio <= 1.0 and delta > 0.5:
        target = 0.5 * (1 + math.sqrt(max(0.0, 1 - ratio * ratio)))
        f = max(0.0, (delta - target) / (2 * delta - 1))
    return Channel(np.array([[1 - f, f], [f, 1 - f], [0.5, 0.5], [0.5, 0.5]]))


def example1(D: float) -> Scenario:
    _require(0.0 <= D <= 0.5, f"D must lie in [0, 1/2], got {D}")
    c, s = math.sqrt(1 - D), math.sqrt(D)
    u, v = (c + s) / math.sqrt(2), (c - s) / math.sqrt(2)
    # xi vectors in Eve's measurement frame: coordinate 2*z1 + z2, where z1 flags
    # the disturbed block and z2 is the likelier value of Bob's bit
    xi = {
        (0, 0): np.array([u, v, 0, 0]),
        (1, 1): np.array([v, u, 0, 0]),
        (0, 1): np.array([0, 0, v, u]),
        (1, 0): np.array([0, 0, u, v]),
    }
    amp = np.zeros((2, 2, 4))
    for (a, b), vec in xi.items():
        amp[a, b] = math.sqrt(((1 - D) if a == b else D) / 2) * vec
    return Scenario(
        name="example1",
        params={"D": D},
        distribution=example1_distribution(D),
        state=PureState(amp),
        bases=_standard((2, 2, 4)),
        certificate=example1_certificate(D),
        certificate_valid=D >= EXAMPLE1_THRESHOLD,
        known_facts={
            "delta": example1_delta(D),
            "threshold_D": EXAMPLE1_THRESHOLD,
            "separable": D >= EXAMPLE1_THRESHOLD,
            "ppt_eigenvalues": sorted(example1_ppt_eigenvalues(D)),
        },
    )


def example1_ppt_eigenvalues(D: float) -> list[float]:
    """Closed-form spectrum of the partial transpose."""
    return [
        0.5 * (D + (1 - D) * (1 - 2 * D)),
        0.5 * (D - (1 - D) * (1 - 2 * D)),
        0.5 * ((1 - D) + D * (1 - 2 * D)),
        0.5 * ((1 - D) - D * (1 - 2 * D)),
    ]


def example1_displayed_rho(D: float) -> np.ndarray:
    """rho_AB as printed alongside the example (singlet-like labelling of Bob's qubit)."""
    a, b = D * (1 - 2 * D), (1 - D) * (1 - 2 * D)
    return 0.5 * np.array([[D, 0, 0, -a], [0, 1 - D, -b, 0], [0, -b, 1 - D, 0], [-a, 0, 0, D]])


# iσ_y on Bob maps the state's rho_AB onto the printed matrix
EXAMPLE1_DISPLAY_UNITARY_B = np.array([[0.0, 1.0], [-1.0, 0.0]])


# ---------------------------------------------------------------- example 2


def example2_horodecki(a: float) -> Scenario:
    _require(0.0 < a < 1.0, f"a must lie in (0, 1), got {a}")
    n = 16 * a + 2
    # X, Y in {1,2,3} stored as 0..2; Z in 0..6
    weights = {(i, i, 0): 2 * a / n for i in range(3)}
    for x, y, z in ((1, 2, 2), (1, 3, 3), (2, 1, 4), (2, 3, 5), (3, 2, 6)):
        weights[(x - 1, y - 1, z)] = 2 * a / n
    weights[(2, 0, 1)] = (1 + a) / n
    weights[(2, 2, 1)] = (1 - a) / n
    dist = JointDistribution(3, 3, 7, weights)

    amp = np.zeros((3, 3, 7))
    for i in range(3):
        amp[i, i, 0] = math.sqrt(3 * a / (8 * a + 1)) / math.sqrt(3)
    amp[2, 0, 1] = math.sqrt(1 / (8 * a + 1)) * math.sqrt((1 + a) / 2)
    amp[2, 2, 1] = math.sqrt(1 / (8 * a + 1)) * math.sqrt((1 - a) / 2)
    for x, y, z in ((1, 2, 2), (1, 3, 3), (2, 1, 4), (2, 3, 5), (3, 2, 6)):
        amp[x - 1, y - 1, z] = math.sqrt(a / (8 * a + 1))
    return Scenario(
        name="example2",
        params={"a": a},
        distribution=dist,
        state=PureState(amp),
        bases=_standard((3, 3, 7)),
        known_facts={"separable": False, "ppt": True, "bound_entangled": True},
    )


# ---------------------------------------------------------------- example 3

# (x, y) -> (z, weight kind); x, y in 1..3
_EX3_CELLS = {
    (1, 1): (0, "two"), (2, 2): (0, "two"), (3, 3): (0, "two"),
    (1, 2): (1, "alpha"), (2, 3): (2, "alpha"), (3, 1): (3, "alpha"),
    (2, 1): (4, "rest"), (3, 2): (5, "rest"), (1, 3): (6, "rest"),
}


def example3_weight(kind: str, alpha: float) -> float:
    return {"two": 2.0, "alpha": alpha, "rest": 5.0 - alpha}[kind]


def example3_certificate(alpha: float) -> Channel:
    """Output 0 is the mixed symbol; outputs 1..6 keep the original symbol.

    Routing 2/weight of each off-diagonal cell into the mixed symbol makes the
    mixed slice uniform over all nine (x, y) pairs. Probabilities are clipped
    to 1 outside alpha in [2, 3], where the certificate no longer works.
    """
    W = np.zeros((7, 7))
    W[0, 0] = 1.0
    for z, kind in ((1, "alpha"), (2, "alpha"), (3, "alpha"), (4, "rest"), (5, "rest"), (6, "rest")):
        w = example3_weight(kind, alpha)
        to_mix = 1.0 if w <= 0 else min(1.0, 2.0 / w)
        W[z, 0] = to_mix
        W[z, z] = 1.0 - to_mix
    return Channel(W)


def example3_alpha(alpha: float) -> Scenario:
    _require(2.0 <= alpha <= 5.0, f"alpha must lie in [2, 5], got {alpha}")
    weights = {(x - 1, y - 1, z): example3_weight(k, alpha) / 21.0 for (x, y), (z, k) in _EX3_CELLS.items()}
    dist = JointDistribution(3, 3, 7, weights)
    amp = np.zeros((3, 3, 7))
    for (x, y, z), p in weights.items():
        amp[x, y, z] = math.sqrt(p)
    if alpha <= 3.0:
        klass = "separable"
    elif alpha <= 4.0:
        klass = "bound_entangled"
    else:
        klass = "free_entangled"
    return Scenario(
        name="example3",
        params={"alpha": alpha},
        distribution=dist,
        state=PureState(amp),
        bases=_standard((3, 3, 7)),
        certificate=example3_certificate(alpha),
        certificate_valid=2.0 <= alpha <= 3.0,
        known_facts={"class": klass, "separable": alpha <= 3.0, "ppt": alpha <= 4.0},
    )


# ---------------------------------------------------------------- example 4 (Werner)


def werner_xi(lam: float) -> float:
    return 1.0 if lam >= WERNER_THRESHOLD else 2 * lam / (1 - lam)


def werner_certificate(lam: float) -> Channel:
    xi = werner_xi(lam)
    W = np.zeros((5, 5))
    W[0, 0] = W[2, 2] = W[3, 3] = 1.0
    W[1, 0] = W[4, 0] = xi
    W[1, 1] = W[4, 4] = 1.0 - xi
    return Channel(W)


def example4_werner(lam: float) -> Scenario:
    _require(0.0 <= lam <= 1.0, f"lambda must lie in [0, 1], got {lam}")
    q = (1 - lam) / 4
    dist = JointDistribution(
        2, 2, 5,
        {(0, 1, 0): lam / 2, (1, 0, 0): lam / 2, (0, 0, 1): q, (0, 1, 2): q, (1, 0, 3): q, (1, 1, 4): q},
    )
    amp = np.zeros((2, 2, 5))
    # singlet (|10> - |01>)/sqrt2 on Eve's |0>
    amp[1, 0, 0] = math.sqrt(lam / 2)
    amp[0, 1, 0] = -math.sqrt(lam / 2)
    for (a, b), e in (((0, 0), 1), ((0, 1), 2), ((1, 0), 3), ((1, 1), 4)):
        amp[a, b, e] = math.sqrt(q)
    return Scenario(
        name="werner",
        params={"lambda": lam},
        distribution=dist,
        state=PureState(amp),
        bases=_standard((2, 2, 5)),
        certificate=werner_certificate(lam),
        certificate_valid=lam <= WERNER_THRESHOLD,
        known_facts={"separable": lam <= WERNER_THRESHOLD, "xi": werner_xi(lam)},
    )


def werner_rho(lam: float) -> DensityMatrix:
    singlet = np.array([0, -1, 1, 0]) / math.sqrt(2)
    return DensityMatrix(lam * np.outer(singlet, singlet) + (1 - lam) / 4 * np.eye(4), 2, 2)


# ---------------------------------------------------------------- example 5


def example5_condition(alpha: float, deltaX: float, deltaY: float) -> float:
    """Left-hand side of the closed-form PPT condition (PPT iff value >= 1)."""
    c = (1 - deltaX) * (1 - deltaY)
    return (alpha - alpha * alpha) * (c / deltaX + 2) * (c / deltaY + 2)


def example5_boundary_alpha(deltaX: float, deltaY: float) -> float:
    """Smaller root in alpha of condition == 1."""
    c = (1 - deltaX) * (1 - deltaY)
    k = (c / deltaX + 2) * (c / deltaY + 2)
    return 0.5 * (1 - math.sqrt(1 - 4 / k))


def example5_erasure(alpha: float, deltaX: float, deltaY: float) -> Scenario:
    for name, v in (("alpha", alpha), ("deltaX", deltaX), ("deltaY", deltaY)):
        _require(0.0 < v < 1.0, f"{name} must lie in (0, 1), got {v}")
    dist = erasure_scenario(alpha, deltaX, deltaY)
    cond = example5_condition(alpha, deltaX, deltaY)
    return Scenario(
        name="example5",
        params={"alpha": alpha, "deltaX": deltaX, "deltaY": deltaY},
        distribution=dist,
        state=canonical_purification(dist),
        bases=_standard((2, 2, 9)),
        known_facts={"condition": cond, "ppt": cond >= 1.0},
    )


# ---------------------------------------------------------------- example 6

EX6_LAMBDA = (5 + math.sqrt(5)) / 10
EX6_ETA = 1 / math.sqrt(5)


def example6_m(sign: int) -> np.ndarray:
    """|+m> or |-m> for sign = +1 / -1."""
    e = EX6_ETA
    return np.array([math.sqrt((1 + sign * e) / 2), sign * math.sqrt((1 - sign * e) / 2)])


def example6_rotated_eve() -> EveMeasurementSet:
    L = EX6_LAMBDA
    # the +1/sqrt(5 L) signs on |1> are what make Eve's outcomes leave product states
    t0 = [math.sqrt(L), 1 / math.sqrt(5 * L)]
    t1 = [-math.sqrt(1 - L), 1 / math.sqrt(5 * (1 - L))]
    return EveMeasurementSet(np.array([t0, t1]))


def example6() -> Scenario:
    amp = np.zeros((2, 2, 2))
    for x, y, z in ((0, 0, 0), (0, 1, 0), (1, 0, 0), (0, 0, 1), (1, 1, 1)):
        amp[x, y, z] = 1 / math.sqrt(5)
    dist = JointDistribution.from_weights((2, 2, 2), {k: 1.0 for k in ((0, 0, 0), (0, 1, 0), (1, 0, 0), (0, 0, 1), (1, 1, 1))})
    return Scenario(
        name="example6",
        params={},
        distribution=dist,
        state=PureState(amp),
        bases=_standard((2, 2, 2)),
        eve_frames={"rotated": example6_rotated_eve()},
        known_facts={"separable": True, "ppt_equals_rho": True, "Lambda": EX6_LAMBDA, "eta": EX6_ETA},
    )


def example6_rotated_form() -> np.ndarray:
    """sqrt(L)|m,m>|0~> + sqrt(1-L)|-m,-m>|1~> as an amplitude tensor."""
    eve = example6_rotated_eve().vectors
    mp, mm = example6_m(+1), example6_m(-1)
    L = EX6_LAMBDA
    return math.sqrt(L) * np.einsum("a,b,e->abe", mp, mp, eve[0]) + math.sqrt(1 - L) * np.einsum(
        "a,b,e->abe", mm, mm, eve[1]
    )


# ---------------------------------------------------------------- example 7

EX7_TABLE = {
    (0, 0, 0): 0.0082, (0, 0, 1): 0.0006,
    (1, 0, 0): 0.0219, (1, 0, 1): 0.0202,
    (0, 1, 0): 0.0729, (0, 1, 1): 0.0905,
    (1, 1, 0): 0.3928, (1, 1, 1): 0.3889204545,
}


def example7(literal_table_typo: bool = False) -> Scenario:
    """Bad bases for Alice and Bob: I(X;Y) = 0 but the purification is entangled.

    The (x=1, y=1, z=0) cell is 0.3928, the value used in the printed product
    identity; ``literal_table_typo`` swaps in the 0.03928 that appears once.
    """
    weights = dict(EX7_TABLE)
    if literal_table_typo:
        weights[(1, 1, 0)] = 0.03928
    dist = JointDistribution.from_weights((2, 2, 2), weights)
    return Scenario(
        name="example7",
        params={},
        distribution=dist,
        state=canonical_purification(dist),
        bases=_standard((2, 2, 2)),
        known_facts={"separable": False},
    )


# ---------------------------------------------------------------- registry

CATALOG: dict[str, tuple[Callable[..., Scenario], tuple[str, ...]]] = {
    "example1": (example1, ("D",)),
    "example2": (example2_horodecki, ("a",)),
    "example3": (example3_alpha, ("alpha",)),
    "werner": (example4_werner, ("lambda",)),
    "example5": (example5_erasure, ("alpha", "deltaX", "deltaY")),
    "example6": (example6, ()),
    "example7": (example7, ()),
}


def build(name: str, params: Mapping[str, float] | None = None) -> Scenario:
    params = dict(params or {})
    try:
        builder, names = CATALOG[name]
    except KeyError:
        raise ScenarioError(f"unknown scenario {name!r}; known: {', '.join(CATALOG)}") from None
    missing = [n for n in names if n not in params]
    extra = [n for n in params if n not in names]
    if missing or extra:
        raise ScenarioError(f"{name} takes parameters {list(names)}; missing {missing}, unexpected {extra}")
    return builder(*(float(params[n]) for n in names))
