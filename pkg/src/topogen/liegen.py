"""Density experiments in SO(3) with unit quaternions.

Word balls of a generator pair are grown breadth-first, deduplicated on a
grid in quaternion space, and scored by their covering radius against a
quasi-uniform net: the largest angle from a net rotation to the nearest
element produced so far.  A small radius is evidence of approximate density;
a radius that stalls (one-axis pairs) shows a proper closed subgroup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "Rotation",
    "exp_so3",
    "rot",
    "so3_distance",
    "Net",
    "so3_net",
    "covering_radius",
    "BallTooLarge",
    "BallGrowth",
    "grow_ball",
    "schreier_ulam_experiment",
    "parse_pair",
]


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product over the last axis, ``[w, x, y, z]`` order."""
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def _normalized(q: np.ndarray) -> np.ndarray:
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


@dataclass(frozen=True, eq=False)
class Rotation:
    """Unit quaternion ``(w, x, y, z)``; ``q`` and ``-q`` are the same rotation."""

    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(4)
        n = np.linalg.norm(q)
        if not np.isfinite(n) or n == 0:
            raise ValueError("rotation quaternion must be finite and nonzero")
        object.__setattr__(self, "q", q / n)

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(np.array([1.0, 0.0, 0.0, 0.0]))

    def __mul__(self, other: "Rotation") -> "Rotation":
        return Rotation(quat_mul(self.q, other.q))

    def inverse(self) -> "Rotation":
        return Rotation(self.q * np.array([1.0, -1.0, -1.0, -1.0]))

    @property
    def angle(self) -> float:
        return so3_distance(Rotation.identity(), self)

    def __repr__(self):
        w, x, y, z = self.q
        return f"Rotation({w:.6g}, {x:.6g}, {y:.6g}, {z:.6g})"


def exp_so3(X: Sequence[float]) -> Rotation:
    """Rotation by angle ``|X|`` about ``X / |X|``."""
    v = np.asarray(X, dtype=float).reshape(3)
    theta = float(np.linalg.norm(v))
    if theta == 0.0:
        return Rotation.identity()
    half = theta / 2
    return Rotation(np.concatenate([[math.cos(half)], math.sin(half) * v / theta]))


_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


def rot(axis: str, angle: float) -> Rotation:
    return exp_so3(np.asarray(_AXES[axis]) * angle)


def _angle_from_chord(chord: np.ndarray) -> np.ndarray:
    # unit quaternions at chord c (sign already chosen so c <= sqrt 2) are 4*atan2(c, |q+p|) apart
    chord = np.minimum(chord, math.sqrt(2.0))
    other = np.sqrt(np.maximum(4.0 - chord * chord, 0.0))
    return 4.0 * np.arctan2(chord, other)


def so3_distance(R: Rotation, S: Rotation) -> float:
    """Rotation angle of ``R^-1 S`` in ``[0, pi]``."""
    d1 = np.linalg.norm(R.q - S.q)
    d2 = np.linalg.norm(R.q + S.q)
    return float(_angle_from_chord(np.array(min(d1, d2))))


def _shoemake(u: np.ndarray) -> np.ndarray:
    """Map points of the unit cube to unit quaternions, uniformly for uniform input."""
    u1, u2, u3 = u[:, 0], u[:, 1], u[:, 2]
    a, b = np.sqrt(1 - u1), np.sqrt(u1)
    t2, t3 = 2 * np.pi * u2, 2 * np.pi * u3
    return np.stack([a * np.sin(t2), a * np.cos(t2), b * np.sin(t3), b * np.cos(t3)], axis=1)


@dataclass(frozen=True, eq=False)
class Net:
    quats: np.ndarray
    mesh: float
    seed: int

    def __len__(self):
        return len(self.quats)

    def rotations(self) -> list[Rotation]:
        return [Rotation(q) for q in self.quats]


class _NearestFinder:
    """Nearest-rotation queries; each element is stored as ``q`` and ``-q``."""

    def __init__(self, quats: np.ndarray):
        self.tree = cKDTree(np.vstack([quats, -quats]))

    def distances(self, probes: np.ndarray) -> np.ndarray:
        chord, _ = self.tree.query(probes)
        return _angle_from_chord(chord)


# super-Fibonacci spiral constants: sqrt(2) and the real root of x**4 = x + 4
_SF_PHI = math.sqrt(2.0)
_SF_PSI = 1.533751168755204288118041


def _super_fibonacci(count: int) -> np.ndarray:
    s = np.arange(count) + 0.5
    t = s / count
    r, R = np.sqrt(t), np.sqrt(1.0 - t)
    a = 2 * np.pi * s / _SF_PHI
    b = 2 * np.pi * s / _SF_PSI
    return np.stack([r * np.sin(a), r * np.cos(a), R * np.sin(b), R * np.cos(b)], axis=1)


def so3_net(count: int, seed: int = 0, probes: int = 20000) -> Net:
    """Super-Fibonacci spiral net on SO(3), turned by a seeded random rotation.

    The mesh is estimated as the largest distance from ``probes`` uniformly
    random rotations to the net; a single point reports the degenerate mesh pi.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    turn = _shoemake(rng.random((1, 3)))
    quats = _normalized(quat_mul(turn, _super_fibonacci(count)))
    if count == 1:
        return Net(quats, math.pi, seed)
    probe = _shoemake(rng.random((probes, 3)))
    mesh = float(_NearestFinder(quats).distances(probe).max())
    return Net(quats, mesh, seed)


def _as_quats(elements) -> np.ndarray:
    if isinstance(elements, Net):
        return elements.quats
    if isinstance(elements, np.ndarray):
        return elements.reshape(-1, 4)
    return np.array([r.q for r in elements]).reshape(-1, 4)


def covering_radius(elements, net) -> float:
    """Max over net rotations of the angle to the nearest element."""
    e = _as_quats(elements)
    n = _as_quats(net)
    if len(e) == 0 or len(n) == 0:
        raise ValueError("elements and net must be nonempty")
    return float(_NearestFinder(e).distances(n).max())


class BallTooLarge(RuntimeError):
    pass


@dataclass
class BallGrowth:
    """Per-length record of a deduplicated word ball."""

    lengths: list = field(default_factory=list)
    sizes: list = field(default_factory=list)
    radii: list = field(default_factory=list)
    cell: float = 0.0
    elements: Optional[np.ndarray] = None

    def rows(self):
        return list(zip(self.lengths, self.sizes, self.radii))


def _cell_keys(q: np.ndarray, step: float) -> np.ndarray:
    # q and -q must land in the same cell: flip to w >= 0
    sign = np.where(q[:, 0] < 0, -1.0, 1.0)
    return np.floor(q * sign[:, None] / step).astype(np.int64)


def grow_ball(
    generators: Sequence[Rotation],
    L: int,
    net: Net,
    cell: float = 0.1,
    cap: int = 3_000_000,
) -> BallGrowth:
    """Breadth-first word ball up to length ``L`` with grid deduplication.

    ``cell`` is the angular diameter of a dedup cell; every stored element is
    an actual word in the generators, so the reported radius never undercuts
    the radius of the full ball by construction.
    """
    if L < 0:
        raise ValueError("L must be non-negative")
    step = math.sin(cell / 4)
    letters = []
    for g in generators:
        for x in (g.q, g.inverse().q):
            letters.append(x)
    letters = np.array(letters).reshape(-1, 4)

    ident = np.array([[1.0, 0.0, 0.0, 0.0]])
    seen = {tuple(k) for k in _cell_keys(ident, step)}
    frontier = ident
    kept = [ident]
    best = _NearestFinder(ident).distances(net.quats)
    growth = BallGrowth(cell=cell)
    growth.lengths.append(0)
    growth.sizes.append(1)
    growth.radii.append(float(best.max()))
    total = 1
    for length in range(1, L + 1):
        if len(frontier) and len(letters):
            cand = quat_mul(frontier[:, None, :], letters[None, :, :]).reshape(-1, 4)
            cand = _normalized(cand)
            keys = _cell_keys(cand, step)
            new = []
            for i, key in enumerate(map(tuple, keys)):
                if key not in seen:
                    seen.add(key)
                    new.append(i)
            frontier = cand[new]
        else:
            frontier = np.empty((0, 4))
        total += len(frontier)
        if total > cap:
            raise BallTooLarge(f"ball exceeded {cap} elements at length {length}")
        if len(frontier):
            kept.append(frontier)
            best = np.minimum(best, _NearestFinder(frontier).distances(net.quats))
        growth.lengths.append(length)
        growth.sizes.append(total)
        growth.radii.append(float(best.max()))
    growth.elements = np.vstack(kept)
    return growth


def random_rotation_near_identity(delta: float, rng: np.random.Generator) -> Rotation:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.0, delta)
    return exp_so3(axis * angle)


@dataclass
class SchreierUlamReport:
    delta: float
    L: int
    trials: int
    net_size: int
    seed: int
    target: float
    radii: list = field(default_factory=list)  # one list of radii (per length) per trial
    pairs: list = field(default_factory=list)

    @property
    def fraction_below(self) -> float:
        if not self.radii:
            return 0.0
        return sum(r[-1] < self.target for r in self.radii) / len(self.radii)

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "L": self.L,
            "trials": self.trials,
            "net_size": self.net_size,
            "seed": self.seed,
            "target": self.target,
            "final_radii": [r[-1] for r in self.radii],
            "fraction_below_target": self.fraction_below,
        }


def schreier_ulam_experiment(
    delta: float,
    L: int,
    trials: int,
    net_size: int = 2000,
    seed: int = 0,
    target: float = 0.4,
    cell: Optional[float] = None,
    cap: int = 3_000_000,
) -> SchreierUlamReport:
    """Sample pairs within ``delta`` of the identity and grow their word balls."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    net = so3_net(net_size, seed)
    rng = np.random.default_rng(seed)
    report = SchreierUlamReport(delta, L, trials, net_size, seed, target)
    for _ in range(trials):
        pair = [random_rotation_near_identity(delta, rng) for _ in range(2)]
        growth = grow_ball(pair, L, net, cell=target / 4 if cell is None else cell, cap=cap)
        report.pairs.append(pair)
        report.radii.append(growth.radii)
    return report


def parse_pair(text: str) -> list[Rotation]:
    """``"x:0.3,z:0.3"`` -> rotations about coordinate axes by the given angles."""
    out = []
    for part in text.split(","):
        axis, _, angle = part.strip().partition(":")
        if axis not in _AXES or not angle:
            raise ValueError(f"bad generator {part!r}; expected <x|y|z>:<radians>")
        out.append(rot(axis, float(angle)))
    return out
