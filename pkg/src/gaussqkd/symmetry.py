"""Numerical checks of U(n) covariance for protocol covariance matrices.

Invariance is tested on sampled group elements: phase rotations for a single
round, Haar-random unitaries mixing n rounds, and the commutation of the
circuit primitives with the tagged group action. Each check returns a
`SymmetryReport`; none of them raise on failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import block_diag
from scipy.stats import unitary_group

from .protocols import ProtocolState, alice_squeezer
from .states import CovarianceMatrix
from .symplectic import (
    ModeTag,
    SymplecticTransform,
    beamsplitter,
    realify_unitary,
    rotation_block,
    two_mode_squeezer,
)

PHASE_TOL = 1e-10
MULTICOPY_TOL = 1e-9
COMMUTATION_TOL = 1e-10


@dataclass(frozen=True)
class SymmetryReport:
    check: str
    max_deviation: float
    tolerance: float
    samples: int
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance


def _gamma_and_tags(state, tags):
    gamma = state.gamma if isinstance(state, ProtocolState) else state
    if not isinstance(gamma, CovarianceMatrix):
        raise TypeError("expected a ProtocolState or CovarianceMatrix")
    return gamma.matrix, tuple(ModeTag(t) for t in (tags if tags is not None else gamma.mode_tags))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random n x n unitary (a random phase for n = 1)."""
    if n == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(n, random_state=rng)


def _deviation(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b))


def tagged_rotation(theta: float, tags: Sequence[ModeTag]) -> np.ndarray:
    """Phase rotation by theta on U-tagged modes and by -theta on Ubar-tagged ones."""
    return block_diag(*(rotation_block(theta if t is ModeTag.U else -theta) for t in tags))


def check_phase_invariance(
    state: ProtocolState | CovarianceMatrix,
    thetas: Iterable[float],
    tags: Sequence[ModeTag] | None = None,
    tol: float = PHASE_TOL,
) -> SymmetryReport:
    """Max over theta of ||R Gamma R^T - Gamma||_F."""
    gamma, tags = _gamma_and_tags(state, tags)
    thetas = list(thetas)
    worst = 0.0
    for theta in thetas:
        r = tagged_rotation(theta, tags)
        worst = max(worst, _deviation(r @ gamma @ r.T, gamma))
    return SymmetryReport("phase_invariance", worst, tol, len(thetas))


def multicopy_action(u: np.ndarray, tags: Sequence[ModeTag]) -> np.ndarray:
    """Realified action of U across n rounds of a d-mode protocol.

    Quadratures are ordered round-major: (round r, mode k, x/p). Mode k of
    every round is mixed across rounds by U or conj(U) according to its tag.
    """
    u = np.atleast_2d(u)
    n, d = u.shape[0], len(tags)
    out = np.zeros((2 * n * d, 2 * n * d))
    rounds = np.arange(n)
    for k, tag in enumerate(tags):
        r = realify_unitary(u, tag).matrix
        idx = np.concatenate([[2 * (i * d + k), 2 * (i * d + k) + 1] for i in rounds])
        out[np.ix_(idx, idx)] = r
    return out


def iid_covariance(gamma: np.ndarray, n: int) -> np.ndarray:
    """Covariance of n independent rounds, round-major ordering."""
    return np.kron(np.eye(n), gamma)


def check_multicopy_invariance(
    state: ProtocolState | CovarianceMatrix,
    n: int,
    unitaries: Sequence[np.ndarray] | None = None,
    samples: int = 8,
    seed: int = 0,
    tags: Sequence[ModeTag] | None = None,
    tol: float = MULTICOPY_TOL,
) -> SymmetryReport:
    """Invariance of the i.i.d. covariance over n rounds under tagged U(n) actions.

    Uses `unitaries` if given, else `samples` Haar-random n x n unitaries
    drawn with `seed`.
    """
    gamma, tags = _gamma_and_tags(state, tags)
    if n < 1:
        raise ValueError("need at least one round")
    if unitaries is None:
        rng = np.random.default_rng(seed)
        unitaries = [random_unitary(n, rng) for _ in range(samples)]
    big = iid_covariance(gamma, n)
    worst = 0.0
    for u in unitaries:
        s = multicopy_action(u, tags)
        worst = max(worst, _deviation(s @ big @ s.T, big))
    return SymmetryReport(f"multicopy_invariance_n{n}", worst, tol, len(unitaries), seed)


def _commutator_norm(transform: SymplecticTransform, n: int, u: np.ndarray, tags) -> float:
    s = np.kron(np.eye(n), transform.matrix)
    r = multicopy_action(u, tags)
    return float(np.linalg.norm(s @ r - r @ s))


def check_primitive_commutation(
    n: int,
    samples: int = 8,
    seed: int = 0,
    tol: float = COMMUTATION_TOL,
    squeezer_tags: tuple[ModeTag, ModeTag] = (ModeTag.U, ModeTag.UBAR),
    beamsplitter_tags: tuple[ModeTag, ModeTag] = (ModeTag.U, ModeTag.U),
) -> SymmetryReport:
    """Commutators of n-fold squeezers and beamsplitters with the tagged U action.

    Two-mode squeezers (both sign conventions) are paired with U x conj(U)
    and beamsplitters with U x U, for random gains, transmittances and
    unitaries. Passing other tag pairs gives the positive controls.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        u = random_unitary(n, rng)
        g = 1.0 + 4.0 * rng.random()
        t = rng.random()
        worst = max(
            worst,
            _commutator_norm(two_mode_squeezer(g), n, u, squeezer_tags),
            _commutator_norm(alice_squeezer(g, (0, 1), 2), n, u, squeezer_tags),
            _commutator_norm(beamsplitter(t), n, u, beamsplitter_tags),
        )
    return SymmetryReport(f"primitive_commutation_n{n}", worst, tol, samples, seed)


def block_structure_deviation(
    state: ProtocolState | CovarianceMatrix, tags: Sequence[ModeTag] | None = None
) -> float:
    """Largest departure of a 2x2 block from a real multiple of I (same tags) or Z (opposite tags).

    Phase invariance alone allows rotation-like blocks [[c, s], [-s, c]]
    between equally tagged modes and reflection-like blocks [[c, s], [s, -c]]
    between oppositely tagged ones. Circuits without phase shifters (other
    than by pi) produce the stricter real form, which this measures.
    """
    gamma, tags = _gamma_and_tags(state, tags)
    worst = 0.0
    for i, ti in enumerate(tags):
        for j, tj in enumerate(tags):
            b = gamma[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
            diag_mismatch = b[0, 0] - b[1, 1] if ti is tj else b[0, 0] + b[1, 1]
            worst = max(worst, abs(diag_mismatch), abs(b[0, 1]), abs(b[1, 0]))
    return float(worst)


def mistag(tags: Sequence[ModeTag], mode: int = 0) -> tuple[ModeTag, ...]:
    """Tags with one entry flipped (positive control)."""
    tags = list(tags)
    tags[mode] = tags[mode].flipped()
    return tuple(tags)
