"""Real symplectic linear algebra in the interleaved quadrature basis.

Quadratures are ordered (x1, p1, x2, p2, ...) with x = a + a^dagger and
p = -i(a - a^dagger), so the vacuum has covariance matrix identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Sequence

import numpy as np

from .exceptions import ParameterError, UnphysicalStateError

SIGMA_Z = np.diag([1.0, -1.0])

SYMPLECTIC_TOL = 1e-10
# Symplectic eigenvalues in [1 - band, 1) are clamped to 1.
CLAMP_BAND = 1e-8


class ModeTag(str, Enum):
    """How the U(n) symmetry acts on a mode: by U or by its complex conjugate."""

    U = "U"
    UBAR = "Ubar"

    def flipped(self) -> ModeTag:
        return ModeTag.UBAR if self is ModeTag.U else ModeTag.U


@lru_cache(maxsize=64)
def symplectic_form(num_modes: int) -> np.ndarray:
    """Block-diagonal Omega with 2x2 blocks [[0, 1], [-1, 0]] (read-only)."""
    omega = np.kron(np.eye(num_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    omega.setflags(write=False)
    return omega


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SymplecticTransform:
    """A real 2d x 2d matrix S with S Omega S^T = Omega."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ParameterError(f"symplectic matrix must be square of even size, got {m.shape}")
        omega = symplectic_form(m.shape[0] // 2)
        scale = max(1.0, float(np.max(np.abs(m))) ** 2)
        if np.linalg.norm(m @ omega @ m.T - omega) > SYMPLECTIC_TOL * scale:
            raise ParameterError("matrix does not preserve the symplectic form")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def num_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def __matmul__(self, other: SymplecticTransform) -> SymplecticTransform:
        if not isinstance(other, SymplecticTransform):
            return NotImplemented
        if other.num_modes != self.num_modes:
            raise ParameterError("cannot compose transforms on different numbers of modes")
        return SymplecticTransform(self.matrix @ other.matrix)

    @property
    def T(self) -> SymplecticTransform:
        return SymplecticTransform(self.matrix.T)

    def inverse(self) -> SymplecticTransform:
        # S^{-1} = -Omega S^T Omega for symplectic S.
        omega = symplectic_form(self.num_modes)
        return SymplecticTransform(-omega @ self.matrix.T @ omega)


def _check_modes(modes: Sequence[int], num_modes: int) -> None:
    if len(set(modes)) != len(modes):
        raise ParameterError(f"mode indices must be distinct, got {tuple(modes)}")
    for m in modes:
        if not 0 <= m < num_modes:
            raise ParameterError(f"mode index {m} out of range for {num_modes} modes")


def embed(block: np.ndarray, modes: Sequence[int], num_modes: int) -> np.ndarray:
    """Embed a 2k x 2k block acting on `modes` into the 2d x 2d identity."""
    _check_modes(modes, num_modes)
    out = np.eye(2 * num_modes)
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes])
    out[np.ix_(idx, idx)] = block
    return out


def beamsplitter(t: float, modes: tuple[int, int] = (0, 1), num_modes: int = 2) -> SymplecticTransform:
    """Beamsplitter of transmittance t on the pair `modes`.

    Acts as [[sqrt(t) I, -sqrt(1-t) I], [sqrt(1-t) I, sqrt(t) I]] on the
    quadratures of (modes[0], modes[1]).
    """
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f"transmittance must lie in [0, 1], got {t}")
    c, s = np.sqrt(t), np.sqrt(1.0 - t)
    i2 = np.eye(2)
    block = np.block([[c * i2, -s * i2], [s * i2, c * i2]])
    return SymplecticTransform(embed(block, modes, num_modes))


def two_mode_squeezer(g: float, modes: tuple[int, int] = (0, 1), num_modes: int = 2) -> SymplecticTransform:
    """Two-mode squeezer (phase-insensitive amplifier) of gain g >= 1.

    Quadrature form [[sqrt(g) I, sqrt(g-1) Z], [sqrt(g-1) Z, sqrt(g) I]],
    Z = diag(1, -1). On two vacua it produces a TMSS of variance 2g - 1.
    """
    if not g >= 1.0:
        raise ParameterError(f"squeezer gain must be >= 1, got {g}")
    a, b = np.sqrt(g), np.sqrt(g - 1.0)
    block = np.block([[a * np.eye(2), b * SIGMA_Z], [b * SIGMA_Z, a * np.eye(2)]])
    return SymplecticTransform(embed(block, modes, num_modes))


def rotation_block(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def phase_rotation(theta: float, mode: int = 0, num_modes: int = 1) -> SymplecticTransform:
    """Phase rotation a -> e^{i theta} a on a single mode."""
    return SymplecticTransform(embed(rotation_block(theta), [mode], num_modes))


def _complex_to_real(m: np.ndarray) -> np.ndarray:
    """Real 2n x 2n matrix of the map x + i p -> M (x + i p)."""
    n = m.shape[0]
    out = np.empty((2 * n, 2 * n))
    out[0::2, 0::2] = m.real
    out[0::2, 1::2] = -m.imag
    out[1::2, 0::2] = m.imag
    out[1::2, 1::2] = m.real
    return out


def realify_unitary(u: np.ndarray, tags: Sequence[ModeTag] | ModeTag = ModeTag.U) -> SymplecticTransform:
    """Real symplectic orthogonal matrix of the passive unitary U on n modes.

    `tags` selects U or its conjugate. A single tag applies to all n modes
    (the usual case: the n round-copies of one protocol mode). The rotation
    direction is fixed so that the 1x1 unitary e^{i theta} with tag U gives
    `phase_rotation(theta)`.
    """
    u = np.atleast_2d(np.asarray(u, dtype=complex))
    n = u.shape[0]
    if u.shape != (n, n) or not np.allclose(u.conj().T @ u, np.eye(n), rtol=0.0, atol=1e-10):
        raise ParameterError("realify_unitary requires a square unitary matrix")
    if isinstance(tags, ModeTag):
        tag = tags
    else:
        tags = list(tags)
        if len(set(tags)) != 1:
            raise ParameterError("a single unitary acts with one tag; build mixed actions blockwise")
        tag = tags[0]
    # With x + i p = 2a, the U-action corresponds to the conjugate on (x + i p)
    # under the rotation convention of phase_rotation.
    m = u.conj() if tag is ModeTag.U else u
    return SymplecticTransform(_complex_to_real(m))


def clamp_band(gamma: np.ndarray) -> float:
    """Tolerance below 1 within which symplectic eigenvalues count as 1.

    Rounding Gamma's entries moves nu by up to ~eps * ||Gamma||^2, which
    exceeds 1e-8 once entries reach ~1e4.
    """
    # max row sum bounds the spectral norm
    norm = np.abs(gamma).sum(axis=1).max()
    return max(CLAMP_BAND, 4.0 * np.finfo(float).eps * norm**2)


def symplectic_eigenvalues(gamma: np.ndarray, band: float | None = None) -> np.ndarray:
    """Sorted symplectic spectrum of a 2d x 2d covariance matrix.

    Moduli of the eigenvalues of Omega Gamma, which come in pairs +-i nu.
    Values within the clamp band below 1 are set to 1; anything lower
    raises `UnphysicalStateError`. The default band is 1e-8, widened to
    the round-off scale eps * ||Gamma||^2 for very large entries.
    """
    gamma = np.asarray(gamma, dtype=float)
    d = gamma.shape[0] // 2
    if gamma.shape != (2 * d, 2 * d) or d == 0:
        raise ParameterError(f"covariance matrix must be 2d x 2d, got {gamma.shape}")
    if band is None:
        band = clamp_band(gamma)
    ev = np.linalg.eigvals(symplectic_form(d) @ gamma)
    moduli = np.sort(np.abs(ev))
    nu = 0.5 * (moduli[0::2] + moduli[1::2])
    if nu[0] < 1.0 - band:
        raise UnphysicalStateError(f"symplectic eigenvalue {nu[0]:.12g} < 1: state violates the uncertainty principle")
    return np.maximum(nu, 1.0)
