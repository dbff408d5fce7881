"""Zero-mean Gaussian states as covariance matrices in shot-noise units."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag

from .exceptions import ParameterError
from .symplectic import (
    SIGMA_Z,
    ModeTag,
    SymplecticTransform,
    _complex_to_real,
    clamp_band,
    symplectic_eigenvalues,
)

SYMMETRY_TOL = 1e-12
LAMBDA_MARGIN = 1e-12


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Real symmetric 2d x 2d covariance matrix with one ModeTag per mode.

    Construction checks symmetry and the uncertainty principle. Large
    entries get a relative symmetry tolerance. `band` overrides the clamp
    band of the symplectic spectrum, for states derived from a larger,
    worse-conditioned parent.
    """

    matrix: np.ndarray
    mode_tags: tuple[ModeTag, ...]
    band: float | None = field(default=None, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 or m.shape[0] == 0:
            raise ParameterError(f"covariance matrix must be 2d x 2d, got {m.shape}")
        tags = tuple(ModeTag(t) for t in self.mode_tags)
        if len(tags) != m.shape[0] // 2:
            raise ParameterError(f"expected {m.shape[0] // 2} mode tags, got {len(tags)}")
        asym = np.max(np.abs(m - m.T))
        if asym > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(m)))):
            raise ParameterError(f"covariance matrix is not symmetric (max asymmetry {asym:.3g})")
        m = 0.5 * (m + m.T)
        # raises UnphysicalStateError
        spectrum = symplectic_eigenvalues(m, self.band)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "mode_tags", tags)
        object.__setattr__(self, "_spectrum", spectrum)

    @property
    def num_modes(self) -> int:
        return self.matrix.shape[0] // 2

    @classmethod
    def _unchecked(cls, matrix: np.ndarray, tags: Sequence[ModeTag]) -> CovarianceMatrix:
        # intermediate circuit states; the final state is validated
        obj = object.__new__(cls)
        object.__setattr__(obj, "matrix", matrix)
        object.__setattr__(obj, "mode_tags", tuple(tags))
        object.__setattr__(obj, "_spectrum", None)
        object.__setattr__(obj, "band", None)
        return obj

    def symplectic_eigenvalues(self) -> np.ndarray:
        if self._spectrum is None:
            object.__setattr__(self, "_spectrum", symplectic_eigenvalues(self.matrix, self.band))
        return self._spectrum.copy()

    def block(self, i: int, j: int) -> np.ndarray:
        """The 2x2 block between modes i and j."""
        return self.matrix[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]

    def reorder(self, order: Sequence[int], check: bool = True) -> CovarianceMatrix:
        """Permute (or select) modes; `order[k]` is the old index of new mode k."""
        idx = np.concatenate([[2 * i, 2 * i + 1] for i in order])
        cls = CovarianceMatrix if check else CovarianceMatrix._unchecked
        return cls(self.matrix[np.ix_(idx, idx)], tuple(self.mode_tags[i] for i in order))

    def marginal(self, modes: Sequence[int]) -> CovarianceMatrix:
        return self.reorder(modes)

    def with_tags(self, tags: Sequence[ModeTag]) -> CovarianceMatrix:
        return CovarianceMatrix(self.matrix, tuple(tags))


def direct_sum(*states: CovarianceMatrix, check: bool = True) -> CovarianceMatrix:
    """Tensor product of independent states (block-diagonal covariance)."""
    cls = CovarianceMatrix if check else CovarianceMatrix._unchecked
    return cls(
        block_diag(*(s.matrix for s in states)),
        tuple(t for s in states for t in s.mode_tags),
    )


def vacuum(num_modes: int, tags: Sequence[ModeTag] | None = None) -> CovarianceMatrix:
    if num_modes < 1:
        raise ParameterError("need at least one mode")
    if tags is None:
        tags = (ModeTag.U,) * num_modes
    return CovarianceMatrix(np.eye(2 * num_modes), tuple(tags))


def thermal(variance: float, tag: ModeTag = ModeTag.U) -> CovarianceMatrix:
    if variance < 1:
        raise ParameterError(f"thermal variance must be >= 1, got {variance}")
    return CovarianceMatrix(variance * np.eye(2), (tag,))


def tmss(variance: float, tags: tuple[ModeTag, ModeTag] = (ModeTag.U, ModeTag.UBAR)) -> CovarianceMatrix:
    """Two-mode squeezed vacuum [[V I, sqrt(V^2-1) Z], [sqrt(V^2-1) Z, V I]]."""
    if not variance >= 1.0:
        raise ParameterError(f"TMSS variance must be >= 1, got {variance}")
    c = np.sqrt(variance**2 - 1.0)
    m = np.block([[variance * np.eye(2), c * SIGMA_Z], [c * SIGMA_Z, variance * np.eye(2)]])
    return CovarianceMatrix(m, tuple(tags))


def apply(transform: SymplecticTransform, state: CovarianceMatrix, check: bool = True) -> CovarianceMatrix:
    """Gaussian unitary update Gamma -> S Gamma S^T; tags are unchanged.

    `check=False` skips validation of the result, for intermediate steps of
    a circuit whose final state is validated.
    """
    if transform.num_modes != state.num_modes:
        raise ParameterError(
            f"transform acts on {transform.num_modes} modes but state has {state.num_modes}"
        )
    s = transform.matrix
    if not check:
        return CovarianceMatrix._unchecked(s @ state.matrix @ s.T, state.mode_tags)
    return CovarianceMatrix(s @ state.matrix @ s.T, state.mode_tags)


def _heterodyne_one(gamma: np.ndarray, mode: int) -> np.ndarray:
    idx = [2 * mode, 2 * mode + 1]
    rest = [k for k in range(gamma.shape[0]) if k not in idx]
    a = gamma[np.ix_(idx, idx)]
    b = gamma[np.ix_(rest, rest)]
    c = gamma[np.ix_(idx, rest)]
    return b - c.T @ np.linalg.solve(a + np.eye(2), c)


def heterodyne_condition(state: CovarianceMatrix, measured: Sequence[int]) -> CovarianceMatrix:
    """Covariance of the unmeasured modes after heterodyning `measured`.

    For one measured mode with block A and cross block C this is
    B - C^T (A + I)^{-1} C; several modes are conditioned one at a time.
    The result does not depend on the measurement outcome.
    """
    measured = sorted(set(int(m) for m in measured))
    d = state.num_modes
    if not measured or len(measured) >= d:
        raise ParameterError("heterodyne_condition needs a nonempty proper subset of modes")
    if measured[0] < 0 or measured[-1] >= d:
        raise ParameterError(f"measured modes {measured} out of range for {d} modes")
    gamma = state.matrix
    band = max(clamp_band(gamma), state.band or 0.0)
    # highest index first so remaining indices stay valid
    for m in reversed(measured):
        gamma = _heterodyne_one(gamma, m)
    tags = tuple(t for k, t in enumerate(state.mode_tags) if k not in measured)
    return CovarianceMatrix(gamma, tags, band)


def outcome_covariance(state: CovarianceMatrix | np.ndarray) -> np.ndarray:
    """Covariance of heterodyne outcomes, (Gamma + I) / 2, in quadrature units."""
    gamma = state.matrix if isinstance(state, CovarianceMatrix) else np.asarray(state, dtype=float)
    return 0.5 * (gamma + np.eye(gamma.shape[0]))


@dataclass(frozen=True, eq=False)
class LambdaMatrix:
    """Complex m x m matrix with spectral norm strictly below 1."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.atleast_2d(np.array(self.matrix, dtype=complex))
        if m.shape[0] != m.shape[1]:
            raise ParameterError(f"Lambda must be square, got {m.shape}")
        norm = np.linalg.norm(m, 2)
        if not norm < 1.0 - LAMBDA_MARGIN:
            raise ParameterError(f"Lambda must have spectral norm < 1, got {norm}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def su_mm_coherent_state(
    lam: LambdaMatrix | np.ndarray,
    tags_a: Sequence[ModeTag] | None = None,
    tags_b: Sequence[ModeTag] | None = None,
) -> CovarianceMatrix:
    """Covariance matrix of the SU(m,m) coherent state |Lambda> on 2m modes.

    |Lambda> is proportional to exp(sum_ij Lambda_ij a_i^dag b_j^dag)|0>.
    Modes are ordered a_1..a_m, b_1..b_m. Writing Lambda = W diag(l) Vh
    (numpy SVD), the exponent becomes sum_k l_k c_k^dag d_k^dag with
    a = W c and b = Vh^T d, so the state is a product of TMSS pairs of
    variance (1 + l^2) / (1 - l^2) followed by those passive maps.
    """
    if not isinstance(lam, LambdaMatrix):
        lam = LambdaMatrix(lam)
    m = lam.size
    tags_a = tuple(tags_a) if tags_a is not None else (ModeTag.U,) * m
    tags_b = tuple(tags_b) if tags_b is not None else (ModeTag.UBAR,) * m
    w, s, vh = np.linalg.svd(lam.matrix)
    variances = (1.0 + s**2) / (1.0 - s**2)
    pairs = direct_sum(*(tmss(v) for v in variances))
    # pairs are (c1, d1, c2, d2, ...); regroup as (c1..cm, d1..dm)
    core = pairs.reorder([2 * k for k in range(m)] + [2 * k + 1 for k in range(m)]).matrix
    passive = block_diag(_complex_to_real(w), _complex_to_real(vh.T))
    return CovarianceMatrix(passive @ core @ passive.T, tags_a + tags_b)
