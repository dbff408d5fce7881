"""Monte-Carlo model of the heterodyne and parameter-estimation stage.

Heterodyning every mode of a zero-mean Gaussian state with covariance
Gamma gives real quadrature outcomes that are Gaussian with covariance
(Gamma + I) / 2. The simulator draws such outcomes, forms their empirical
(Gram) covariance and checks it against an acceptance region.

The acceptance region is a Frobenius ball around the expected outcome
covariance. It is a stand-in for a finite-size test, not a security proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import GaussQKDError, ParameterError
from .keyrate import _gaussian_mi
from .protocols import ProtocolState
from .states import CovarianceMatrix, outcome_covariance

# multiples of the RMS Frobenius fluctuation used by `calibrated_radius`
DEFAULT_RADIUS_FACTOR = 6.0

CSV_HEADER = "seed,n,pass,max_deviation,frobenius_deviation"


def _as_outcome_covariance(state) -> np.ndarray:
    if isinstance(state, ProtocolState):
        state = state.gamma
    if isinstance(state, CovarianceMatrix):
        return outcome_covariance(state)
    raise TypeError("expected a ProtocolState or CovarianceMatrix")


def sample_outcomes(state: ProtocolState | CovarianceMatrix, n: int, seed: int | None = 0) -> np.ndarray:
    """n i.i.d. heterodyne outcome vectors, shape (n, 2d).

    Draws Z ~ N(0, I) and returns Z L^T with L the Cholesky factor of
    (Gamma + I) / 2. The result is a deterministic function of `seed`.
    """
    if n < 1:
        raise ParameterError(f"need at least one round, got {n}")
    cov = _as_outcome_covariance(state)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:  # (Gamma + I)/2 >= I/2 for any physical state
        raise GaussQKDError("outcome covariance is not positive definite") from exc
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, cov.shape[0]))
    return z @ chol.T


def empirical_covariance(samples: np.ndarray) -> np.ndarray:
    """Zero-mean Gram estimate X^T X / n (no mean subtraction)."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2:
        raise ParameterError("samples must be a 2-D array (rounds x quadratures)")
    n = x.shape[0]
    if n < 2:
        raise ParameterError(f"need at least two rounds, got {n}")
    cov = x.T @ x / n
    # exact symmetry, independent of BLAS summation order
    return 0.5 * (cov + cov.T)


def standard_errors(reference: np.ndarray, n: int) -> np.ndarray:
    """Entrywise standard error of the zero-mean estimator for a Gaussian.

    Var(Sigma_hat_ij) = (Sigma_ii Sigma_jj + Sigma_ij^2) / n.
    """
    ref = np.asarray(reference, dtype=float)
    d = np.diag(ref)
    return np.sqrt((np.outer(d, d) + ref**2) / n)


def calibrated_radius(reference: np.ndarray, n: int, k: float = DEFAULT_RADIUS_FACTOR) -> float:
    """k times the RMS Frobenius deviation of the estimator at n rounds.

    Summing the entry variances gives
    E ||Sigma_hat - Sigma||_F^2 = ((tr Sigma)^2 + ||Sigma||_F^2) / n.
    """
    if n < 1:
        raise ParameterError(f"need at least one round, got {n}")
    ref = np.asarray(reference, dtype=float)
    return float(k * math.sqrt((np.trace(ref) ** 2 + np.sum(ref**2)) / n))


@dataclass(frozen=True, eq=False)
class TestRegion:
    """Frobenius ball {Sigma : ||Sigma - reference||_F <= radius}.

    A radius of zero is allowed and accepts nothing in practice.
    """

    __test__ = False  # not a pytest class

    reference: np.ndarray
    radius: float

    def __post_init__(self):
        ref = np.array(self.reference, dtype=float)
        if ref.ndim != 2 or ref.shape[0] != ref.shape[1]:
            raise ParameterError("reference must be a square matrix")
        if not np.allclose(ref, ref.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(ref).max())):
            raise ParameterError("reference must be symmetric")
        if np.linalg.eigvalsh(ref).min() <= 0.0:
            raise ParameterError("reference must be positive definite")
        if not self.radius >= 0.0:
            raise ParameterError(f"radius must be non-negative, got {self.radius}")
        ref.setflags(write=False)
        object.__setattr__(self, "reference", ref)

    @classmethod
    def for_state(
        cls, state: ProtocolState | CovarianceMatrix, n: int, k: float = DEFAULT_RADIUS_FACTOR
    ) -> TestRegion:
        ref = _as_outcome_covariance(state)
        return cls(ref, calibrated_radius(ref, n, k))


@dataclass(frozen=True, eq=False)
class RunRecord:
    seed: int | None
    n_rounds: int
    empirical_covariance: np.ndarray
    test_passed: bool
    max_entry_deviation: float
    frobenius_deviation: float

    def csv_row(self) -> str:
        seed = "" if self.seed is None else str(self.seed)
        return (
            f"{seed},{self.n_rounds},{int(self.test_passed)},"
            f"{self.max_entry_deviation:.12g},{self.frobenius_deviation:.12g}"
        )


def run_test(samples: np.ndarray, region: TestRegion, seed: int | None = None) -> RunRecord:
    """Accept iff the empirical covariance lies in `region`.

    `seed` is only recorded, so the row can be traced to the sampler run.
    """
    emp = empirical_covariance(samples)
    if emp.shape != region.reference.shape:
        raise ParameterError(f"samples have {emp.shape[0]} quadratures, region expects {region.reference.shape[0]}")
    diff = emp - region.reference
    frob = float(np.linalg.norm(diff))
    return RunRecord(
        seed=seed,
        n_rounds=int(np.asarray(samples).shape[0]),
        empirical_covariance=emp,
        test_passed=frob <= region.radius,
        max_entry_deviation=float(np.abs(diff).max()),
        frobenius_deviation=frob,
    )


def empirical_mutual_information(samples: np.ndarray, key_cols, witness_cols) -> float:
    """Gaussian mutual information (bits) between two column sets of the samples.

    Uses the log-determinant formula on the empirical covariance, so it is
    the plug-in estimate under the Gaussian assumption.
    """
    key = [int(c) for c in np.atleast_1d(key_cols)]
    wit = [int(c) for c in np.atleast_1d(witness_cols)]
    if not key or not wit or set(key) & set(wit):
        raise ParameterError("key and witness columns must be nonempty and disjoint")
    cov = empirical_covariance(samples)
    sub = cov[np.ix_(key + wit, key + wit)]
    if np.linalg.eigvalsh(sub).min() <= 0.0:
        raise GaussQKDError("empirical covariance is singular on the selected columns")
    return _gaussian_mi(cov, key, wit)
