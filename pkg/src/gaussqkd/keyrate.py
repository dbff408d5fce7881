"""Asymptotic secret key rates of the two-way and one-way protocols.

Rates follow the Devetak-Winter bound with reverse-direction raw key X2
(Alice's heterodyne outcome on A2) and Bob's outcomes on B1, B2 as side
information. All logarithms are base 2, so rates are in bits per channel use.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .channels import ChannelParams
from .exceptions import GaussQKDError, ParameterError
from .protocols import ProtocolState, TwoWayParams, build_one_way, build_two_way
from .states import CovarianceMatrix, heterodyne_condition, outcome_covariance

# raw rates at or below this count as zero when locating thresholds
RATE_FLOOR = 1e-12


def g_entropy(x):
    """Von Neumann entropy (bits) of a thermal mode with symplectic eigenvalue x.

    g(x) = (x+1)/2 log2((x+1)/2) - (x-1)/2 log2((x-1)/2), with g(1) = 0.
    Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 1.0) or np.any(np.isnan(x)):
        raise ParameterError("g_entropy is defined for x >= 1 only")
    plus = (x + 1.0) / 2.0
    minus = (x - 1.0) / 2.0
    safe = np.where(minus > 0, minus, 1.0)
    out = plus * np.log2(plus) - np.where(minus > 0, minus * np.log2(safe), 0.0)
    return float(out) if out.ndim == 0 else out


def _gaussian_mi(cov: np.ndarray, first: list[int], second: list[int]) -> float:
    """Mutual information (bits) between two blocks of a real Gaussian vector.

    Half the log-ratio of determinants of the real quadrature covariances,
    which equals the log-ratio of the per-mode (complex) determinants.
    """
    both = first + second
    _, la = np.linalg.slogdet(cov[np.ix_(first, first)])
    _, lb = np.linalg.slogdet(cov[np.ix_(second, second)])
    _, lab = np.linalg.slogdet(cov[np.ix_(both, both)])
    return 0.5 * (la + lb - lab) / math.log(2.0)


def _quads(modes):
    return [q for m in modes for q in (2 * m, 2 * m + 1)]


def _y1_rescale(v_b: float) -> float:
    return math.sqrt(2.0 * (v_b - 1.0) / (v_b + 1.0))


def mutual_information(state: ProtocolState) -> float:
    """I(X2; (Y1', Y2)) in bits from the heterodyne outcome covariance.

    Y1 (Bob's outcome on B1) is rescaled by sqrt(2(V_B-1)/(V_B+1)) to estimate
    his other TMSS arm; this cannot change I. At V_B = 1 the factor is zero
    and Y1, which then carries no signal, is dropped.
    """
    if state.raw_key_mode is None:
        raise ParameterError("state defines no raw key")
    cov = outcome_covariance(state.gamma)
    witnesses = list(state.witness_modes)
    if "B1" in witnesses and isinstance(state.params, TwoWayParams):
        factor = _y1_rescale(state.params.V_B)
        b1 = state.index("B1")
        if factor == 0.0:
            witnesses.remove("B1")
        else:
            scale = np.ones(cov.shape[0])
            scale[2 * b1 : 2 * b1 + 2] = factor
            cov = cov * np.outer(scale, scale)
    if not witnesses:
        return 0.0
    key = _quads([state.index(state.raw_key_mode)])
    side = _quads([state.index(w) for w in witnesses])
    return max(_gaussian_mi(cov, key, side), 0.0)


def _holevo_parts(gamma: CovarianceMatrix, measured: int):
    full = gamma.symplectic_eigenvalues()
    cond = heterodyne_condition(gamma, [measured]).symplectic_eigenvalues()
    return float(np.sum(g_entropy(full)) - np.sum(g_entropy(cond))), full, cond


def holevo_information(gamma: CovarianceMatrix, measured: int) -> float:
    """Holevo information (bits) between the heterodyne outcome on one mode and a purifying Eve.

    S(all modes) - S(remaining modes | outcome), the second term being
    independent of the outcome value.
    """
    return _holevo_parts(gamma, measured)[0]


def holevo_x2_E(state: ProtocolState) -> float:
    """chi(X2; E) = S(A1 A2 B2 B1) - S(A1 B2 B1 | X2), Eve purifying the global state."""
    if state.raw_key_mode is None:
        raise ParameterError("state defines no raw key")
    return holevo_information(state.gamma, state.index(state.raw_key_mode))


@dataclass(frozen=True)
class KeyRateReport:
    key_rate: float
    mutual_info: float
    holevo: float
    symplectic_spectrum_full: tuple[float, ...]
    symplectic_spectrum_conditional: tuple[float, ...]
    params_used: TwoWayParams
    channel_forward: ChannelParams
    channel_backward: ChannelParams
    # per channel use, before clamping at zero
    raw_rate: float

    @property
    def channel(self) -> ChannelParams:
        return self.channel_backward


def key_rate(state: ProtocolState, beta: float | None = None) -> KeyRateReport:
    """Devetak-Winter rate (beta I - chi) / channel_uses, clamped at zero.

    Two-way states use two channels per round; the one-way corner uses one.
    """
    if state.raw_key_mode is None:
        raise ParameterError("state defines no raw key")
    if beta is None:
        beta = state.params.beta
    if not 0.0 < beta <= 1.0:
        raise ParameterError(f"reconciliation efficiency must lie in (0, 1], got {beta}")
    info = mutual_information(state)
    chi, full, cond = _holevo_parts(state.gamma, state.index(state.raw_key_mode))
    raw = (beta * info - chi) / state.channel_uses
    return KeyRateReport(
        key_rate=max(raw, 0.0),
        mutual_info=info,
        holevo=chi,
        symplectic_spectrum_full=tuple(full),
        symplectic_spectrum_conditional=tuple(cond),
        params_used=replace(state.params, beta=beta),
        channel_forward=state.channel_forward,
        channel_backward=state.channel_backward,
        raw_rate=raw,
    )


# ---------------------------------------------------------------- optimization

PARAM_NAMES = ("V_A", "V_B", "T", "g")
# log(V - 1) and log(g - 1) never go below this (V, g within 1e-5 of 1)
LOG_FLOOR = math.log(1e-5)


@dataclass(frozen=True)
class Bounds:
    V_max: float = 100.0
    g_max: float = 20.0
    T_min: float = 0.0
    T_max: float = 1.0

    def __post_init__(self):
        if not self.V_max > 1.0 + 1e-5 or not self.g_max > 1.0 + 1e-5:
            raise ParameterError("V_max and g_max must exceed 1")
        if not 0.0 <= self.T_min <= self.T_max <= 1.0:
            raise ParameterError("need 0 <= T_min <= T_max <= 1")

    def box(self, name: str) -> tuple[float, float]:
        """Search interval of a parameter in optimizer coordinates."""
        if name in ("V_A", "V_B"):
            return LOG_FLOOR, math.log(self.V_max - 1.0)
        if name == "g":
            return LOG_FLOOR, math.log(self.g_max - 1.0)
        return self.T_min, self.T_max

    def contains(self, p: TwoWayParams, tol: float = 1e-9) -> bool:
        return (
            p.V_A <= self.V_max * (1 + tol)
            and p.V_B <= self.V_max * (1 + tol)
            and p.g <= self.g_max * (1 + tol)
            and self.T_min - tol <= p.T <= self.T_max + tol
        )


def _to_param(name: str, u: float) -> float:
    return u if name == "T" else 1.0 + math.exp(u)


def _to_coord(name: str, value: float) -> float:
    return value if name == "T" else math.log(max(value - 1.0, math.exp(LOG_FLOOR)))


@dataclass(frozen=True)
class OptimizationResult:
    params: TwoWayParams
    report: KeyRateReport
    evaluations: int
    budget_exhausted: bool


class _Objective:
    """Raw key rate as a function of optimizer coordinates, with an evaluation counter."""

    def __init__(self, build: Callable[[dict], ProtocolState], names, fixed, beta):
        self.build = build
        self.names = names
        self.fixed = fixed
        self.beta = beta
        self.calls = 0

    def params(self, x) -> dict:
        values = dict(self.fixed)
        for name, u in zip(self.names, np.atleast_1d(x)):
            values[name] = _to_param(name, float(u))
        return values

    def __call__(self, x) -> float:
        self.calls += 1
        try:
            return key_rate(self.build(self.params(x)), self.beta).raw_rate
        except GaussQKDError:
            # numerically unphysical corner; treat as useless
            return -1e6


def optimize_rate(
    ch_forward: ChannelParams,
    ch_backward: ChannelParams | None = None,
    beta: float = 1.0,
    bounds: Bounds | None = None,
    budget: int = 10_000,
    protocol: str = "two-way",
    fixed: Mapping[str, float] | None = None,
    seed: int = 0,
    initial: TwoWayParams | None = None,
) -> OptimizationResult:
    """Maximize the key rate over the free circuit parameters.

    Two-way: V_A, V_B, T, g (any subset can be pinned through `fixed`).
    One-way: V_B only, with `ch_backward` (or `ch_forward`) as the channel.
    A coarse grid (3 points per free parameter, plus a few seeded random
    points and `initial`) seeds bounded Nelder-Mead runs from the best
    starts; a single free parameter gets a dense grid and Brent refinement.
    Deterministic for a given seed.
    """
    bounds = bounds or Bounds()
    fixed = dict(fixed or {})
    unknown = set(fixed) - set(PARAM_NAMES)
    if unknown:
        raise ParameterError(f"unknown parameters {sorted(unknown)}")
    if budget < 1:
        raise ParameterError("budget must be positive")

    if protocol == "two-way":
        ch_backward = ch_backward or ch_forward

        def build(v):
            return build_two_way(TwoWayParams(v["V_A"], v["V_B"], v["T"], v["g"], beta), ch_forward, ch_backward)

        names = [n for n in PARAM_NAMES if n not in fixed]
    elif protocol == "one-way":
        channel = ch_backward or ch_forward
        extra = set(fixed) - {"V_B"}
        if extra:
            raise ParameterError(f"one-way protocol has no parameters {sorted(extra)}")

        def build(v):
            return build_one_way(v["V_B"], channel, beta)

        names = [n for n in ("V_B",) if n not in fixed]
    else:
        raise ParameterError(f"unknown protocol {protocol!r}")

    objective = _Objective(build, names, fixed, beta)
    exhausted = False
    if not names:
        best_x = np.array([])
    elif len(names) == 1:
        best_x, exhausted = _search_1d(objective, bounds.box(names[0]), budget, initial, names[0])
    else:
        best_x, exhausted = _search_nd(objective, [bounds.box(n) for n in names], budget, seed, initial)

    values = objective.params(best_x)
    state = build(values)
    report = key_rate(state, beta)
    return OptimizationResult(report.params_used, report, objective.calls + 1, exhausted)


def _better(a: tuple[float, np.ndarray], b: tuple[float, np.ndarray] | None) -> bool:
    # deterministic argmax: larger rate, ties broken lexicographically on coordinates
    if b is None or a[0] > b[0]:
        return True
    return a[0] == b[0] and tuple(a[1]) < tuple(b[1])


def _search_1d(objective, box, budget, initial, name):
    lo, hi = box
    n_grid = int(min(max(budget // 2, 1), 61))
    grid = np.linspace(lo, hi, n_grid)
    points = list(grid)
    if initial is not None:
        points.append(float(np.clip(_to_coord(name, getattr(initial, name)), lo, hi)))
    best = None
    for u in points:
        cand = (objective(np.array([u])), np.array([u]))
        if _better(cand, best):
            best = cand
    remaining = budget - objective.calls
    if remaining <= 0 or n_grid < 3:
        return best[1], remaining <= 0
    k = int(np.argmin(np.abs(grid - best[1][0])))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, n_grid - 1)]
    res = minimize_scalar(
        lambda u: -objective(np.array([u])),
        bounds=(a, b),
        method="bounded",
        options={"maxiter": remaining, "xatol": 1e-10},
    )
    cand = (-float(res.fun), np.array([float(res.x)]))
    if _better(cand, best):
        best = cand
    return best[1], not res.success


def _search_nd(objective, boxes, budget, seed, initial, n_refine=4, n_random=8):
    lows = np.array([b[0] for b in boxes])
    highs = np.array([b[1] for b in boxes])
    axes = []
    for lo, hi in boxes:
        if lo >= 0.0 and hi <= 1.0:
            axes.append(lo + (hi - lo) * np.array([0.1, 0.5, 0.9]))
        else:
            # log-coordinates: near 1, middle, near the cap
            axes.append(np.array([max(lo, -2.0), 0.5 * (max(lo, -2.0) + hi), hi - 0.05 * (hi - lo)]))
    starts = [np.array(p) for p in itertools.product(*axes)]
    rng = np.random.default_rng(seed)
    starts += [lows + (highs - lows) * rng.random(len(boxes)) for _ in range(n_random)]
    if initial is not None:
        starts.append(
            np.clip(
                np.array([_to_coord(n, getattr(initial, n)) for n in objective.names]),
                lows,
                highs,
            )
        )
    scored = [(objective(x), x) for x in starts]
    scored.sort(key=lambda c: (-c[0], tuple(c[1])))
    best = scored[0]
    exhausted = objective.calls >= budget
    chosen = scored[:n_refine]
    for i, (_, x0) in enumerate(chosen):
        remaining = budget - objective.calls
        if remaining <= 0:
            exhausted = True
            break
        share = remaining // (len(chosen) - i)
        res = minimize(
            lambda x: -objective(x),
            x0,
            method="Nelder-Mead",
            bounds=list(zip(lows, highs)),
            options={"maxfev": max(share, 1), "xatol": 1e-9, "fatol": 1e-13, "adaptive": True},
        )
        if res.nfev >= share:
            exhausted = True
        cand = (-float(res.fun), np.clip(res.x, lows, highs))
        if _better(cand, best):
            best = cand
    return best[1], exhausted


@dataclass(frozen=True)
class ThresholdResult:
    xi_max: float
    # False when the optimized rate is already zero at xi = 0
    positive_at_zero: bool
    evaluations: int


def noise_threshold(
    tau: float,
    beta: float = 1.0,
    bounds: Bounds | None = None,
    tol: float = 1e-3,
    protocol: str = "two-way",
    budget: int = 3_000,
    seed: int = 0,
    xi_cap: float = 64.0,
) -> ThresholdResult:
    """Largest excess noise (within `tol`) at which the optimized key rate is positive.

    Bisection on xi with the same (tau, xi) channel in both directions. Each
    probe re-optimizes the protocol, warm-started from the previous optimum.
    """
    if not 0.0 < tau <= 1.0:
        raise ParameterError(f"tau must lie in (0, 1], got {tau}")
    if not tol > 0:
        raise ParameterError("tolerance must be positive")
    evaluations = 0
    warm: dict[str, TwoWayParams | None] = {"p": None}

    def positive(xi: float) -> bool:
        nonlocal evaluations
        ch = ChannelParams(tau, xi)
        res = optimize_rate(ch, ch, beta, bounds, budget, protocol, seed=seed, initial=warm["p"])
        evaluations += res.evaluations
        if res.report.raw_rate > RATE_FLOOR:
            warm["p"] = res.params
            return True
        return False

    if not positive(0.0):
        return ThresholdResult(0.0, False, evaluations)
    lo, hi = 0.0, min(1.0, xi_cap)
    while positive(hi):
        lo = hi
        if hi >= xi_cap:
            return ThresholdResult(hi, True, evaluations)
        hi = min(2.0 * hi, xi_cap)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if positive(mid):
            lo = mid
        else:
            hi = mid
    return ThresholdResult(lo, True, evaluations)
