"""Entanglement-based circuits of the two-way, one-way and floodlight protocols.

Each builder propagates covariance matrices through the optical circuit and
returns a `ProtocolState` holding the pre-measurement state of the honest
parties, named modes and the U(n) tag of each mode.

MDI CV QKD needs no builder of its own: once Charlie's Bell measurement is
announced and the displacements are applied, Alice and Bob share a two-mode
state exactly as in the one-way no-switching protocol, so `build_one_way`
covers it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .channels import IDENTITY_CHANNEL, ChannelParams, apply_channel
from .exceptions import ParameterError
from .states import CovarianceMatrix, apply, direct_sum, tmss, vacuum
from .symplectic import ModeTag, beamsplitter, phase_rotation, two_mode_squeezer

U, UBAR = ModeTag.U, ModeTag.UBAR

TWO_WAY_MODES = ("A1", "A2", "B2", "B1")
TWO_WAY_TAGS = (U, UBAR, UBAR, U)
FLOODLIGHT_MODES = ("A1", "A2", "A3", "B1", "B2", "B3")
FLOODLIGHT_TAGS = (U, UBAR, UBAR, U, UBAR, U)


@dataclass(frozen=True)
class TwoWayParams:
    """Tunable parameters of the two-way circuit.

    V_A, V_B are the TMSS variances of Alice and Bob, T the transmittance of
    Bob's displacement beamsplitter, g the gain of Alice's final squeezer
    and beta the reconciliation efficiency.
    """

    V_A: float
    V_B: float
    T: float
    g: float
    beta: float = 1.0

    def __post_init__(self):
        if not self.V_A >= 1.0 or not self.V_B >= 1.0:
            raise ParameterError(f"TMSS variances must be >= 1, got V_A={self.V_A}, V_B={self.V_B}")
        if not 0.0 <= self.T <= 1.0:
            raise ParameterError(f"beamsplitter transmittance must lie in [0, 1], got {self.T}")
        if not self.g >= 1.0:
            raise ParameterError(f"squeezer gain must be >= 1, got {self.g}")
        if not 0.0 < self.beta <= 1.0:
            raise ParameterError(f"reconciliation efficiency must lie in (0, 1], got {self.beta}")


@dataclass(frozen=True)
class FloodlightParams:
    """Free parameters of the Gaussian floodlight circuit.

    The defaults are illustrative only; no reference operating point exists.
    """

    V_A: float = 5.0
    V_B: float = 3.0
    T_A: float = 0.2
    T_B: float = 0.8
    g_B: float = 2.0

    def __post_init__(self):
        if not self.V_A >= 1.0 or not self.V_B >= 1.0:
            raise ParameterError("TMSS variances must be >= 1")
        if not (0.0 <= self.T_A <= 1.0 and 0.0 <= self.T_B <= 1.0):
            raise ParameterError("beamsplitter transmittances must lie in [0, 1]")
        if not self.g_B >= 1.0:
            raise ParameterError(f"amplifier gain must be >= 1, got {self.g_B}")


@dataclass(frozen=True, eq=False)
class ProtocolState:
    gamma: CovarianceMatrix
    mode_names: tuple[str, ...]
    params: Union[TwoWayParams, FloodlightParams]
    channel_forward: ChannelParams
    channel_backward: ChannelParams
    raw_key_mode: str | None = None
    witness_modes: tuple[str, ...] = ()
    # key rate is reported per channel use
    channel_uses: int = 2

    def __post_init__(self):
        if len(self.mode_names) != self.gamma.num_modes:
            raise ParameterError("one name per mode is required")
        for name in (self.raw_key_mode, *self.witness_modes):
            if name is not None and name not in self.mode_names:
                raise ParameterError(f"unknown mode {name!r}")

    def index(self, name: str) -> int:
        return self.mode_names.index(name)

    @property
    def mode_tags(self) -> tuple[ModeTag, ...]:
        return self.gamma.mode_tags

    def with_gamma(self, gamma: CovarianceMatrix) -> ProtocolState:
        return ProtocolState(
            gamma,
            self.mode_names,
            self.params,
            self.channel_forward,
            self.channel_backward,
            self.raw_key_mode,
            self.witness_modes,
            self.channel_uses,
        )


def alice_squeezer(g: float, modes: tuple[int, int], num_modes: int):
    """Two-mode squeezer with off-diagonal blocks -sqrt(g-1) Z.

    Equal to the generic squeezer sandwiched between pi phase shifts on the
    second mode; this is the sign used to combine Alice's two modes.
    """
    flip = phase_rotation(3.141592653589793, modes[1], num_modes)
    return flip @ two_mode_squeezer(g, modes, num_modes) @ flip


def two_way_covariance(
    params: TwoWayParams,
    ch_forward: ChannelParams,
    ch_backward: ChannelParams,
) -> CovarianceMatrix:
    # working order: A1'' , A1' -> C1 -> C2 -> C2', B1, B1' -> B2
    state = direct_sum(
        tmss(params.V_A, (U, UBAR)),
        tmss(params.V_B, (U, UBAR)),
        check=False,
    )
    state = apply_channel(state, 1, ch_forward, check=False)
    # C2 = sqrt(T) C1 + sqrt(1-T) B1',  B2 = sqrt(T) B1' - sqrt(1-T) C1
    state = apply(beamsplitter(params.T, (3, 1), 4), state, check=False)
    state = apply_channel(state, 1, ch_backward, check=False)
    state = apply(alice_squeezer(params.g, (0, 1), 4), state, check=False)
    return state.reorder([0, 1, 3, 2])


def build_two_way(
    params: TwoWayParams,
    ch_forward: ChannelParams,
    ch_backward: ChannelParams | None = None,
) -> ProtocolState:
    """Pre-measurement state of the two-way protocol on modes (A1, A2, B2, B1).

    Alice's outcome on A2 is the raw key; Bob's outcomes on B1 and B2 are
    used to guess it. Two channel uses per round.
    """
    if ch_backward is None:
        ch_backward = ch_forward
    gamma = two_way_covariance(params, ch_forward, ch_backward)
    return ProtocolState(
        gamma,
        TWO_WAY_MODES,
        params,
        ch_forward,
        ch_backward,
        raw_key_mode="A2",
        witness_modes=("B1", "B2"),
        channel_uses=2,
    )


def build_one_way(V_B: float, channel: ChannelParams, beta: float = 1.0) -> ProtocolState:
    """No-switching one-way protocol as the V_A = 1, T = 0, g = 1 corner of the two-way circuit.

    Bob's TMSS mode goes to Alice through `channel` and Alice's heterodyne
    outcome is the raw key (reverse reconciliation). Alice's idle mode A1
    and Bob's B2 stay in vacuum. One channel use per round.
    """
    params = TwoWayParams(1.0, V_B, 0.0, 1.0, beta)
    gamma = two_way_covariance(params, IDENTITY_CHANNEL, channel)
    return ProtocolState(
        gamma,
        TWO_WAY_MODES,
        params,
        IDENTITY_CHANNEL,
        channel,
        raw_key_mode="A2",
        witness_modes=("B1", "B2"),
        channel_uses=1,
    )


def build_floodlight(
    params: FloodlightParams,
    ch_forward: ChannelParams,
    ch_backward: ChannelParams | None = None,
) -> ProtocolState:
    """Per-round state of the Gaussian floodlight circuit.

    Alice attenuates one arm of her TMSS on a beamsplitter (transmittance
    T_A, dump port kept as A3) and sends it; Bob displaces it with one arm
    of his TMSS on a beamsplitter (T_B, other output kept as B2), amplifies
    it with a two-mode squeezer of gain g_B (idler kept as B3) and returns
    it to Alice, who keeps it as A2. Modes are (A1, A2, A3, B1, B2, B3).
    No raw key is defined for this circuit.
    """
    if ch_backward is None:
        ch_backward = ch_forward
    # working order: A1, signal, A3, B1, B1' -> B2, B3
    state = direct_sum(
        tmss(params.V_A, (U, UBAR)),
        vacuum(1, (UBAR,)),
        tmss(params.V_B, (U, UBAR)),
        vacuum(1, (U,)),
        check=False,
    )
    state = apply(beamsplitter(params.T_A, (1, 2), 6), state, check=False)
    state = apply_channel(state, 1, ch_forward, check=False)
    state = apply(beamsplitter(params.T_B, (4, 1), 6), state, check=False)
    state = apply(two_mode_squeezer(params.g_B, (1, 5), 6), state, check=False)
    state = apply_channel(state, 1, ch_backward)
    return ProtocolState(
        state,
        FLOODLIGHT_MODES,
        params,
        ch_forward,
        ch_backward,
        channel_uses=2,
    )
