"""Thermal bosonic channel parametrized by transmittance and excess noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError
from .states import CovarianceMatrix


@dataclass(frozen=True)
class ChannelParams:
    """Transmittance tau in [0, 1] and excess noise xi >= 0 (shot-noise units, input-referred)."""

    tau: float
    xi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ParameterError(f"channel transmittance must lie in [0, 1], got {self.tau}")
        if not self.xi >= 0.0:
            raise ParameterError(f"excess noise must be >= 0, got {self.xi}")

    @property
    def output_noise(self) -> float:
        """Variance added to the attenuated mode: 1 - tau + tau xi."""
        return 1.0 - self.tau + self.tau * self.xi


IDENTITY_CHANNEL = ChannelParams(1.0, 0.0)


def apply_channel(
    state: CovarianceMatrix, mode: int, channel: ChannelParams, check: bool = True
) -> CovarianceMatrix:
    """Send `mode` through the channel: Gamma -> X Gamma X^T + Y.

    X scales mode `mode` by sqrt(tau); Y adds (1 - tau + tau xi) I on its
    diagonal block. A mode of variance V leaves with tau (V - 1 + xi) + 1.
    """
    d = state.num_modes
    if not 0 <= mode < d:
        raise ParameterError(f"mode index {mode} out of range for {d} modes")
    scale = np.ones(2 * d)
    scale[2 * mode : 2 * mode + 2] = np.sqrt(channel.tau)
    gamma = state.matrix * np.outer(scale, scale)
    gamma[2 * mode, 2 * mode] += channel.output_noise
    gamma[2 * mode + 1, 2 * mode + 1] += channel.output_noise
    if not check:
        return CovarianceMatrix._unchecked(gamma, state.mode_tags)
    return CovarianceMatrix(gamma, state.mode_tags)
