"""Projection backends: frames -> latent trajectory.

Real projection (encoder- or optimization-based inversion, optionally with a
generator fine-tune) runs upstream of this toolkit; sessions consume it
through this interface. The synthetic projector echoes a known trajectory so
latent-space sessions are exactly reproducible.
"""

from __future__ import annotations

from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .container import load_trajectory
from .errors import ValidationError
from .types import LatentTrajectory


@runtime_checkable
class ProjectorBackend(Protocol):
    name: str

    def project(self, frames: Sequence[np.ndarray], fps: float) -> LatentTrajectory: ...


class SyntheticProjector:
    """Returns the pre-committed codes for whatever frames are offered.

    Stands in for a real inverter in tests: the session's frames are renders
    of known codes, and projecting them yields exactly those codes.
    """

    name = "synthetic"

    def __init__(self, trajectory: LatentTrajectory | str):
        if isinstance(trajectory, str):
            trajectory = load_trajectory(trajectory)
        self.trajectory = trajectory

    def project(self, frames: Sequence[np.ndarray], fps: float) -> LatentTrajectory:
        if len(frames) != self.trajectory.frame_count:
            raise ValidationError(
                f"projector holds {self.trajectory.frame_count} codes "
                f"but received {len(frames)} frames"
            )
        return self.trajectory


def make_projector(name: str, **kwargs) -> ProjectorBackend:
    if name == "synthetic":
        return SyntheticProjector(**kwargs)
    raise ValidationError(f"unknown projector backend {name!r}")
