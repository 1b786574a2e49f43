"""Constant-velocity state propagation over a prediction window."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sensing import ObjectState, StateEstimate


@dataclass(frozen=True)
class PredictionParams:
    """Prediction window layout and process-noise growth coefficients."""

    horizon: float = 1.0          # window length T_p, s
    step: float = 0.1             # sampling interval T_s, s
    q_pos: float = 0.5            # position noise growth, m^2/s^3
    q_vel: float = 0.5            # velocity noise growth, m^2/s^3

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be > 0")
        if not (0 < self.step <= self.horizon):
            raise ValueError("step must be in (0, horizon]")
        if self.q_pos < 0 or self.q_vel < 0:
            raise ValueError("noise coefficients must be >= 0")

    @property
    def n_samples(self) -> int:
        n = self.horizon / self.step
        if abs(n - round(n)) > 1e-9:
            raise ValueError(
                f"horizon {self.horizon} is not an integer multiple of step {self.step}")
        return int(round(n))


@dataclass(frozen=True)
class PredictedTrajectory:
    """Per-epoch predicted beliefs at offsets {0, T_s, ..., (N_s-1) T_s}."""

    epochs: tuple[float, ...]
    states: tuple[StateEstimate, ...]

    def __post_init__(self):
        if len(self.epochs) != len(self.states):
            raise ValueError("epochs and states length mismatch")
        if any(b <= a for a, b in zip(self.epochs, self.epochs[1:])):
            raise ValueError("epochs must be strictly increasing")


def transition_matrix(t: float) -> np.ndarray:
    """Constant-velocity transition over a lookahead of t seconds."""
    if t < 0:
        raise ValueError("lookahead must be >= 0")
    out = np.eye(4)
    out[0, 2] = t
    out[1, 3] = t
    return out


def process_noise(t: float, q_pos: float, q_vel: float) -> np.ndarray:
    """White-noise-acceleration covariance accumulated over t seconds."""
    q = np.zeros((4, 4))
    q[0, 0] = q[1, 1] = q_pos * t**3 / 3.0
    q[2, 2] = q[3, 3] = q_vel * t
    q[0, 2] = q[2, 0] = q[1, 3] = q[3, 1] = q_pos * t**2 / 2.0
    return q


def predict(est: StateEstimate, t: float, p: PredictionParams) -> StateEstimate:
    """Propagate a belief t seconds ahead under the constant-velocity model."""
    if not (0.0 <= t <= p.horizon):
        raise ValueError(f"lookahead {t} outside window [0, {p.horizon}]")
    if t == 0.0:
        return est
    trans = transition_matrix(t)
    mean = trans @ est.mean.as_vector()
    cov = trans @ est.covariance @ trans.T + process_noise(t, p.q_pos, p.q_vel)
    cov = 0.5 * (cov + cov.T)
    return StateEstimate(ObjectState.from_vector(mean), cov)


def predict_window(est: StateEstimate, p: PredictionParams) -> PredictedTrajectory:
    """Predicted beliefs at every sampling epoch of the window."""
    epochs = tuple(n * p.step for n in range(p.n_samples))
    states = tuple(predict(est, t, p) for t in epochs)
    return PredictedTrajectory(epochs=epochs, states=states)
