"""Desk-scale robot stand-in: integrates joint-rate commands and derives
contact flags from foot heights."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .model import RobotParams


def integrate_joints(q: np.ndarray, rates: np.ndarray, Ts: float) -> np.ndarray:
    return q + Ts * rates


def detect_contacts(of: np.ndarray, threshold: float) -> np.ndarray:
    """``sigma_i = 1`` iff the contact point height is at most ``threshold``."""
    return (np.asarray(of)[:, 2] <= threshold).astype(int)


class Plant:
    """Joint-level plant. ``perturb(tick, q)`` may return additive joint noise;
    it is off unless supplied."""

    def __init__(self, params: RobotParams, joints: np.ndarray, perturb: Callable | None = None):
        self.params = params
        self.joints = np.array(joints, dtype=float).reshape(4, 3)
        self.perturb = perturb
        self.tick = 0

    def step(self, rates: np.ndarray) -> np.ndarray:
        self.joints = integrate_joints(self.joints, rates, self.params.sample_time)
        if self.perturb is not None:
            self.joints = self.joints + np.asarray(self.perturb(self.tick, self.joints)).reshape(4, 3)
        self.tick += 1
        return self.joints.copy()
