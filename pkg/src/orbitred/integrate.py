"""Fixed-step RK4 integration and conservation diagnostics.

States are any of the package's state records (reduced one/two stage, full,
chart) or plain numpy arrays. A state record exposes ``to_vector``,
``with_vector``, ``finalize`` (run after every step) and ``project_orbit``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .errors import ChartSingularityError, InvalidInputError, NumericalFailureError
from .models import casimirs, spatial_momentum


def _vector(x) -> np.ndarray:
    return x if isinstance(x, np.ndarray) else x.to_vector()


def _rebuild(template, v: np.ndarray):
    return v if isinstance(template, np.ndarray) else template.with_vector(v)


def rk4_step(field: Callable, s, dt: float, step: int = 0):
    """One classical Runge-Kutta step; raises on non-finite field output."""
    if not dt > 0:
        raise InvalidInputError("dt must be positive")
    v0 = _vector(s)

    def k(state):
        try:
            out = _vector(field(state))
        except ChartSingularityError as exc:
            raise NumericalFailureError(str(exc), step) from exc
        if not np.all(np.isfinite(out)):
            raise NumericalFailureError("vector field returned non-finite values", step)
        return out

    k1 = k(s)
    k2 = k(_rebuild(s, v0 + 0.5 * dt * k1))
    k3 = k(_rebuild(s, v0 + 0.5 * dt * k2))
    k4 = k(_rebuild(s, v0 + dt * k3))
    return _rebuild(s, v0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: tuple
    dt: float
    model: str = ""
    projected: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise InvalidInputError("times and states differ in length")

    def __len__(self) -> int:
        return len(self.states)

    def vectors(self) -> np.ndarray:
        return np.array([_vector(s) for s in self.states])


def integrate(
    field: Callable,
    s0,
    dt: float,
    n_steps: int,
    project: bool = False,
    model: str = "",
) -> Trajectory:
    """Run ``n_steps`` RK4 steps from ``s0``.

    With ``project`` the orbit part of every state is rescaled to the initial
    orbit radius after each step.
    """
    if n_steps < 1:
        raise InvalidInputError("n_steps must be at least 1")
    states = [s0]
    s = s0
    for i in range(n_steps):
        s = rk4_step(field, s, dt, step=i + 1)
        if not isinstance(s, np.ndarray):
            s = s.finalize()
            if project:
                s = s.project_orbit(s0)
        states.append(s)
    times = dt * np.arange(n_steps + 1)
    return Trajectory(times, tuple(states), float(dt), model, bool(project))


@dataclass(frozen=True)
class Diagnostics:
    energy_drift: float
    casimir_drift: np.ndarray
    momentum_drift: Optional[float] = None

    def summary(self) -> dict[str, Any]:
        out = {"energy_drift": self.energy_drift, "casimir_drift": float(np.max(self.casimir_drift, initial=0.0))}
        if self.momentum_drift is not None:
            out["momentum_drift"] = self.momentum_drift
        return out


def energies(traj: Trajectory, model) -> np.ndarray:
    return np.array([model.energy_of(s) for s in traj.states])


def diagnose(traj: Trajectory, model, energy: Optional[Callable] = None) -> Diagnostics:
    """Maximum drifts of energy (relative), orbit radii and spatial momentum."""
    energy = model.energy_of if energy is None else energy
    h = np.array([energy(s) for s in traj.states])
    scale = abs(h[0]) if h[0] != 0.0 else 1.0
    energy_drift = float(np.max(np.abs(h - h[0])) / scale)
    cas = np.array([casimirs(s) for s in traj.states])
    casimir_drift = np.max(np.abs(cas - cas[0]), axis=0) if cas.size else np.zeros(0)
    J0 = spatial_momentum(traj.states[0])
    momentum_drift = None
    if J0 is not None:
        J = np.array([spatial_momentum(s) for s in traj.states])
        momentum_drift = float(np.max(np.linalg.norm(J - J0, axis=1)))
    return Diagnostics(energy_drift, casimir_drift, momentum_drift)


def sup_deviation(a: Sequence[np.ndarray], b: Sequence[np.ndarray]) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise InvalidInputError(f"trajectories differ in shape: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b))) if a.size else 0.0
