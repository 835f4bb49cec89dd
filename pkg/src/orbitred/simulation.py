"""Run configurations and the stage dispatch behind the command line."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from .errors import InvalidInputError
from .full import (
    FullState,
    chart_from_full,
    full_field_chart,
    full_field_trivialized,
)
from .integrate import Trajectory, diagnose, integrate
from .io import FREE_COLUMNS, ROTOR_COLUMNS
from .lie import rodrigues
from .models import (
    FreeRigidBody,
    RigidBodyRotors,
    casimirs,
    chart_energy,
    get_model,
    rbr_two_stage_connections,
    rbr_two_stage_model,
    rbr_two_stage_state,
)
from .reduced_one import reduced_vector_field
from .reduced_two import two_stage_vector_field

STAGES = ("one", "two", "full-trivialized", "full-chart")
FORMATS = ("csv", "json")


class ConfigError(InvalidInputError):
    """Invalid run configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class RunConfig:
    model: str = "rigid-body-rotors"
    stage: str = "one"
    inertia: tuple = (1.0, 2.0, 3.0)
    rotor_inertia: tuple = (0.1, 0.1, 0.1)
    y0: tuple = (0.1, -0.05, 0.08)
    nu0: tuple = (0.6, 0.78, 0.1)
    theta0: tuple = (0.0, 0.0, 0.0)
    # Axis-angle attitude; None aligns the spatial momentum with e_z, which
    # keeps the Euler chart regular when nu0[2] is small.
    attitude: Optional[tuple] = None
    dt: float = 1e-3
    steps: int = 1000
    project_orbit: bool = False
    output: Optional[str] = None
    format: str = "csv"

    def validate(self) -> "RunConfig":
        if self.model not in ("rigid-body-rotors", "free-rigid-body"):
            raise ConfigError("model", f"unknown model {self.model!r}")
        if self.stage not in STAGES:
            raise ConfigError("stage", f"must be one of {', '.join(STAGES)}")
        if self.format not in FORMATS:
            raise ConfigError("format", "must be csv or json")
        for name in ("inertia", "rotor_inertia", "y0", "nu0", "theta0"):
            v = getattr(self, name)
            if len(v) != 3 or not all(np.isfinite(float(a)) for a in v):
                raise ConfigError(name, "expected three finite numbers")
            setattr(self, name, tuple(float(a) for a in v))
        if self.attitude is not None:
            if len(self.attitude) != 3:
                raise ConfigError("attitude", "expected an axis-angle 3-vector")
            self.attitude = tuple(float(a) for a in self.attitude)
        for name in ("inertia", "rotor_inertia"):
            if not all(a > 0 for a in getattr(self, name)):
                raise ConfigError(name, "entries must be positive")
        if np.linalg.norm(self.nu0) == 0.0:
            raise ConfigError("nu0", "must be nonzero (orbit stages need a sphere orbit)")
        try:
            self.dt = float(self.dt)
        except (TypeError, ValueError):
            raise ConfigError("dt", "must be a number") from None
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError("dt", "must be positive")
        if isinstance(self.steps, bool) or int(self.steps) != self.steps or int(self.steps) < 1:
            raise ConfigError("steps", "must be an integer >= 1")
        self.steps = int(self.steps)
        if self.model == "free-rigid-body" and self.stage == "two":
            raise ConfigError("stage", "the free rigid body has no two-stage configuration")
        if self.project_orbit and self.stage == "full-chart":
            raise ConfigError("project_orbit", "not available in the canonical chart")
        return self

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        cfg = cls()
        for key, value in data.items():
            k = key.replace("-", "_")
            if k not in names:
                raise ConfigError(key, "unknown configuration key")
            if isinstance(value, list):
                value = tuple(value)
            setattr(cfg, k, value)
        return cfg

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def build_model(cfg: RunConfig):
    radius = float(np.linalg.norm(cfg.nu0))
    if cfg.model == "free-rigid-body":
        return get_model(cfg.model, I=cfg.inertia, orbit_radius=radius)
    return get_model(cfg.model, I=cfg.inertia, K=cfg.rotor_inertia, orbit_radius=radius)


def initial_attitude(cfg: RunConfig) -> np.ndarray:
    if cfg.attitude is not None:
        return rodrigues(np.array(cfg.attitude))
    u = np.array(cfg.nu0) / np.linalg.norm(cfg.nu0)
    ez = np.array([0.0, 0.0, 1.0])
    axis = np.cross(u, ez)
    s = np.linalg.norm(axis)
    if s < 1e-15:
        return np.eye(3) if u[2] > 0 else rodrigues([np.pi, 0.0, 0.0])
    return rodrigues(axis / s * np.arctan2(s, float(u @ ez)))


def setup(cfg: RunConfig):
    """Model, initial state and vector field for the configured stage."""
    m = build_model(cfg)
    rotors = isinstance(m, RigidBodyRotors)
    y0 = np.array(cfg.y0) if rotors else np.zeros(0)
    theta0 = np.array(cfg.theta0) if rotors else np.zeros(0)
    nu0 = np.array(cfg.nu0)
    if cfg.stage == "one":
        conn, h = m.connection(), m.hamiltonian()
        s0 = m.state(theta0, y0, nu0) if rotors else m.state(nu0)
        return m, s0, lambda s: reduced_vector_field(conn, h, s)
    if cfg.stage == "two":
        ctx, h2 = rbr_two_stage_model(m, rho=y0)
        connN, connH = rbr_two_stage_connections(ctx)
        s0 = rbr_two_stage_state(ctx, nu0, rho=y0, phase=theta0)
        return m, s0, lambda s: two_stage_vector_field(ctx, connN, connH, h2, s)
    full0 = FullState.make(initial_attitude(cfg), theta0, nu0, y0)
    if cfg.stage == "full-trivialized":
        H = m.hamiltonian()
        return m, full0, lambda s: full_field_trivialized(H, s)
    Hc = chart_energy(m)
    return m, chart_from_full(full0), lambda c: full_field_chart(Hc, c)


def run(cfg: RunConfig) -> tuple[Any, Trajectory]:
    cfg.validate()
    m, s0, fld = setup(cfg)
    traj = integrate(fld, s0, cfg.dt, cfg.steps, project=cfg.project_orbit, model=cfg.model)
    return m, traj


def observables(s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(theta, y, nu)`` of any state kind in the common rotor coordinates."""
    from .full import ChartState
    from .reduced_one import ReducedState1
    from .reduced_two import ReducedState2

    if isinstance(s, ReducedState1):
        return s.x, s.alpha, s.nu.coords
    if isinstance(s, ReducedState2):
        return s.phase, s.tau.coords, s.eta.coords
    if isinstance(s, FullState):
        return s.theta, s.p, s.pi.coords
    if isinstance(s, ChartState):
        return s.angles[3:], s.shape_momenta, s.body_momentum
    raise InvalidInputError(f"unsupported state kind {type(s).__name__}")


def trajectory_rows(m, traj: Trajectory) -> tuple[list[str], np.ndarray]:
    rows = []
    for t, s in zip(traj.times, traj.states):
        theta, y, nu = observables(s)
        e = m.energy_of(s)
        c = float(casimirs(s)[0])
        if isinstance(m, FreeRigidBody):
            rows.append(np.concatenate([[t], nu, [e, c]]))
        else:
            rows.append(np.concatenate([[t], theta, y, nu, [e, c]]))
    columns = FREE_COLUMNS if isinstance(m, FreeRigidBody) else ROTOR_COLUMNS
    return list(columns), np.array(rows)


def comparison_observables(traj: Trajectory) -> np.ndarray:
    """``(y, nu)`` per time sample, the quantities shared by every stage."""
    return np.array([np.concatenate(observables(s)[1:]) for s in traj.states])


def summary(m, traj: Trajectory) -> dict[str, float]:
    return diagnose(traj, m).summary()
