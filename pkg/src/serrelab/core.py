"""Physical configuration, uniform grids, state storage and the smoothed
dam-break initial conditions shared by both time-stepping schemes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

GHOST_LAYERS = 2
SCHEMES = ("D", "E")
BOOTSTRAPS = ("copy", "euler")

# keys accepted in plain-text config files, in canonical order
CONFIG_KEYS = (
    "h0", "h1", "x0", "alpha", "domain_a", "domain_b", "dx", "dt_factor",
    "t_end", "g", "scheme", "out_dir", "snapshot_times",
)
REQUIRED_KEYS = ("h0", "h1", "x0", "alpha", "domain_a", "domain_b", "dx",
                 "t_end", "scheme")


class ConfigError(ValueError):
    """Invalid, missing or unknown configuration data."""


@dataclass
class SimConfig:
    """All physical and numerical parameters of one simulation run."""

    h0: float                    # right-state depth (m)
    h1: float                    # left-state depth (m)
    x0: float                    # transition centre (m)
    alpha: float                 # smoothing length (m)
    domain_a: float
    domain_b: float
    dx: float
    t_end: float
    scheme: str = "D"            # D: leapfrog mass update, E: Lax-Wendroff
    dt_factor: float = 0.01      # dt = dt_factor * dx
    g: float = 9.81
    out_dir: str | None = None
    snapshot_times: tuple = ()
    bootstrap: str = "euler"     # previous-level init: euler | copy

    def __post_init__(self):
        self.snapshot_times = tuple(float(t) for t in self.snapshot_times)
        self.validate()

    def validate(self):
        for name in ("h0", "h1", "alpha", "dx", "dt_factor", "t_end", "g"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not self.domain_a < self.domain_b:
            raise ConfigError("domain_a must be less than domain_b")
        if not self.domain_a < self.x0 < self.domain_b:
            raise ConfigError("x0 must lie strictly inside the domain")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}")
        if self.bootstrap not in BOOTSTRAPS:
            raise ConfigError(f"bootstrap must be one of {BOOTSTRAPS}")

    @property
    def dt(self) -> float:
        return self.dt_factor * self.dx

    def require_midpoint(self):
        """The analytic conserved-total formulas need x0 at the domain centre."""
        mid = 0.5 * (self.domain_a + self.domain_b)
        if abs(self.x0 - mid) > 1e-9 * (self.domain_b - self.domain_a):
            raise ConfigError(
                f"x0 = {self.x0} is not the domain midpoint {mid}")

    def with_overrides(self, **kw) -> "SimConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred grid with two ghost cells at each end."""

    a: float
    dx: float
    n_cells: int
    ghost_layers: int = GHOST_LAYERS

    @classmethod
    def from_config(cls, config: SimConfig) -> "Grid":
        span = config.domain_b - config.domain_a
        n = span / config.dx
        n_cells = round(n)
        if n_cells < 1 or abs(n - n_cells) > 1e-9 * max(1.0, n):
            raise ConfigError(
                f"dx = {config.dx} does not tile [{config.domain_a}, "
                f"{config.domain_b}] with an integer number of cells")
        return cls(a=config.domain_a, dx=config.dx, n_cells=n_cells)

    @property
    def n_total(self) -> int:
        return self.n_cells + 2 * self.ghost_layers

    @property
    def x(self) -> np.ndarray:
        """Interior cell centres a + (i + 1/2) dx."""
        i = np.arange(self.n_cells)
        return self.a + (i + 0.5) * self.dx

    @property
    def x_all(self) -> np.ndarray:
        """Cell centres including ghost cells."""
        i = np.arange(-self.ghost_layers, self.n_cells + self.ghost_layers)
        return self.a + (i + 0.5) * self.dx

    @property
    def interior(self) -> slice:
        return slice(self.ghost_layers, self.ghost_layers + self.n_cells)


@dataclass
class State:
    """Two time levels of (h, u) on a grid, with ghost cells."""

    grid: Grid
    h: np.ndarray
    u: np.ndarray
    h_prev: np.ndarray
    u_prev: np.ndarray
    t: float = 0.0
    step: int = 0

    def interior(self, arr: np.ndarray) -> np.ndarray:
        return arr[self.grid.interior]


@dataclass(frozen=True)
class Snapshot:
    """Interior (h, u) profile at one output time."""

    t: float
    x: np.ndarray
    h: np.ndarray
    u: np.ndarray

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])


def take_snapshot(state: State) -> Snapshot:
    return Snapshot(t=state.t, x=state.grid.x,
                    h=state.interior(state.h).copy(),
                    u=state.interior(state.u).copy())


def initial_depth(x, config: SimConfig):
    """Smoothed dam-break depth profile at t = 0."""
    return config.h0 + 0.5 * (config.h1 - config.h0) * (
        1.0 + np.tanh((config.x0 - x) / config.alpha))


def apply_dirichlet(state: State, config: SimConfig) -> None:
    """Refresh ghost cells with the far-field Dirichlet data.

    Idempotent; interior cells are never touched.
    """
    ng = state.grid.ghost_layers
    for arr, left, right in ((state.h, config.h1, config.h0),
                             (state.h_prev, config.h1, config.h0),
                             (state.u, 0.0, 0.0),
                             (state.u_prev, 0.0, 0.0)):
        arr[:ng] = left
        arr[-ng:] = right


def smoothed_dambreak_ic(config: SimConfig, grid: Grid | None = None) -> State:
    """Build the t = 0 state: tanh depth transition, fluid at rest.

    The previous time level is a copy of the initial data; u = 0 forces
    dh/dt = 0 at t = 0, so the copy is exact for h and O(dt) in u.  The
    optional forward-Euler bootstrap is applied by the stepping loop.
    """
    if grid is None:
        grid = Grid.from_config(config)
    h = initial_depth(grid.x_all, config)
    u = np.zeros(grid.n_total)
    state = State(grid=grid, h=h, u=u, h_prev=h.copy(), u_prev=u.copy())
    apply_dirichlet(state, config)
    return state


def analytic_totals(config: SimConfig) -> tuple[float, float, float]:
    """Closed-form conserved totals (mass, momentum, energy) of the IC.

    Valid only when x0 is the domain midpoint.  The energy total is the
    direct integral of g h(x,0)^2 / 2 over the domain; see
    printed_hamiltonian_total for the variant kept for traceability.
    """
    config.require_midpoint()
    a, b = config.domain_a, config.domain_b
    h0, h1, al, g = config.h0, config.h1, config.alpha, config.g
    c_h = 0.5 * (h1 + h0) * (b - a)
    c_uh = 0.0
    c_ham = (g / 4.0) * ((h0 ** 2 + h1 ** 2) * (b - a)
                         + al * (h1 - h0) ** 2 * math.tanh((a - b) / (2 * al)))
    return c_h, c_uh, c_ham


def printed_hamiltonian_total(config: SimConfig) -> float:
    """Energy-total variant without the bulk (b - a) term and with the
    opposite sign on the squared depths.  Kept as a secondary output for
    traceability only; it disagrees with direct quadrature of the IC.
    """
    a, b = config.domain_a, config.domain_b
    h0, h1, al, g = config.h0, config.h1, config.alpha, config.g
    return (g / 4.0) * (h0 ** 2 - h1 ** 2
                        + al * (h1 - h0) ** 2 * math.tanh((a - b) / (2 * al)))


def _parse_value(key: str, raw: str):
    if key == "scheme":
        return raw.strip()
    if key == "out_dir":
        return raw.strip() or None
    if key == "snapshot_times":
        raw = raw.strip()
        if not raw:
            return ()
        try:
            return tuple(float(tok) for tok in raw.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad snapshot_times entry: {raw!r}") from exc
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config_text(text: str) -> SimConfig:
    """Parse `key = value` lines into a SimConfig.

    Unknown keys are a hard error, as is any missing required key.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key: {key}")
        if key in values:
            raise ConfigError(f"duplicate key: {key}")
        values[key] = _parse_value(key, raw)
    for key in REQUIRED_KEYS:
        if key not in values:
            raise ConfigError(f"missing key: {key}")
    return SimConfig(**values)


def parse_config_file(path) -> SimConfig:
    with open(path) as fh:
        return parse_config_text(fh.read())


def format_config(config: SimConfig) -> str:
    """Render a SimConfig back to the plain-text `key = value` format."""
    lines = []
    for key in CONFIG_KEYS:
        val = getattr(config, key)
        if key == "snapshot_times":
            val = ",".join(repr(t) for t in val)
        elif key == "out_dir":
            val = val or ""
        elif key == "scheme":
            pass
        else:
            val = repr(float(val))
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"
