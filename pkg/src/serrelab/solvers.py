"""The two second-order time-stepping schemes.

Both schemes share the implicit centred momentum update (a tridiagonal
solve per step).  Scheme D pairs it with a centred leapfrog mass update;
scheme E pairs it with a two-step Lax-Wendroff mass update that consumes
the freshly computed velocity.  No limiter, filtering or artificial
viscosity anywhere: the schemes' intrinsic dispersive/diffusive character
is the point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .core import SimConfig, Snapshot, State, apply_dirichlet, take_snapshot


class SolverError(RuntimeError):
    """Fatal stepping failure (positivity loss, non-finite values)."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True)
class StepReport:
    step: int
    t: float
    min_h: float
    max_abs_u: float
    diag_dominant: bool
    shortened: bool = False


def assemble_momentum_system(h, u, u_prev, dx, dt, g, ng):
    """Tridiagonal system for the new interior velocities.

    The implicit operator is the centred discretisation of
    h u_t - d/dx((h^3/3) du_t/dx), expanded so that row i reads
        (h^2 h_x/(2 dx) - h^3/(3 dx^2)) u_{i-1}
        + (h + 2 h^3/(3 dx^2))          u_i
        - (h^2 h_x/(2 dx) + h^3/(3 dx^2)) u_{i+1}  = -Y_i
    with Y built from the current and previous levels and all spatial
    derivatives second-order centred.  The velocity stencil reaches
    i +- 2, hence the two ghost layers.
    """
    c = slice(ng, -ng)
    hp = h[ng + 1:-ng + 1]
    hm = h[ng - 1:-ng - 1]
    up = u[ng + 1:-ng + 1]
    um = u[ng - 1:-ng - 1]
    upp = u[ng + 2:] if ng == 2 else u[ng + 2:-ng + 2]
    umm = u[ng - 2:-ng - 2]
    hc = h[c]
    uc = u[c]

    ux = (up - um) / (2.0 * dx)
    hx = (hp - hm) / (2.0 * dx)
    uxx = (up - 2.0 * uc + um) / dx ** 2
    uxxx = (upp - 2.0 * up + 2.0 * um - umm) / (2.0 * dx ** 3)
    h2 = hc * hc
    h3 = h2 * hc
    h2hx = h2 * hx

    x_term = (uc * hc * ux + g * hc * hx + h2hx * ux * ux
              + (h3 / 3.0) * ux * uxx - h2hx * uc * uxx
              - (h3 / 3.0) * uc * uxxx)

    upc = u_prev[c]
    upp1 = u_prev[ng + 1:-ng + 1]
    upm1 = u_prev[ng - 1:-ng - 1]
    y = (2.0 * dt * x_term - hc * upc
         + h2hx * (upp1 - upm1) / (2.0 * dx)
         + (h3 / 3.0) * (upp1 - 2.0 * upc + upm1) / dx ** 2)

    sub = h2hx / (2.0 * dx) - h3 / (3.0 * dx ** 2)
    diag = hc + 2.0 * h3 / (3.0 * dx ** 2)
    sup = -h2hx / (2.0 * dx) - h3 / (3.0 * dx ** 2)
    rhs = -y
    # fold the Dirichlet ghost velocities (zero) into the right-hand side
    rhs[0] -= sub[0] * u[ng - 1]
    rhs[-1] -= sup[-1] * u[-ng]
    return sub, diag, sup, rhs


def solve_tridiagonal(sub, diag, sup, rhs):
    n = len(rhs)
    ab = np.zeros((3, n))
    ab[0, 1:] = sup[:-1]
    ab[1, :] = diag
    ab[2, :-1] = sub[1:]
    return solve_banded((1, 1), ab, rhs)


def momentum_update(state: State, config: SimConfig, dt: float | None = None):
    """New interior velocities by direct tridiagonal elimination.

    Returns (u_next, diag_dominant).  Strict diagonal dominance holds for
    h > 0 on any dx < 2h/3; it is still checked numerically per solve.
    """
    if dt is None:
        dt = config.dt
    ng = state.grid.ghost_layers
    sub, diag, sup, rhs = assemble_momentum_system(
        state.h, state.u, state.u_prev, state.grid.dx, dt, config.g, ng)
    dominant = bool(np.all(np.abs(diag) > np.abs(sub) + np.abs(sup)))
    u_next = solve_tridiagonal(sub, diag, sup, rhs)
    if not np.all(np.isfinite(u_next)):
        raise SolverError("non-finite velocity after momentum solve",
                          step=state.step)
    return u_next, dominant


def mass_update_leapfrog(state: State, config: SimConfig,
                         dt: float | None = None):
    """Centred mass update advancing from the previous level."""
    if dt is None:
        dt = config.dt
    ng = state.grid.ghost_layers
    dx = state.grid.dx
    c = slice(ng, -ng)
    hp = state.h[ng + 1:-ng + 1]
    hm = state.h[ng - 1:-ng - 1]
    up = state.u[ng + 1:-ng + 1]
    um = state.u[ng - 1:-ng - 1]
    return state.h_prev[c] - dt * (state.u[c] * (hp - hm) / dx
                                   + state.h[c] * (up - um) / dx)


def mass_update_lax_wendroff(state: State, u_next_full, config: SimConfig,
                             dt: float | None = None):
    """Two-step Lax-Wendroff mass update.

    Half-step depths come from the current level; half-step velocities are
    the four-point space-time average using the already-computed new
    velocities.
    """
    if dt is None:
        dt = config.dt
    ng = state.grid.ghost_layers
    dx = state.grid.dx
    h = state.h
    u = state.u
    un1 = u_next_full
    lam = dt / (2.0 * dx)
    # half-step depth at every interior face i+1/2, i = ng-1 .. n+ng-1
    hf = 0.5 * (h[ng:-ng + 1] + h[ng - 1:-ng]) - lam * (
        u[ng:-ng + 1] * h[ng:-ng + 1] - h[ng - 1:-ng] * u[ng - 1:-ng])
    uf = 0.25 * (un1[ng:-ng + 1] + u[ng:-ng + 1]
                 + un1[ng - 1:-ng] + u[ng - 1:-ng])
    flux = uf * hf
    return h[ng:-ng] - (dt / dx) * (flux[1:] - flux[:-1])


def apply_euler_bootstrap(state: State, config: SimConfig) -> None:
    """Replace the copied previous level by a backward extrapolation.

    At rest the momentum system applied to (u = 0, u_prev = 0) returns
    2 dt du/dt, so u(-dt) is minus half of that solve.  h(-dt) = h(0)
    exactly since u = 0 makes the depth stationary.
    """
    u_rate2dt, _ = momentum_update(state, config)
    c = state.grid.interior
    state.u_prev[c] = -0.5 * u_rate2dt
    apply_dirichlet(state, config)


def step(state: State, config: SimConfig, dt: float | None = None) -> StepReport:
    """Advance one step with the configured scheme; rotates time levels."""
    shortened = dt is not None
    dt_eff = config.dt if dt is None else dt
    ng = state.grid.ghost_layers
    c = state.grid.interior
    if config.scheme == "D":
        h_next = mass_update_leapfrog(state, config, dt_eff)
        u_next, dominant = momentum_update(state, config, dt_eff)
    else:
        u_next, dominant = momentum_update(state, config, dt_eff)
        u_next_full = np.zeros(state.grid.n_total)
        u_next_full[c] = u_next
        h_next = mass_update_lax_wendroff(state, u_next_full, config, dt_eff)

    if not np.all(np.isfinite(h_next)):
        raise SolverError("non-finite depth after mass update", step=state.step)
    if not np.all(h_next > 0.0):
        raise SolverError(
            f"depth positivity lost (min h = {h_next.min():.3e})",
            step=state.step)

    # rotate levels n -> n-1
    state.h_prev, state.h = state.h, state.h_prev
    state.u_prev, state.u = state.u, state.u_prev
    state.h[c] = h_next
    state.u[c] = u_next
    apply_dirichlet(state, config)

    state.step += 1
    if shortened:
        state.t = state.t + dt_eff
    else:
        # step counter, not accumulated t, to avoid drift over ~1e5 steps
        state.t = state.step * config.dt
    return StepReport(step=state.step, t=state.t,
                      min_h=float(h_next.min()),
                      max_abs_u=float(np.abs(u_next).max()),
                      diag_dominant=dominant, shortened=shortened)


def run_to(state: State, config: SimConfig, t_target: float,
           snapshot_times=None, collect_reports: bool = True):
    """Step until t_target, emitting snapshots at the requested times.

    Returns (snapshots, reports).  t_target is expected to be an integer
    multiple of dt; otherwise the final step is shortened and flagged.
    On solver failure the error carries the last good snapshot.
    """
    if t_target < state.t:
        raise ValueError("t_target precedes current state time")
    if snapshot_times is None:
        snapshot_times = config.snapshot_times
    dt = config.dt
    snap_steps = {}
    for ts in snapshot_times:
        snap_steps.setdefault(round(ts / dt), ts)

    if state.step == 0 and config.bootstrap == "euler":
        apply_euler_bootstrap(state, config)

    snapshots = []
    reports = []
    if state.step in snap_steps or t_target == state.t:
        snapshots.append(take_snapshot(state))

    n_float = (t_target - state.t) / dt
    n_full = int(math.floor(n_float + 1e-9))
    remainder = t_target - (state.t + n_full * dt)

    for _ in range(n_full):
        try:
            report = step(state, config)
        except SolverError as exc:
            exc.last_snapshot = snapshots[-1] if snapshots else None
            raise
        if collect_reports:
            reports.append(report)
        if state.step in snap_steps:
            snapshots.append(take_snapshot(state))
    if remainder > 1e-9 * max(1.0, abs(t_target)):
        report = step(state, config, dt=remainder)
        if collect_reports:
            reports.append(report)
        snapshots.append(take_snapshot(state))
    return snapshots, reports


def simulate(config: SimConfig):
    """Convenience wrapper: build the IC and run to config.t_end."""
    from .core import smoothed_dambreak_ic

    state = smoothed_dambreak_ic(config)
    times = set(config.snapshot_times) | {config.t_end}
    snapshots, reports = run_to(state, config, config.t_end,
                                snapshot_times=sorted(times))
    return state, snapshots, reports
