import numpy as np
import pytest

import serrelab as sl
from serrelab.solvers import (assemble_momentum_system, mass_update_lax_wendroff,
                              mass_update_leapfrog, momentum_update,
                              solve_tridiagonal)
from _cases import run_case


def small_config(**kw):
    defaults = dict(h0=1.0, h1=1.8, x0=50.0, alpha=2.0, domain_a=0.0,
                    domain_b=100.0, dx=2.5, t_end=1.0, scheme="D")
    defaults.update(kw)
    return sl.SimConfig(**defaults)


def smooth_state(cfg, amp=0.01):
    """Rest-depth state carrying a small smooth velocity at both levels."""
    state = sl.smoothed_dambreak_ic(cfg)
    bump = amp * np.exp(-((state.grid.x_all - 50.0) / 10.0) ** 2)
    state.u[:] = bump
    state.u_prev[:] = bump
    sl.apply_dirichlet(state, cfg)
    return state


class TestMomentumUpdate:
    def test_lake_at_rest_velocity(self):
        cfg = small_config(h0=1.4, h1=1.4)
        state = sl.smoothed_dambreak_ic(cfg)
        u_next, dominant = momentum_update(state, cfg)
        assert dominant
        assert np.all(np.abs(u_next) < 1e-14)

    def test_tridiagonal_residual(self):
        cfg = small_config()
        state = smooth_state(cfg)
        ng = state.grid.ghost_layers
        sub, diag, sup, rhs = assemble_momentum_system(
            state.h, state.u, state.u_prev, cfg.dx, cfg.dt, cfg.g, ng)
        u = solve_tridiagonal(sub, diag, sup, rhs)
        resid = diag * u
        resid[1:] += sub[1:] * u[:-1]
        resid[:-1] += sup[:-1] * u[1:]
        scale = np.abs(rhs).max()
        assert np.abs(resid - rhs).max() <= 1e-12 * max(scale, 1.0)

    def test_dense_matrix_oracle(self):
        # flat depth, small smooth velocity, one solve on a tiny grid
        cfg = small_config(h0=1.0, h1=1.0, dx=100.0 / 48)
        state = smooth_state(cfg)
        ng = state.grid.ghost_layers
        sub, diag, sup, rhs = assemble_momentum_system(
            state.h, state.u, state.u_prev, cfg.dx, cfg.dt, cfg.g, ng)
        n = len(rhs)
        dense = np.diag(diag) + np.diag(sub[1:], -1) + np.diag(sup[:-1], 1)
        expected = np.linalg.solve(dense, rhs)
        got, _ = momentum_update(state, cfg)
        assert np.abs(got - expected).max() < 1e-12

    def test_diagonal_dominance_flag(self):
        cfg = small_config()
        _, dominant = momentum_update(sl.smoothed_dambreak_ic(cfg), cfg)
        assert dominant


class TestMassUpdateLeapfrog:
    def test_stationary_fluid(self):
        cfg = small_config()
        state = sl.smoothed_dambreak_ic(cfg)
        h_next = mass_update_leapfrog(state, cfg)
        assert np.array_equal(h_next, state.interior(state.h_prev))

    def test_uniform_advection(self):
        cfg = small_config(h0=1.4, h1=1.4)
        state = sl.smoothed_dambreak_ic(cfg)
        state.u[:] = 0.7
        state.u_prev[:] = 0.7
        h_next = mass_update_leapfrog(state, cfg)
        assert np.abs(h_next - 1.4).max() < 1e-14

    def test_hand_computed_linear_profile(self):
        # h linear in x, u constant: update is h_prev - dt u (h_{i+1}-h_{i-1})/dx
        cfg = small_config(dx=100.0 / 8)
        state = sl.smoothed_dambreak_ic(cfg)
        slope = 0.01
        state.h[:] = 1.0 + slope * state.grid.x_all
        state.h_prev[:] = state.h
        state.u[:] = 0.5
        state.u_prev[:] = 0.5
        h_next = mass_update_leapfrog(state, cfg)
        expected = (state.interior(state.h_prev)
                    - cfg.dt * 0.5 * (2.0 * slope * cfg.dx) / cfg.dx)
        assert np.abs(h_next - expected).max() < 1e-14


class TestMassUpdateLaxWendroff:
    def test_zero_flux(self):
        cfg = small_config(scheme="E")
        state = sl.smoothed_dambreak_ic(cfg)
        u_next = np.zeros(state.grid.n_total)
        h_next = mass_update_lax_wendroff(state, u_next, cfg)
        assert np.array_equal(h_next, state.interior(state.h))

    def test_telescoping_identity(self):
        cfg = small_config(scheme="E")
        state = smooth_state(cfg, amp=0.05)
        ng = state.grid.ghost_layers
        u_next, _ = momentum_update(state, cfg)
        u_full = np.zeros(state.grid.n_total)
        u_full[state.grid.interior] = u_next
        h_next = mass_update_lax_wendroff(state, u_full, cfg)

        # recompute the two boundary face fluxes of the conservative form
        h, u, dx, dt = state.h, state.u, cfg.dx, cfg.dt
        lam = dt / (2.0 * dx)
        hf = 0.5 * (h[ng:-ng + 1] + h[ng - 1:-ng]) - lam * (
            u[ng:-ng + 1] * h[ng:-ng + 1] - h[ng - 1:-ng] * u[ng - 1:-ng])
        uf = 0.25 * (u_full[ng:-ng + 1] + u[ng:-ng + 1]
                     + u_full[ng - 1:-ng] + u[ng - 1:-ng])
        flux = uf * hf
        change = dx * (h_next - state.interior(state.h)).sum()
        assert abs(change + dt * (flux[-1] - flux[0])) <= 1e-12

    def test_extended_precision_transcription(self):
        # single step on a 16-cell sine perturbation against a straight
        # mpmath transcription of the three update formulas
        import mpmath
        mpmath.mp.dps = 40
        cfg = small_config(scheme="E", dx=100.0 / 16)
        state = sl.smoothed_dambreak_ic(cfg)
        xs = state.grid.x_all
        state.h[:] = 1.0 + 0.05 * np.sin(2.0 * np.pi * xs / 100.0)
        state.h_prev[:] = state.h
        state.u[:] = 0.02 * np.sin(2.0 * np.pi * xs / 100.0)
        state.u_prev[:] = state.u
        u_next = 0.02 * np.cos(2.0 * np.pi * xs / 100.0)
        h_next = mass_update_lax_wendroff(state, u_next, cfg)

        ng = state.grid.ghost_layers
        H = [mpmath.mpf(v) for v in state.h]
        U = [mpmath.mpf(v) for v in state.u]
        UN = [mpmath.mpf(v) for v in u_next]
        dx = mpmath.mpf(cfg.dx)
        dt = mpmath.mpf(cfg.dt)
        expected = []
        for i in range(ng, len(H) - ng):
            hr = (H[i + 1] + H[i]) / 2 - dt / (2 * dx) * (
                U[i + 1] * H[i + 1] - H[i] * U[i])
            hl = (H[i] + H[i - 1]) / 2 - dt / (2 * dx) * (
                U[i] * H[i] - H[i - 1] * U[i - 1])
            ur = (UN[i + 1] + U[i + 1] + UN[i] + U[i]) / 4
            ul = (UN[i] + U[i] + UN[i - 1] + U[i - 1]) / 4
            expected.append(H[i] - dt / dx * (ur * hr - ul * hl))
        diff = [abs(a - float(b)) for a, b in zip(h_next, expected)]
        assert max(diff) < 1e-15


class TestStep:
    @pytest.mark.parametrize("scheme", ["D", "E"])
    def test_lake_at_rest_fixed_point(self, scheme):
        cfg = small_config(h0=1.4, h1=1.4, scheme=scheme, dx=1.25)
        state = sl.smoothed_dambreak_ic(cfg)
        for _ in range(1000):
            sl.step(state, cfg)
        assert np.abs(state.interior(state.h) - 1.4).max() <= 1e-12
        assert np.abs(state.interior(state.u)).max() <= 1e-12

    def test_positivity_failure_raises(self):
        cfg = small_config(alpha=0.1)
        state = sl.smoothed_dambreak_ic(cfg)
        with pytest.raises(sl.SolverError) as err:
            # grossly oversized steps drive the depth negative within a few
            for _ in range(20):
                sl.step(state, cfg, dt=50.0)
        assert err.value.step is not None

    def test_determinism(self):
        cfg = small_config(t_end=1.0)
        finals = []
        for _ in range(2):
            _, snapshots, _ = sl.simulate(cfg)
            finals.append(snapshots[-1])
        assert np.array_equal(finals[0].h, finals[1].h)
        assert np.array_equal(finals[0].u, finals[1].u)

    def test_step_counter_time(self):
        cfg = small_config()
        state = sl.smoothed_dambreak_ic(cfg)
        for _ in range(7):
            report = sl.step(state, cfg)
        assert report.step == 7
        assert state.t == 7 * cfg.dt


class TestRunTo:
    def test_t_target_zero(self):
        cfg = small_config()
        state = sl.smoothed_dambreak_ic(cfg)
        snapshots, reports = sl.run_to(state, cfg, 0.0)
        assert len(snapshots) == 1
        assert snapshots[0].t == 0.0
        assert reports == []

    def test_step_count(self):
        cfg = small_config()
        state = sl.smoothed_dambreak_ic(cfg)
        _, reports = sl.run_to(state, cfg, 1.0)
        assert len(reports) == round(1.0 / cfg.dt)
        assert state.t == pytest.approx(1.0, abs=1e-12)

    def test_shortened_final_step_flagged(self):
        cfg = small_config()
        state = sl.smoothed_dambreak_ic(cfg)
        _, reports = sl.run_to(state, cfg, 0.26)
        assert reports[-1].shortened
        assert state.t == pytest.approx(0.26, abs=1e-12)

    def test_snapshot_times(self):
        cfg = small_config()
        state = sl.smoothed_dambreak_ic(cfg)
        snapshots, _ = sl.run_to(state, cfg, 1.0, snapshot_times=[0.5, 1.0])
        assert [s.t for s in snapshots] == pytest.approx([0.5, 1.0])

    def test_failure_carries_last_snapshot(self):
        cfg = small_config(alpha=0.01, dx=12.5, dt_factor=2.0)
        state = sl.smoothed_dambreak_ic(cfg)
        with pytest.raises(sl.SolverError) as err:
            sl.run_to(state, cfg, 1000.0, snapshot_times=[0.0])
        assert err.value.last_snapshot is not None


class TestSchemeAgreement:
    def test_smooth_case_profiles_close(self):
        # the two schemes agree closely on the smooth alpha = 40 problem
        snaps_d, _ = run_case(40.0, 6, 30.0, scheme="D")
        snaps_e, _ = run_case(40.0, 6, 30.0, scheme="E")
        l1 = sl.l1_difference(snaps_d[30.0], snaps_e[30.0], "h")
        assert l1 <= 1e-3
