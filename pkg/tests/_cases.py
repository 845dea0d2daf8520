"""Shared, cached simulation runs used across test modules.

The expensive dam-break runs are keyed by their full parameter set so a
single run serves every test (and acceptance criterion) that needs it.
"""
import functools

import serrelab as sl


def make_config(alpha, k, t_end, scheme="D", domain=(0.0, 1000.0),
                h0=1.0, h1=1.8, **kw):
    a, b = domain
    return sl.SimConfig(h0=h0, h1=h1, x0=0.5 * (a + b), alpha=alpha,
                        domain_a=a, domain_b=b,
                        dx=10.0 / 2 ** k, t_end=t_end, scheme=scheme, **kw)


@functools.lru_cache(maxsize=None)
def run_case(alpha, k, t_end, scheme="D", domain=(0.0, 1000.0),
             h0=1.0, h1=1.8, times=()):
    """Run one dam-break case; returns ({t: snapshot}, config)."""
    config = make_config(alpha, k, t_end, scheme, domain, h0, h1)
    state = sl.smoothed_dambreak_ic(config)
    wanted = sorted(set(times) | {t_end})
    snapshots, _ = sl.run_to(state, config, t_end, snapshot_times=wanted,
                             collect_reports=False)
    return {s.t: s for s in snapshots}, config


SWWE = sl.solve_swwe_dambreak(1.0, 1.8, 9.81, x0=500.0)
WHITHAM = sl.whitham_leading_wave(1.0, 1.8, 9.81, x0=500.0)
