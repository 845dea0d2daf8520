"""Conservation accounting, nested-grid difference measures, leading-wave
extraction, bore-mean statistics and the bore-structure classifier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Snapshot
from .reference import SwweSolution

QUANTITIES = ("h", "uh", "H")
STRUCTURES = ("S1", "S2", "S3", "S4", "Unclassified")

# 3-point Gauss-Legendre rule on [-1, 1]
_GAUSS_NODES = np.array([-math.sqrt(3.0 / 5.0), 0.0, math.sqrt(3.0 / 5.0)])
_GAUSS_WEIGHTS = np.array([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])

# default thresholds of the structure classifier
OSCILLATION_FLOOR = 5e-3   # metres; amplitudes below this count as flat
AMPLITUDE_RATIO = 0.5      # mid-vs-flank ratio separating node from growth
DAGGER_WINDOW = (520.0, 540.0)   # preset exclusion window for L1 comparisons


@dataclass
class DiagnosticsRecord:
    """One row of per-snapshot diagnostics."""

    t: float
    C_star_h: float
    C_star_uh: float
    C_star_H: float
    C1_h: float | None = None
    C1_uh: float | None = None
    C1_H: float | None = None
    structure: str = "Unclassified"
    x_A: float | None = None
    A: float | None = None
    h_mean: float | None = None
    u_mean: float | None = None


def _lagrange_matrices(offsets):
    """Value and derivative weights of the quartic through the 5 offsets,
    evaluated at the 3 Gauss nodes of the central cell (offset units of dx).
    """
    offsets = np.asarray(offsets, dtype=float)
    v_nodes = np.vander(offsets, 5, increasing=True)        # p(z_j) = q_j
    pts = 0.5 * _GAUSS_NODES
    p_val = np.vander(pts, 5, increasing=True)
    p_der = np.zeros((3, 5))
    for k in range(1, 5):
        p_der[:, k] = k * pts ** (k - 1)
    inv = np.linalg.inv(v_nodes)
    return p_val @ inv, p_der @ inv


_CENTER_VAL, _CENTER_DER = _lagrange_matrices([-2, -1, 0, 1, 2])
_EDGE = {off0: _lagrange_matrices(np.arange(off0, off0 + 5))
         for off0 in (0, -1, -3, -4)}


def _gauss_samples(q, dx):
    """Interpolant values and derivatives at the 3 Gauss nodes of each cell.

    Five-point centred stencils; one-sided at the first and last two cells.
    Returns (values, derivatives) with shape (3, n); derivatives are d/dx.
    """
    n = len(q)
    if n < 5:
        raise ValueError("need at least 5 cells for the quartic interpolant")
    vals = np.empty((3, n))
    ders = np.empty((3, n))
    for g in range(3):
        acc_v = np.zeros(n - 4)
        acc_d = np.zeros(n - 4)
        for j in range(5):
            seg = q[j:n - 4 + j]
            acc_v += _CENTER_VAL[g, j] * seg
            acc_d += _CENTER_DER[g, j] * seg
        vals[g, 2:n - 2] = acc_v
        ders[g, 2:n - 2] = acc_d
    for cell, off0 in ((0, 0), (1, -1), (n - 2, -3), (n - 1, -4)):
        m_val, m_der = _EDGE[off0]
        stencil = q[cell + off0:cell + off0 + 5]
        vals[:, cell] = m_val @ stencil
        ders[:, cell] = m_der @ stencil
    ders /= dx
    return vals, ders


def total_quantity(snapshot: Snapshot, quantity: str, g: float = 9.81) -> float:
    """Total of h, uh or the energy density over the snapshot interval.

    Quartic interpolants of h and u per cell, 3-point Gauss quadrature,
    cells summed in fixed left-to-right order.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"quantity must be one of {QUANTITIES}")
    dx = snapshot.dx
    h_vals, h_ders = _gauss_samples(snapshot.h, dx)
    if quantity == "h":
        integrand = h_vals
    else:
        u_vals, u_ders = _gauss_samples(snapshot.u, dx)
        if quantity == "uh":
            integrand = u_vals * h_vals
        else:
            integrand = 0.5 * (h_vals * u_vals ** 2
                               + (h_vals ** 3 / 3.0) * u_ders ** 2
                               + g * h_vals ** 2)
    cell_totals = (0.5 * dx) * (_GAUSS_WEIGHTS @ integrand)
    return float(np.cumsum(cell_totals)[-1])


def totals(snapshot: Snapshot, g: float = 9.81):
    """(mass, momentum, energy) totals of one snapshot."""
    return tuple(total_quantity(snapshot, q, g) for q in QUANTITIES)


def conservation_error(totals_0, snapshot: Snapshot, g: float, t: float,
                       totals_t=None):
    """Relative conservation errors vs the analytic initial totals.

    Momentum uses the absolute, boundary-flux-corrected form (its initial
    total is zero); boundary depths are taken from the outermost interior
    cells.
    """
    c_h0, c_uh0, c_ham0 = totals_0
    if totals_t is None:
        totals_t = totals(snapshot, g)
    c_h, c_uh, c_ham = totals_t
    c1_h = abs(c_h0 - c_h) / abs(c_h0)
    flux = 0.5 * g * t * (snapshot.h[-1] ** 2 - snapshot.h[0] ** 2)
    c1_uh = abs(c_uh0 - c_uh - flux)
    c1_ham = abs(c_ham0 - c_ham) / abs(c_ham0)
    return c1_h, c1_uh, c1_ham


def _fine_at_coarse_centers(coarse: Snapshot, fine: Snapshot, values):
    """Fine-grid values at the coarse cell centres.

    Cell-centred layouts do not share centres across a refinement, so each
    coarse centre sits on a fine-cell face: the two straddling fine cells
    are averaged (second order, consistent with the schemes).
    """
    nc, nf = len(coarse.x), len(fine.x)
    if nf % nc != 0:
        raise ValueError(f"fine grid size {nf} is not a multiple of {nc}")
    r = nf // nc
    if r & (r - 1):
        raise ValueError(f"refinement ratio {r} is not a power of two")
    a_c = coarse.x[0] - 0.5 * coarse.dx
    a_f = fine.x[0] - 0.5 * fine.dx
    if abs(a_c - a_f) > 1e-9 * max(1.0, abs(a_c)):
        raise ValueError(f"grids misaligned at left edge: {a_c} vs {a_f}")
    if r == 1:
        return np.asarray(values)
    idx = np.arange(nc) * r + r // 2
    values = np.asarray(values)
    return 0.5 * (values[idx - 1] + values[idx])


def l1_difference(coarse: Snapshot, fine: Snapshot, quantity: str,
                  exclude_window=None) -> float:
    """Relative nested-grid difference, evaluated on the coarse centres.

    exclude_window = (lo, hi) omits coarse centres inside [lo, hi] from
    both sums.
    """
    if quantity not in ("h", "u"):
        raise ValueError("quantity must be 'h' or 'u'")
    q_coarse = getattr(coarse, quantity)
    q_fine = _fine_at_coarse_centers(coarse, fine, getattr(fine, quantity))
    keep = np.ones(len(coarse.x), dtype=bool)
    if exclude_window is not None:
        lo, hi = exclude_window
        keep &= (coarse.x < lo) | (coarse.x > hi)
    num = np.abs(q_coarse[keep] - q_fine[keep]).sum()
    den = np.abs(q_fine[keep]).sum()
    return float(num / den)


def leading_wave(snapshot: Snapshot, h0: float, delta: float,
                 prominence: float = 1e-10):
    """Rightmost crest of the bore: (position, crest depth), or None.

    Crests are local maxima of h exceeding h0 + delta; the position is
    refined sub-cell by the three-point parabola through the crest.  The
    prominence floor rejects round-off wiggles on flat plateaus.
    """
    h = snapshot.h
    x = snapshot.x
    interior = slice(1, -1)
    is_max = ((h[1:-1] >= h[:-2]) & (h[1:-1] >= h[2:])
              & ((h[1:-1] > h[:-2] + prominence)
                 | (h[1:-1] > h[2:] + prominence)))
    qualifying = np.flatnonzero(is_max & (h[interior] > h0 + delta)) + 1
    if len(qualifying) == 0:
        return None
    i = int(qualifying[-1])
    denom = h[i - 1] - 2.0 * h[i] + h[i + 1]
    if denom == 0.0:
        return float(x[i]), float(h[i])
    shift = 0.5 * (h[i - 1] - h[i + 1]) / denom
    x_a = x[i] + shift * snapshot.dx
    a = h[i] - 0.25 * (h[i - 1] - h[i + 1]) * shift
    return float(x_a), float(a)


def bore_means(snapshot: Snapshot, sol: SwweSolution, t: float):
    """Mean depth and velocity over the 100 m window centred on x_u2.

    Returns (h_mean, u_mean, clipped); clipped flags a window cut by the
    domain ends.
    """
    x_u2 = sol.x_u2(t)
    lo, hi = x_u2 - 50.0, x_u2 + 50.0
    clipped = lo < snapshot.x[0] or hi > snapshot.x[-1]
    mask = (snapshot.x >= lo) & (snapshot.x <= hi)
    if not np.any(mask):
        raise ValueError("bore window contains no cells")
    return (float(snapshot.h[mask].mean()), float(snapshot.u[mask].mean()),
            clipped)


def _extrema_indices(h):
    """Indices of strict local maxima and minima of a sampled profile."""
    d = np.diff(h)
    s = np.sign(d)
    # carry the previous nonzero slope sign across flat runs
    nz = s != 0
    if not np.any(nz):
        return np.array([], dtype=int)
    filled = np.where(nz, s, 0)
    last = 0.0
    for i in range(len(filled)):
        if filled[i] == 0:
            filled[i] = last
        else:
            last = filled[i]
    changes = np.flatnonzero(filled[1:] * filled[:-1] < 0) + 1
    return changes


def oscillation_amplitude(snapshot: Snapshot, lo: float, hi: float) -> float:
    """Half the crest-to-trough height of oscillations inside [lo, hi].

    Zero when fewer than two extrema fall inside the window.
    """
    idx = _extrema_indices(snapshot.h)
    if len(idx) == 0:
        return 0.0
    in_window = (snapshot.x[idx] >= lo) & (snapshot.x[idx] <= hi)
    vals = snapshot.h[idx[in_window]]
    if len(vals) < 2:
        return 0.0
    return 0.5 * float(vals.max() - vals.min())


def classify_structure(snapshot: Snapshot, sol: SwweSolution, t: float,
                       eps1: float = OSCILLATION_FLOOR,
                       rho: float = AMPLITUDE_RATIO) -> str:
    """Label the bore interior as one of the four canonical structures.

    Oscillation amplitudes are measured in the 20 m window centred on
    x_u2 and on the two adjacent 20 m flank windows; the whole span
    between the rarefaction tail and the shock decides the non-oscillatory
    case.
    """
    if not t > 0:
        raise ValueError("classification needs t > 0")
    x_u2 = sol.x_u2(t)
    if not snapshot.x[0] <= x_u2 <= snapshot.x[-1]:
        return "Unclassified"
    c2 = math.sqrt(sol.g * sol.h2)
    x_tail = sol.x0 + t * (sol.u2 - c2)
    x_front = sol.x_shock(t)

    amp_all = oscillation_amplitude(snapshot, x_tail, x_front)
    if amp_all < eps1:
        return "S1"
    amp_mid = oscillation_amplitude(snapshot, x_u2 - 10.0, x_u2 + 10.0)
    amp_lf = oscillation_amplitude(snapshot, x_u2 - 30.0, x_u2 - 10.0)
    amp_rf = oscillation_amplitude(snapshot, x_u2 + 10.0, x_u2 + 30.0)
    if amp_mid < eps1 and max(amp_lf, amp_rf) >= eps1:
        return "S2"
    if amp_mid < rho * min(amp_lf, amp_rf):
        return "S3"
    if amp_mid > max(amp_lf, amp_rf) / rho:
        return "S4"
    return "Unclassified"


def diagnose(snapshot: Snapshot, g: float, totals_0=None,
             sol: SwweSolution | None = None, h0: float | None = None,
             delta: float | None = None) -> DiagnosticsRecord:
    """Assemble the full diagnostics row for one snapshot."""
    c_star = totals(snapshot, g)
    record = DiagnosticsRecord(t=snapshot.t, C_star_h=c_star[0],
                               C_star_uh=c_star[1], C_star_H=c_star[2])
    if totals_0 is not None:
        record.C1_h, record.C1_uh, record.C1_H = conservation_error(
            totals_0, snapshot, g, snapshot.t, totals_t=c_star)
    if sol is not None and snapshot.t > 0:
        record.structure = classify_structure(snapshot, sol, snapshot.t)
        if h0 is not None and delta is not None:
            crest = leading_wave(snapshot, h0, delta)
            if crest is not None:
                record.x_A, record.A = crest
        means = bore_means(snapshot, sol, snapshot.t)
        record.h_mean, record.u_mean = means[0], means[1]
    return record
