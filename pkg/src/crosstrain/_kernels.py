"""Compiled scalar kernels for the recourse problem.

All kernels take plain floats so they can be called from Python for a single
scenario or looped over arrays by the ``*_batch`` drivers. The closed-form
kernels assume the normalized labelling ``h_alpha <= h_gamma``.

Region codes follow the enumeration order 1a, 1b, 1c, 2a, 2b, 3, 4a, 4b, 5a,
5b, 6a, 6b (codes 0..11).
"""

from __future__ import annotations

import numpy as np
from numba import njit

R1A, R1B, R1C, R2A, R2B, R3, R4A, R4B, R5A, R5B, R6A, R6B = range(12)
NO_TABLE = 1

# detail column layout shared by both evaluators
COLS = ("cost", "train_alpha", "train_gamma", "lost_alpha", "lost_gamma",
        "flex_alpha", "flex_gamma", "region", "status")


@njit(cache=True)
def region_code(x0a, x0g, x1a, x1g, da, dg, d1a, d1g, d2a, d2g):
    if da <= x0a:
        if dg <= x0g:
            return R1A
        if dg <= x0g + d1g * min(x1g, x0a - da):
            return R1C
        if da <= x0a - x1g:
            if dg <= x0g + d1g * x1g + d2g * (x0a - x1g - da):
                return R5A
            return R5B
        if dg <= x0g + d1g * x1g:
            return R4A
        return R4B
    if dg <= x0g:
        if da <= x0a + d1a * min(x1a, x0g - dg):
            return R1B
        if dg <= x0g - x1a:
            if da <= x0a + d1a * x1a + d2a * (x0g - x1a - dg):
                return R2A
            return R2B
        return R3
    if dg <= x0g + d1g * x1g:
        return R6A
    return R6B


@njit(cache=True)
def closed_form(x0a, x0g, c2a, c2g, ha, hg, x1a, x1g, da, dg, d1a, d1g, d2a, d2g):
    """Piecewise formula for the scenario's region.

    Returns ``(cost, ta, tg, la, lg, fa, fg, region, status)``; status
    ``NO_TABLE`` flags a Case-2 scenario whose tasks disagree on online
    training, for which no formula table exists.
    """
    case1 = ha >= d1g * hg
    tra = c2a <= d2a * ha
    trg = c2g <= d2g * hg
    r = region_code(x0a, x0g, x1a, x1g, da, dg, d1a, d1g, d2a, d2g)
    ta = 0.0
    tg = 0.0
    la = 0.0
    lg = 0.0
    fa = 0.0
    fg = 0.0
    if not case1 and tra != trg:
        return np.nan, ta, tg, la, lg, fa, fg, r, NO_TABLE
    if r == R1B:
        fa = (da - x0a) / d1a
    elif r == R1C:
        fg = (dg - x0g) / d1g
    elif r == R2A or r == R2B:
        fa = x1a
        s = da - x0a - d1a * x1a
        if not tra:
            la = s
        elif r == R2A:
            ta = s / d2a
        else:
            ta = x0g - x1a - dg
            la = s - d2a * ta
    elif r == R3:
        fa = x0g - dg
        la = da - x0a - d1a * (x0g - dg)
    elif r == R5A or r == R5B:
        fg = x1g
        s = dg - x0g - d1g * x1g
        if not trg:
            lg = s
        elif r == R5A:
            tg = s / d2g
        else:
            tg = x0a - x1g - da
            lg = s - d2g * tg
    elif r == R4A or r == R4B:
        if case1:
            fg = x0a - da
            lg = dg - x0g - d1g * (x0a - da)
        elif r == R4A:
            fg = (dg - x0g) / d1g
            la = da - x0a + fg
        else:
            fg = x1g
            la = da - x0a + x1g
            lg = dg - x0g - d1g * x1g
    elif r == R6A or r == R6B:
        if case1:
            la = da - x0a
            lg = dg - x0g
        elif r == R6A:
            fg = (dg - x0g) / d1g
            la = da - x0a + fg
        else:
            fg = x1g
            la = da - x0a + x1g
            lg = dg - x0g - d1g * x1g
    cost = c2a * ta + c2g * tg + ha * la + hg * lg
    return cost, ta, tg, la, lg, fa, fg, r, 0


@njit(cache=True)
def greedy(fa, fg, x0a, x0g, c2a, c2g, ha, hg, x1a, x1g, da, dg, d1a, d1g, d2a, d2g):
    """Best completion once ``fa``/``fg`` cross-trained workers are reassigned.

    Only first-stage cross-trained workers move between tasks. Untrained
    workers cover their own task first, and those left idle may be trained
    online for the other task when that is strictly cheaper than losing the
    demand.
    """
    sa = max(da - min(da, x0a - fg) - d1a * fa, 0.0)
    sg = max(dg - min(dg, x0g - fa) - d1g * fg, 0.0)
    idle_a = max(0.0, x0a - x1g - da)
    idle_g = max(0.0, x0g - x1a - dg)
    ta = 0.0
    tg = 0.0
    if sa > 0.0 and c2a < d2a * ha:
        ta = min(idle_g, sa / d2a)
    if sg > 0.0 and c2g < d2g * hg:
        tg = min(idle_a, sg / d2g)
    la = max(sa - d2a * ta, 0.0)
    lg = max(sg - d2g * tg, 0.0)
    cost = c2a * ta + c2g * tg + ha * la + hg * lg
    return cost, ta, tg, la, lg


@njit(cache=True)
def oracle(x0a, x0g, c2a, c2g, ha, hg, x1a, x1g, da, dg, d1a, d1g, d2a, d2g):
    """Minimize the greedy completion over the allocation box by vertex enumeration.

    The completion cost is piecewise linear in ``(fa, fg)`` on the box
    ``[0, x1a] x [0, x1g]``; its kinks lie on the lines collected below, so a
    minimizer sits at an intersection of two of them. Returns the same tuple
    layout as :func:`closed_form` with region ``-1``.
    """
    c0, t0a, t0g, l0a, l0g = greedy(0.0, 0.0, x0a, x0g, c2a, c2g, ha, hg,
                                    x1a, x1g, da, dg, d1a, d1g, d2a, d2g)
    if c0 == 0.0:
        return 0.0, 0.0, 0.0, l0a, l0g, 0.0, 0.0, -1, 0
    idle_a = max(0.0, x0a - x1g - da)
    idle_g = max(0.0, x0g - x1a - dg)
    # lines a*fa + b*fg = c: the box edges, then for each task the points where
    # its own pool is exhausted, its shortfall hits zero, and its shortfall
    # equals what online training can cover
    L = np.empty((14, 3))
    L[0, 0] = 1.0; L[0, 1] = 0.0; L[0, 2] = 0.0
    L[1, 0] = 1.0; L[1, 1] = 0.0; L[1, 2] = x1a
    L[2, 0] = 0.0; L[2, 1] = 1.0; L[2, 2] = 0.0
    L[3, 0] = 0.0; L[3, 1] = 1.0; L[3, 2] = x1g
    L[4, 0] = 0.0; L[4, 1] = 1.0; L[4, 2] = x0a - da
    L[5, 0] = d1a; L[5, 1] = -1.0; L[5, 2] = da - x0a
    L[6, 0] = d1a; L[6, 1] = -1.0; L[6, 2] = da - x0a - d2a * idle_g
    L[7, 0] = d1a; L[7, 1] = 0.0; L[7, 2] = -d2a * idle_g
    L[8, 0] = 1.0; L[8, 1] = 0.0; L[8, 2] = x0g - dg
    L[9, 0] = -1.0; L[9, 1] = d1g; L[9, 2] = dg - x0g
    L[10, 0] = -1.0; L[10, 1] = d1g; L[10, 2] = dg - x0g - d2g * idle_a
    L[11, 0] = 0.0; L[11, 1] = d1g; L[11, 2] = -d2g * idle_a
    L[12, 0] = d1a; L[12, 1] = 0.0; L[12, 2] = da - x0a - d2a * idle_g
    L[13, 0] = 0.0; L[13, 1] = d1g; L[13, 2] = dg - x0g - d2g * idle_a

    scale = x0a + x0g + abs(da) + abs(dg) + 1.0
    eps = 1e-12 * scale
    best = c0
    bta = t0a
    btg = t0g
    bla = l0a
    blg = l0g
    bfa = 0.0
    bfg = 0.0
    nl = L.shape[0]
    for i in range(nl):
        for j in range(i + 1, nl):
            det = L[i, 0] * L[j, 1] - L[j, 0] * L[i, 1]
            if abs(det) < 1e-14:
                continue
            fa = (L[i, 2] * L[j, 1] - L[j, 2] * L[i, 1]) / det
            fg = (L[i, 0] * L[j, 2] - L[j, 0] * L[i, 2]) / det
            if fa < -eps or fa > x1a + eps or fg < -eps or fg > x1g + eps:
                continue
            fa = min(max(fa, 0.0), x1a)
            fg = min(max(fg, 0.0), x1g)
            c, ta, tg, la, lg = greedy(fa, fg, x0a, x0g, c2a, c2g, ha, hg,
                                       x1a, x1g, da, dg, d1a, d1g, d2a, d2g)
            tol = 1e-12 * max(abs(best), 1.0)
            better = c < best - tol
            if not better and c <= best + tol:
                tr_new = ta + tg
                tr_old = bta + btg
                if tr_new < tr_old - eps:
                    better = True
                elif tr_new <= tr_old + eps and fa + fg < bfa + bfg - eps:
                    better = True
            if better:
                best = c
                bta = ta
                btg = tg
                bla = la
                blg = lg
                bfa = fa
                bfg = fg
    return best, bta, btg, bla, blg, bfa, bfg, -1, 0


@njit(cache=True)
def closed_form_costs(p, x1a, x1g, da, dg, d1a, d1g, d2a, d2g, cost, train):
    """Fill per-scenario total and online-training cost; return the NO_TABLE count."""
    bad = 0
    for k in range(da.shape[0]):
        c, ta, tg, la, lg, fa, fg, r, st = closed_form(
            p[0], p[1], p[2], p[3], p[4], p[5], x1a, x1g,
            da[k], dg[k], d1a[k], d1g[k], d2a[k], d2g[k])
        if st != 0:
            bad += 1
        cost[k] = c
        train[k] = p[2] * ta + p[3] * tg
    return bad


@njit(cache=True)
def oracle_costs(p, x1a, x1g, da, dg, d1a, d1g, d2a, d2g, cost, train):
    for k in range(da.shape[0]):
        c, ta, tg, la, lg, fa, fg, r, st = oracle(
            p[0], p[1], p[2], p[3], p[4], p[5], x1a, x1g,
            da[k], dg[k], d1a[k], d1g[k], d2a[k], d2g[k])
        cost[k] = c
        train[k] = p[2] * ta + p[3] * tg
    return 0


@njit(cache=True)
def _store(out, k, res):
    c, ta, tg, la, lg, fa, fg, r, st = res
    out[k, 0] = c
    out[k, 1] = ta
    out[k, 2] = tg
    out[k, 3] = la
    out[k, 4] = lg
    out[k, 5] = fa
    out[k, 6] = fg
    out[k, 7] = r
    out[k, 8] = st


@njit(cache=True)
def closed_form_detail(p, x1a, x1g, da, dg, d1a, d1g, d2a, d2g, out):
    for k in range(da.shape[0]):
        res = closed_form(p[0], p[1], p[2], p[3], p[4], p[5], x1a[k], x1g[k],
                          da[k], dg[k], d1a[k], d1g[k], d2a[k], d2g[k])
        _store(out, k, res)


@njit(cache=True)
def oracle_detail(p, x1a, x1g, da, dg, d1a, d1g, d2a, d2g, out):
    for k in range(da.shape[0]):
        res = oracle(p[0], p[1], p[2], p[3], p[4], p[5], x1a[k], x1g[k],
                     da[k], dg[k], d1a[k], d1g[k], d2a[k], d2g[k])
        _store(out, k, res)
