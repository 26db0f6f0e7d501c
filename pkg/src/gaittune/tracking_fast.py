"""Numba kernels for the tracker hot path (backward pass + rollout).

Specialized to the point-mass model and the (f_z, cop) control
parametrization. The generic numpy implementations in ``tracking`` remain
the reference; these kernels must produce the same trajectories up to
floating-point roundoff and are exercised against them in the tests.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep of the env
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap

__all__ = ["HAVE_NUMBA", "backward_core", "rollout_core"]

NX = 6
NU = 3


@njit(cache=True)
def _chol(a):
    """Cholesky of a small SPD matrix; returns (L, ok)."""
    n = a.shape[0]
    chol = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            s = a[i, j]
            for k in range(j):
                s -= chol[i, k] * chol[j, k]
            if i == j:
                if s <= 0.0:
                    return chol, False
                chol[i, i] = np.sqrt(s)
            else:
                chol[i, j] = s / chol[j, j]
    return chol, True


@njit(cache=True)
def _chol_solve(chol, b):
    n = chol.shape[0]
    y = np.zeros(n)
    for i in range(n):
        s = b[i]
        for k in range(i):
            s -= chol[i, k] * y[k]
        y[i] = s / chol[i, i]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        s = y[i]
        for k in range(i + 1, n):
            s -= chol[k, i] * x[k]
        x[i] = s / chol[i, i]
    return x


@njit(cache=True)
def _box_qp(q_uu, q_u, lo, hi):
    """Projected Newton on a tiny box QP; returns (d, free_mask, ok)."""
    n = q_u.shape[0]
    d = np.zeros(n)
    for i in range(n):
        if d[i] < lo[i]:
            d[i] = lo[i]
        elif d[i] > hi[i]:
            d[i] = hi[i]
    free = np.ones(n, np.bool_)
    for _ in range(12):
        g = q_u + q_uu @ d
        n_free = 0
        for i in range(n):
            clamped = ((d[i] <= lo[i] + 1e-12 and g[i] > 0.0)
                       or (d[i] >= hi[i] - 1e-12 and g[i] < 0.0))
            free[i] = not clamped
            if free[i]:
                n_free += 1
        gmax = 0.0
        for i in range(n):
            if free[i] and abs(g[i]) > gmax:
                gmax = abs(g[i])
        if gmax < 1e-10:
            break
        if n_free == 0:
            break
        sub = np.zeros((n_free, n_free))
        gsub = np.zeros(n_free)
        idx = np.zeros(n_free, np.int64)
        r = 0
        for i in range(n):
            if free[i]:
                idx[r] = i
                gsub[r] = g[i]
                r += 1
        for r in range(n_free):
            for c in range(n_free):
                sub[r, c] = q_uu[idx[r], idx[c]]
        chol, ok = _chol(sub)
        if not ok:
            return d, free, False
        stp = _chol_solve(chol, gsub)
        moved = 0.0
        for r in range(n_free):
            i = idx[r]
            new = d[i] - stp[r]
            if new < lo[i]:
                new = lo[i]
            elif new > hi[i]:
                new = hi[i]
            moved = max(moved, abs(new - d[i]))
            d[i] = new
        if moved < 1e-12:
            break
    return d, free, True


@njit(cache=True)
def backward_core(a_seq, b_seq, lx, lu, lxx, luu, u_seq, lo_seq, hi_seq, reg):
    """Riccati sweep; returns (u_ff, gains, dv1, dv2, ok)."""
    h = u_seq.shape[0]
    u_ff = np.zeros((h, NU))
    gains = np.zeros((h, NU, NX))
    v_x = lx[h].copy()
    v_xx = lxx[h].copy()
    dv1 = 0.0
    dv2 = 0.0
    for k in range(h - 1, -1, -1):
        a_mat = a_seq[k]
        b_mat = b_seq[k]
        vxx_a = v_xx @ a_mat
        q_x = lx[k] + a_mat.T @ v_x
        q_u = lu[k] + b_mat.T @ v_x
        q_xx = lxx[k] + a_mat.T @ vxx_a
        q_ux = b_mat.T @ vxx_a
        q_uu = luu[k] + b_mat.T @ (v_xx @ b_mat)
        for i in range(NU):
            q_uu[i, i] += reg
        q_uu = 0.5 * (q_uu + q_uu.T)
        chol, ok = _chol(q_uu)
        if not ok:
            return u_ff, gains, dv1, dv2, False
        lo = lo_seq[k] - u_seq[k]
        hi = hi_seq[k] - u_seq[k]
        d = -_chol_solve(chol, q_u)
        inside = True
        for i in range(NU):
            if d[i] < lo[i] or d[i] > hi[i]:
                inside = False
                break
        gain = np.zeros((NU, NX))
        if inside:
            for j in range(NX):
                gain[:, j] = -_chol_solve(chol, q_ux[:, j])
        else:
            d, free, okb = _box_qp(q_uu, q_u, lo, hi)
            if not okb:
                return u_ff, gains, dv1, dv2, False
            n_free = 0
            for i in range(NU):
                if free[i]:
                    n_free += 1
            if n_free > 0:
                idx = np.zeros(n_free, np.int64)
                r = 0
                for i in range(NU):
                    if free[i]:
                        idx[r] = i
                        r += 1
                sub = np.zeros((n_free, n_free))
                for r in range(n_free):
                    for c in range(n_free):
                        sub[r, c] = q_uu[idx[r], idx[c]]
                chs, oks = _chol(sub)
                if not oks:
                    return u_ff, gains, dv1, dv2, False
                for j in range(NX):
                    col = np.zeros(n_free)
                    for r in range(n_free):
                        col[r] = q_ux[idx[r], j]
                    sol = _chol_solve(chs, col)
                    for r in range(n_free):
                        gain[idx[r], j] = -sol[r]
        u_ff[k] = d
        gains[k] = gain
        quu_d = q_uu @ d
        dv1 += d @ q_u
        dv2 += 0.5 * (d @ quu_d)
        v_x = q_x + gain.T @ (quu_d + q_u) + q_ux.T @ d
        v_xx = q_xx + gain.T @ (q_uu @ gain) + gain.T @ q_ux + q_ux.T @ gain
        v_xx = 0.5 * (v_xx + v_xx.T)
    return u_ff, gains, dv1, dv2, True


@njit(cache=True)
def rollout_core(x0, x_nom, u_nom, u_ff, gains, lo_seq, hi_seq, step, dt,
                 mass, gravity, pos_ref, vel_ref, foot_ref, height_ref,
                 hover, w_pos, w_vel, w_cop, w_force, w_height, w_vz, eps):
    """Line-search rollout with the point-mass dynamics and stage cost inline."""
    h = u_nom.shape[0]
    xs = np.zeros((h + 1, NX))
    us = np.zeros((h, NU))
    xs[0] = x0
    cost = 0.0
    for k in range(h):
        x = xs[k]
        u = u_nom[k] + step * u_ff[k] + gains[k] @ (x - x_nom[k])
        for i in range(NU):
            if u[i] < lo_seq[k, i]:
                u[i] = lo_seq[k, i]
            elif u[i] > hi_seq[k, i]:
                u[i] = hi_seq[k, i]
        us[k] = u
        # stage cost
        for i in range(2):
            e = x[i] - pos_ref[k, i]
            cost += w_pos * (np.sqrt(e * e + eps * eps) - eps)
            ev = x[3 + i] - vel_ref[k, i]
            cost += w_vel * ev * ev
            ec = u[1 + i] - foot_ref[k, i]
            cost += w_cop * ec * ec
        eh = x[2] - height_ref
        cost += w_height * eh * eh + w_vz * x[5] * x[5]
        ef = u[0] - hover
        cost += w_force * ef * ef
        # dynamics
        z_c = x[2] if x[2] > 0.2 else 0.2
        ax = u[0] * (x[0] - u[1]) / (mass * z_c)
        ay = u[0] * (x[1] - u[2]) / (mass * z_c)
        az = u[0] / mass - gravity
        vx = x[3] + ax * dt
        vy = x[4] + ay * dt
        vz = x[5] + az * dt
        xs[k + 1, 0] = x[0] + vx * dt
        xs[k + 1, 1] = x[1] + vy * dt
        xs[k + 1, 2] = x[2] + vz * dt
        xs[k + 1, 3] = vx
        xs[k + 1, 4] = vy
        xs[k + 1, 5] = vz
    # terminal cost
    x = xs[h]
    for i in range(2):
        e = x[i] - pos_ref[h, i]
        cost += w_pos * (np.sqrt(e * e + eps * eps) - eps)
        ev = x[3 + i] - vel_ref[h, i]
        cost += w_vel * ev * ev
    eh = x[2] - height_ref
    cost += w_height * eh * eh + w_vz * x[5] * x[5]
    return xs, us, cost
