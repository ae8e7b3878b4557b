"""Hot numeric kernels: NCCF pitch frames and the SMO dual solver.

Each kernel has two implementations: a numba @njit version with explicit
loops and a vectorized pure-numpy fallback. The active path is chosen at
import time; set RFA_PURE_NUMPY=1 to force the numpy path (the fallback is
also used automatically when numba is not importable). Both variants stay
importable so tests and benchmarks/bench_kernels.py can compare them.
"""

import os

import numpy as np


def _want_numba() -> bool:
    flag = os.environ.get("RFA_PURE_NUMPY", "").strip()
    if flag not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USE_NUMBA = _want_numba()


# ---------------------------------------------------------------------------
# NCCF: normalized cross-correlation frames for pitch tracking.
# Frame i starts at i*hop and needs frame_len+lag_max samples of lookahead;
# frames that would run past the signal end are not emitted.
# ---------------------------------------------------------------------------

def nccf_frame_count(n_samples: int, frame_len: int, hop: int, lag_max: int) -> int:
    span = n_samples - frame_len - lag_max
    return 0 if span < 0 else span // hop + 1


def nccf_matrix_numpy(x, frame_len, hop, lag_min, lag_max):
    """NCCF(frame, lag) for lag in [lag_min, lag_max], vectorized per frame."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    n_frames = nccf_frame_count(len(x), frame_len, hop, lag_max)
    n_lags = lag_max - lag_min + 1
    out = np.zeros((n_frames, n_lags))
    lags = np.arange(lag_min, lag_max + 1)
    for i in range(n_frames):
        seg = x[i * hop : i * hop + frame_len + lag_max]
        w0 = seg[:frame_len]
        e0 = float(np.dot(w0, w0))
        if e0 <= 0.0:
            continue
        windows = np.lib.stride_tricks.sliding_window_view(seg, frame_len)
        num = windows[lags] @ w0
        csq = np.concatenate(([0.0], np.cumsum(seg * seg)))
        e_lag = csq[lags + frame_len] - csq[lags]
        denom = np.sqrt(e0 * np.maximum(e_lag, 0.0))
        np.divide(num, denom, out=out[i], where=denom > 0.0)
    return out


# ---------------------------------------------------------------------------
# SMO: maximal-violating-pair solver for the RBF-SVM dual.
# Works on a precomputed kernel matrix; F[t] = sum_s alpha_s y_s K[t,s] - y[t].
# Stops when the KKT violation gap m - M drops to tol. Returns the per-
# iteration dual objective so monotonicity is checkable.
# ---------------------------------------------------------------------------

def smo_solve_numpy(K, y, C, tol=1e-3, max_iter=100_000):
    """Solve the SVM dual. Returns (alphas, bias, n_iter, converged, obj_trace)."""
    n = len(y)
    y = np.asarray(y, dtype=np.float64)
    K = np.asarray(K, dtype=np.float64)
    alphas = np.zeros(n)
    F = -y.copy()
    obj = np.empty(max_iter)
    it = 0
    converged = False
    while it < max_iter:
        up = ((y > 0) & (alphas < C)) | ((y < 0) & (alphas > 0))
        low = ((y > 0) & (alphas > 0)) | ((y < 0) & (alphas < C))
        neg_f = -F
        m_val = np.max(neg_f[up]) if up.any() else -np.inf
        big_m = np.min(neg_f[low]) if low.any() else np.inf
        if m_val - big_m <= tol:
            converged = True
            break
        i = int(np.flatnonzero(up)[np.argmax(neg_f[up])])
        j = int(np.flatnonzero(low)[np.argmin(neg_f[low])])

        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta <= 1e-12:
            eta = 1e-12
        aj_old, ai_old = alphas[j], alphas[i]
        aj = aj_old + y[j] * (F[i] - F[j]) / eta
        if y[i] != y[j]:
            lo_b, hi_b = max(0.0, aj_old - ai_old), min(C, C + aj_old - ai_old)
        else:
            lo_b, hi_b = max(0.0, ai_old + aj_old - C), min(C, ai_old + aj_old)
        aj = min(max(aj, lo_b), hi_b)
        ai = ai_old + y[i] * y[j] * (aj_old - aj)
        # snap fp dust to the exact bound so working-set membership stays honest
        ai = 0.0 if ai < 1e-10 else (C if ai > C - 1e-10 else ai)
        aj = 0.0 if aj < 1e-10 else (C if aj > C - 1e-10 else aj)
        alphas[i], alphas[j] = ai, aj
        F += (ai - ai_old) * y[i] * K[:, i] + (aj - aj_old) * y[j] * K[:, j]

        g_dot = float(np.dot(alphas, y * F))
        obj[it] = (alphas.sum() - g_dot) / 2.0
        it += 1

    bias = _bias_from_state(alphas, y, F, C)
    return alphas, bias, it, converged, obj[:it]


def _bias_from_state(alphas, y, F, C):
    free = (alphas > 1e-12) & (alphas < C - 1e-12)
    if free.any():
        return float(np.mean(-F[free]))
    up = ((y > 0) & (alphas < C)) | ((y < 0) & (alphas > 0))
    low = ((y > 0) & (alphas > 0)) | ((y < 0) & (alphas < C))
    m_val = np.max(-F[up]) if up.any() else 0.0
    big_m = np.min(-F[low]) if low.any() else 0.0
    return float((m_val + big_m) / 2.0)


nccf_matrix_numba = None
smo_solve_numba = None

if USE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _nccf_jit(x, frame_len, hop, lag_min, lag_max, n_frames):
        n_lags = lag_max - lag_min + 1
        out = np.zeros((n_frames, n_lags))
        for i in range(n_frames):
            m = i * hop
            e0 = 0.0
            for a in range(frame_len):
                e0 += x[m + a] * x[m + a]
            if e0 <= 0.0:
                continue
            # roll the lagged-window energy from lag 0 up to lag_max
            e_lag = e0
            for tau in range(1, lag_min + 1):
                e_lag += x[m + tau - 1 + frame_len] * x[m + tau - 1 + frame_len]
                e_lag -= x[m + tau - 1] * x[m + tau - 1]
            for t_idx in range(n_lags):
                tau = lag_min + t_idx
                if t_idx > 0:
                    e_lag += x[m + tau - 1 + frame_len] * x[m + tau - 1 + frame_len]
                    e_lag -= x[m + tau - 1] * x[m + tau - 1]
                e_l = e_lag if e_lag > 0.0 else 0.0
                denom = np.sqrt(e0 * e_l)
                if denom > 0.0:
                    num = 0.0
                    for a in range(frame_len):
                        num += x[m + a] * x[m + a + tau]
                    out[i, t_idx] = num / denom
        return out

    def nccf_matrix_numba(x, frame_len, hop, lag_min, lag_max):
        x = np.ascontiguousarray(x, dtype=np.float64)
        n_frames = nccf_frame_count(len(x), frame_len, hop, lag_max)
        return _nccf_jit(x, frame_len, hop, lag_min, lag_max, n_frames)

    @njit(cache=True)
    def _smo_jit(K, y, C, tol, max_iter):
        n = len(y)
        alphas = np.zeros(n)
        F = -y.copy()
        obj = np.empty(max_iter)
        it = 0
        converged = False
        while it < max_iter:
            m_val = -np.inf
            big_m = np.inf
            i = -1
            j = -1
            for t in range(n):
                neg_f = -F[t]
                if (y[t] > 0 and alphas[t] < C) or (y[t] < 0 and alphas[t] > 0):
                    if neg_f > m_val:
                        m_val = neg_f
                        i = t
                if (y[t] > 0 and alphas[t] > 0) or (y[t] < 0 and alphas[t] < C):
                    if neg_f < big_m:
                        big_m = neg_f
                        j = t
            if i < 0 or j < 0 or m_val - big_m <= tol:
                converged = True
                break

            eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
            if eta <= 1e-12:
                eta = 1e-12
            aj_old = alphas[j]
            ai_old = alphas[i]
            aj = aj_old + y[j] * (F[i] - F[j]) / eta
            if y[i] != y[j]:
                lo_b = max(0.0, aj_old - ai_old)
                hi_b = min(C, C + aj_old - ai_old)
            else:
                lo_b = max(0.0, ai_old + aj_old - C)
                hi_b = min(C, ai_old + aj_old)
            if aj < lo_b:
                aj = lo_b
            elif aj > hi_b:
                aj = hi_b
            ai = ai_old + y[i] * y[j] * (aj_old - aj)
            # snap fp dust to the exact bound so working-set membership stays honest
            if ai < 1e-10:
                ai = 0.0
            elif ai > C - 1e-10:
                ai = C
            if aj < 1e-10:
                aj = 0.0
            elif aj > C - 1e-10:
                aj = C
            alphas[i] = ai
            alphas[j] = aj
            d_i = (ai - ai_old) * y[i]
            d_j = (aj - aj_old) * y[j]
            for t in range(n):
                F[t] += d_i * K[t, i] + d_j * K[t, j]

            g_dot = 0.0
            a_sum = 0.0
            for t in range(n):
                g_dot += alphas[t] * y[t] * F[t]
                a_sum += alphas[t]
            obj[it] = (a_sum - g_dot) / 2.0
            it += 1
        return alphas, F, it, converged, obj[:it]

    def smo_solve_numba(K, y, C, tol=1e-3, max_iter=100_000):
        K = np.ascontiguousarray(K, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        alphas, F, it, converged, obj = _smo_jit(K, y, float(C), float(tol), int(max_iter))
        bias = _bias_from_state(alphas, y, F, C)
        return alphas, bias, it, converged, obj

    nccf_matrix = nccf_matrix_numba
    smo_solve = smo_solve_numba
else:
    nccf_matrix = nccf_matrix_numpy
    smo_solve = smo_solve_numpy
