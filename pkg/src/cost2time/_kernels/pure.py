"""Pure-numpy fallback implementations of the hot kernels.

These mirror the native Cython kernels operation-for-operation so both
backends produce identical results: squared distances accumulate feature by
feature in index order, ties resolve to the lowest index, and the SMO scalar
arithmetic follows the same IEEE evaluation order (the extension is built
with FP contraction disabled).
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "pure"


def knn_select(pool: np.ndarray, x: np.ndarray, k: int) -> list[int]:
    """Indices of the ``k`` pool rows nearest to ``x`` (squared Euclidean).

    Results are ordered by ascending (distance, insertion index); ties at any
    distance resolve to the lower index.
    """
    n, d = pool.shape
    dist = np.zeros(n)
    for j in range(d):
        diff = pool[:, j] - x[j]
        dist += diff * diff
    order = np.argsort(dist, kind="stable")
    return [int(i) for i in order[:k]]


def _phi(t: float, eta: float, slope: float, eps: float, bi: float, bj: float) -> float:
    # Objective change along direction (+t on i, -t on j), constants dropped.
    return 0.5 * eta * t * t + slope * t + eps * abs(bi + t) + eps * abs(bj - t)


def smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    eps: float,
    tol: float,
    max_updates: int,
) -> tuple[np.ndarray, float, int, bool]:
    """Solve the epsilon-insensitive SVR dual by pairwise coordinate descent.

    Minimizes 0.5 b'Kb - y'b + eps*|b|_1 over sum(b)=0, |b_i| <= C. Each step
    picks the maximal-KKT-violating pair and solves the one-dimensional
    subproblem exactly. Returns (duals, bias, updates_used, converged).
    """
    n = len(y)
    beta = np.zeros(n)
    g = -y.astype(float).copy()  # gradient of the smooth part: K beta - y
    neg_inf = float("-inf")
    pos_inf = float("inf")

    updates = 0
    converged = False
    while True:
        F = -g
        can_up = beta < C
        can_down = beta > -C
        L = np.where(beta >= 0.0, F - eps, F + eps)
        U = np.where(beta > 0.0, F - eps, F + eps)
        L_masked = np.where(can_up, L, neg_inf)
        U_masked = np.where(can_down, U, pos_inf)
        i = int(np.argmax(L_masked))
        j = int(np.argmin(U_masked))
        max_l = float(L_masked[i])
        min_u = float(U_masked[j])
        if max_l - min_u < tol:
            converged = True
            break
        if updates >= max_updates:
            break

        bi = float(beta[i])
        bj = float(beta[j])
        eta = float(K[i, i]) + float(K[j, j]) - 2.0 * float(K[i, j])
        slope = float(g[i]) - float(g[j])
        t_lo = max(-C - bi, bj - C)
        t_hi = min(C - bi, bj + C)

        candidates = [t_lo, t_hi]
        for t in (-bi, bj):
            if t < t_lo:
                t = t_lo
            elif t > t_hi:
                t = t_hi
            candidates.append(t)
        if eta > 0.0:
            t0 = -slope / eta
            shift = 2.0 * eps / eta
            for t in (t0, t0 - shift, t0 + shift):
                if t < t_lo:
                    t = t_lo
                elif t > t_hi:
                    t = t_hi
                candidates.append(t)

        base = _phi(0.0, eta, slope, eps, bi, bj)
        best_t = 0.0
        best_phi = base
        for t in candidates:
            value = _phi(t, eta, slope, eps, bi, bj)
            if value < best_phi:
                best_phi = value
                best_t = t
        if best_t == 0.0:
            break  # numerically stalled despite a KKT violation

        # Clamp against last-ulp overshoot so |beta| <= C holds exactly.
        new_i = bi + best_t
        if new_i > C:
            new_i = C
        elif new_i < -C:
            new_i = -C
        new_j = bj - best_t
        if new_j > C:
            new_j = C
        elif new_j < -C:
            new_j = -C
        beta[i] = new_i
        beta[j] = new_j
        g += best_t * (K[i] - K[j])
        updates += 1

    bias = (max_l + min_u) / 2.0
    if bias == neg_inf or bias == pos_inf or bias != bias:
        bias = 0.0
    return beta, bias, updates, converged
