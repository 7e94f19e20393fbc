"""Compiled inner loops for sparse Bayesian training.

The outer alpha loop runs hundreds of cheap iterations on small matrices, so
it is compiled with numba; per-call numpy overhead would otherwise dominate.
Status codes: 0 ok, 1 precision not positive definite even with jitter,
2 non-finite iterate.
"""
import numpy as np
from numba import njit

MAX_JITTER = 1e-4
OK, NOT_PD, NON_FINITE = 0, 1, 2


@njit(cache=True)
def expit(y):
    out = np.empty_like(y)
    for n in range(y.size):
        if y[n] >= 0.0:
            out[n] = 1.0 / (1.0 + np.exp(-y[n]))
        else:
            e = np.exp(y[n])
            out[n] = e / (1.0 + e)
    return out


@njit(cache=True)
def bernoulli_objective(y, t, w, alphas):
    # sum t*y - log(1 + e^y)  - 1/2 w'Aw
    total = 0.0
    for n in range(y.size):
        yn = y[n]
        if yn > 0.0:
            softplus = yn + np.log1p(np.exp(-yn))
        else:
            softplus = np.log1p(np.exp(yn))
        total += t[n] * yn - softplus
    for i in range(w.size):
        total -= 0.5 * alphas[i] * w[i] * w[i]
    return total


@njit(cache=True)
def cholesky_jitter(P, jitter):
    """Lower Cholesky factor, adding doubling jitter on failure; -1 jitter = failed."""
    try:
        return np.linalg.cholesky(P), 0.0
    except Exception:
        pass
    eps = max(jitter, 1e-10)
    m = P.shape[0]
    while eps <= MAX_JITTER:
        Q = P.copy()
        for i in range(m):
            Q[i, i] += eps
        try:
            return np.linalg.cholesky(Q), eps
        except Exception:
            eps *= 2.0
    return np.empty((0, 0)), -1.0


@njit(cache=True)
def cho_solve(L, b):
    m = b.size
    z = np.empty(m)
    for i in range(m):
        acc = b[i]
        for j in range(i):
            acc -= L[i, j] * z[j]
        z[i] = acc / L[i, i]
    x = np.empty(m)
    for i in range(m - 1, -1, -1):
        acc = z[i]
        for j in range(i + 1, m):
            acc -= L[j, i] * x[j]
        x[i] = acc / L[i, i]
    return x


@njit(cache=True)
def triangular_inverse(L):
    """L^-1 for lower-triangular L, built row by row with contiguous updates."""
    m = L.shape[0]
    X = np.zeros((m, m))
    for i in range(m):
        X[i, i] = 1.0
        for r in range(i):
            c = L[i, r]
            if c != 0.0:
                for j in range(r + 1):
                    X[i, j] -= c * X[r, j]
        inv = 1.0 / L[i, i]
        for j in range(i + 1):
            X[i, j] *= inv
    return X


@njit(cache=True)
def gram_of_inverse(X):
    """X' X for X = L^-1, i.e. (L L')^-1; exactly symmetric."""
    S = np.ascontiguousarray(X.T) @ X
    return 0.5 * (S + S.T)


@njit(cache=True)
def diag_of_inverse(X):
    """diag(X' X) without forming the product."""
    m = X.shape[0]
    d = np.zeros(m)
    for i in range(m):
        for j in range(i + 1):
            d[j] += X[i, j] * X[i, j]
    return d


@njit(cache=True)
def inverse_from_cholesky(L):
    return gram_of_inverse(triangular_inverse(L))


@njit(cache=True)
def bernoulli_precision(H, s, alphas):
    root = np.sqrt(s * (1.0 - s))
    # flush curvature weights whose squares would be subnormal
    root[root < 1e-150] = 0.0
    Hb = H * root.reshape(-1, 1)
    P = np.ascontiguousarray(Hb.T) @ Hb
    for i in range(alphas.size):
        P[i, i] += alphas[i]
    return P


@njit(cache=True)
def irls_factor(H, t, alphas, w0, tol, max_iter, jitter):
    """Newton/IRLS for the Bernoulli posterior mode with step halving.

    Returns (w, L, converged, n_iter, jitter_used, status) with
    L L' = H'BH + A.  On convergence L is the factor from the last Newton
    step, taken at most ``tol`` (max-abs) away from the returned mode.
    """
    w = w0.copy()
    y = H @ w
    f = bernoulli_objective(y, t, w, alphas)
    HT = np.ascontiguousarray(H.T)
    n_iter = 0
    for it in range(1, max_iter + 1):
        n_iter = it
        s = expit(y)
        grad = HT @ (t - s) - alphas * w
        L, jit = cholesky_jitter(bernoulli_precision(H, s, alphas), jitter)
        if jit < 0.0:
            return w, L, False, n_iter, jit, NOT_PD
        step = cho_solve(L, grad)
        if not np.all(np.isfinite(step)):
            return w, L, False, n_iter, jit, NON_FINITE
        if step.size == 0 or np.max(np.abs(step)) < tol:
            return w + step, L, True, n_iter, jit, OK
        floor = f - 1e-12 * abs(f)
        lam = 1.0
        while True:
            w_new = w + lam * step
            y_new = H @ w_new
            f_new = bernoulli_objective(y_new, t, w_new, alphas)
            if f_new >= floor or lam < 2.0**-10:
                break
            lam *= 0.5
        if f_new < floor:
            # no ascent along the Newton direction: at the mode up to round-off
            return w, L, True, n_iter, jit, OK
        w, y, f = w_new, y_new, f_new
    if not np.all(np.isfinite(w)):
        return w, np.empty((0, 0)), False, n_iter, 0.0, NON_FINITE
    L, jit = cholesky_jitter(bernoulli_precision(H, expit(y), alphas), jitter)
    if jit < 0.0:
        return w, L, False, n_iter, jit, NOT_PD
    return w, L, False, n_iter, jit, OK


@njit(cache=True)
def irls(H, t, alphas, w0, tol, max_iter, jitter):
    """:func:`irls_factor` with the covariance instead of its factor."""
    w, L, converged, n_iter, jit, status = irls_factor(H, t, alphas, w0, tol, max_iter, jitter)
    if status != OK:
        return w, np.empty((0, 0)), converged, n_iter, jit, status
    return w, inverse_from_cholesky(L), converged, n_iter, jit, status


@njit(cache=True)
def gaussian_factor(HtH, Hty, active, alphas, noise_var, jitter):
    """Closed-form Gaussian-likelihood posterior: (w, L, jitter_used, status)."""
    m = active.size
    P = np.empty((m, m))
    b = np.empty(m)
    for a in range(m):
        b[a] = Hty[active[a]] / noise_var
        for c in range(m):
            P[a, c] = HtH[active[a], active[c]] / noise_var
        P[a, a] += alphas[a]
    L, jit = cholesky_jitter(P, jitter)
    if jit < 0.0:
        return np.zeros(m), L, jit, NOT_PD
    return cho_solve(L, b), L, jit, OK


@njit(cache=True)
def sbl_path(H, t, gaussian, alpha_init, prune_threshold, max_outer, irls_tol, irls_max, jitter, noise_init, thresholds):
    """Outer MacKay loop with snapshots at each stopping threshold.

    ``thresholds`` must be sorted in decreasing order.  Snapshot j is the state
    right after the first iteration whose largest alpha change is <= thresholds[j].
    """
    N, M = H.shape
    n_thr = thresholds.size
    if gaussian:
        HtH = np.ascontiguousarray(H.T) @ H
        Hty = np.ascontiguousarray(H.T) @ t
    else:
        HtH = np.empty((0, 0))
        Hty = np.empty(0)

    active = np.arange(M)
    alphas = np.full(M, alpha_init)
    w = np.zeros(M)
    noise = noise_init
    status = OK
    n_gamma_bad = 0
    if gaussian:
        w, L, jit, status = gaussian_factor(HtH, Hty, active, alphas, noise, jitter)
    else:
        w, L, _, _, jit, status = irls_factor(H, t, alphas, w, irls_tol, irls_max, jitter)
    Linv = triangular_inverse(L) if status == OK else np.empty((0, 0))

    hist = np.zeros((max(max_outer, 1), 5))
    n_hist = 0
    snap_active = [np.empty(0, np.int64) for _ in range(n_thr)]
    snap_w = [np.empty(0) for _ in range(n_thr)]
    snap_alpha = [np.empty(0) for _ in range(n_thr)]
    snap_sigma = [np.empty((0, 0)) for _ in range(n_thr)]
    snap_noise = np.zeros(n_thr)
    snap_hist = np.zeros(n_thr, np.int64)
    snap_conv = np.zeros(n_thr, np.bool_)
    p = 0

    if status == OK:
        for it in range(max_outer):
            m = active.size
            sigma_diag = diag_of_inverse(Linv)
            gamma = np.empty(m)
            new = np.empty(m)
            for i in range(m):
                gamma[i] = 1.0 - alphas[i] * sigma_diag[i]
                if gamma[i] < -1e-8:
                    n_gamma_bad += 1
                w2 = w[i] * w[i]
                if w2 > 0.0 and gamma[i] > 0.0:
                    new[i] = min(gamma[i] / w2, prune_threshold)
                else:
                    new[i] = prune_threshold
            if gaussian:
                resid = t - H[:, active] @ w
                dof = N - gamma.sum()
                if dof > 0.0:
                    noise = max((resid @ resid) / dof, 1e-12)
            delta = 0.0
            n_keep = 0
            for i in range(m):
                if new[i] < prune_threshold:
                    n_keep += 1
                    if alphas[i] < prune_threshold:
                        delta = max(delta, abs(new[i] - alphas[i]))
            keep = new < prune_threshold
            if n_keep == 0:
                best = np.argmin(new)
                keep[best] = True
                new[best] = alphas[best]
            active = active[keep]
            alphas = new[keep]
            w_start = w[keep]
            if gaussian:
                w, L, jit, status = gaussian_factor(HtH, Hty, active, alphas, noise, jitter)
            else:
                w, L, _, _, jit, status = irls_factor(
                    np.ascontiguousarray(H[:, active]), t, alphas, w_start, irls_tol, irls_max, jitter
                )
            if status != OK:
                break
            Linv = triangular_inverse(L)
            hist[it, 0] = delta
            hist[it, 1] = active.size
            hist[it, 2] = gamma.min()
            hist[it, 3] = gamma.max()
            hist[it, 4] = jit
            n_hist = it + 1
            S = np.empty((0, 0))
            if p < n_thr and delta <= thresholds[p]:
                S = gram_of_inverse(Linv)
            while p < n_thr and delta <= thresholds[p]:
                snap_active[p] = active.copy()
                snap_w[p] = w.copy()
                snap_alpha[p] = alphas.copy()
                snap_sigma[p] = S.copy()
                snap_noise[p] = noise
                snap_hist[p] = n_hist
                snap_conv[p] = True
                p += 1
            if p == n_thr:
                break
    if status == OK and p < n_thr:
        S = gram_of_inverse(Linv)
        while p < n_thr:
            snap_active[p] = active.copy()
            snap_w[p] = w.copy()
            snap_alpha[p] = alphas.copy()
            snap_sigma[p] = S.copy()
            snap_noise[p] = noise
            snap_hist[p] = n_hist
            p += 1
    return (
        status,
        n_gamma_bad,
        hist[:n_hist].copy(),
        snap_active,
        snap_w,
        snap_alpha,
        snap_sigma,
        snap_noise,
        snap_hist,
        snap_conv,
    )
