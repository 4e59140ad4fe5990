"""Independent reference implementations used as test oracles.

Everything here deliberately avoids the library's own linear-algebra path:
kernels are evaluated pairwise from the closed formulas with plain loops,
and linear systems are solved by explicit Gaussian elimination with
partial pivoting rather than Cholesky factors.
"""

import math

import numpy as np


def ge_solve(A, B):
    """Solve A X = B by Gaussian elimination with partial pivoting."""
    A = np.array(A, dtype=float)
    B = np.array(B, dtype=float)
    single = B.ndim == 1
    if single:
        B = B[:, None]
    n = A.shape[0]
    aug = np.hstack([A, B])
    for col in range(n):
        piv = col + int(np.argmax(np.abs(aug[col:, col])))
        if aug[piv, col] == 0.0:
            raise np.linalg.LinAlgError("singular matrix in elimination")
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        aug[col] = aug[col] / aug[col, col]
        factors = aug[col + 1 :, col].copy()
        aug[col + 1 :] -= np.outer(factors, aug[col])
    # back substitution
    X = aug[:, n:].copy()
    for col in range(n - 1, -1, -1):
        X[:col] -= np.outer(aug[:col, col], X[col])
    return X[:, 0] if single else X


def ge_inverse(A):
    return ge_solve(A, np.eye(len(A)))


def ge_logdet(A):
    """log det via elimination pivots (A must have positive determinant)."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    sign = 1.0
    total = 0.0
    for col in range(n):
        piv = col + int(np.argmax(np.abs(A[col:, col])))
        if piv != col:
            A[[col, piv]] = A[[piv, col]]
            sign = -sign
        pivot = A[col, col]
        if pivot == 0.0:
            raise np.linalg.LinAlgError("singular matrix")
        if pivot < 0.0:
            sign = -sign
        total += math.log(abs(pivot))
        A[col + 1 :] -= np.outer(A[col + 1 :, col] / pivot, A[col])
    if sign < 0:
        raise np.linalg.LinAlgError("negative determinant for a PD matrix")
    return total


def kernel_value(family, bandwidths, scale, x, z):
    """Direct per-pair kernel formula with explicit loops."""
    r2 = 0.0
    for xi, zi, h in zip(x, z, bandwidths):
        r2 += (xi - zi) ** 2 / h**2
    if family == "se":
        return scale * math.exp(-0.5 * r2)
    r = math.sqrt(r2)
    return scale * (1.0 + math.sqrt(5) * r + 5.0 * r2 / 3.0) * math.exp(-math.sqrt(5) * r)


def gram(family, bandwidths, scale, X, Z):
    return np.array(
        [[kernel_value(family, bandwidths, scale, x, z) for z in Z] for x in X]
    )


def posterior_mean_var(family, bandwidths, scale, X, y, noise_var, mean_const, queries):
    """Posterior mean/variance through an explicit (K + noise I)^-1."""
    K = gram(family, bandwidths, scale, X, X) + noise_var * np.eye(len(X))
    Kinv = ge_inverse(K)
    resid = np.asarray(y, dtype=float) - mean_const
    means, variances = [], []
    for q in queries:
        k = np.array([kernel_value(family, bandwidths, scale, q, x) for x in X])
        means.append(mean_const + k @ Kinv @ resid)
        variances.append(scale - k @ Kinv @ k)
    return np.array(means), np.array(variances)


def posterior_cross_cov(family, bandwidths, scale, X, noise_var, q1, q2):
    K = gram(family, bandwidths, scale, X, X) + noise_var * np.eye(len(X))
    Kinv = ge_inverse(K)
    k1 = np.array([kernel_value(family, bandwidths, scale, q1, x) for x in X])
    k2 = np.array([kernel_value(family, bandwidths, scale, q2, x) for x in X])
    prior = kernel_value(family, bandwidths, scale, q1, q2)
    return prior - k1 @ Kinv @ k2


def log_marginal(family, bandwidths, scale, X, y, noise_var, mean_const):
    n = len(X)
    K = gram(family, bandwidths, scale, X, X) + noise_var * np.eye(n)
    Kinv = ge_inverse(K)
    z = np.asarray(y, dtype=float) - mean_const
    return -0.5 * z @ Kinv @ z - 0.5 * ge_logdet(K) - 0.5 * n * math.log(2 * math.pi)


def information_gain(family, bandwidths, scale, X, noise_var):
    n = len(X)
    K = gram(family, bandwidths, scale, X, X)
    return 0.5 * ge_logdet(np.eye(n) + K / noise_var)
