"""Shared test utilities: independent oracles and tiny builders."""

from __future__ import annotations

import numpy as np

from birs.scores import ScoreSet


def newton_logistic(y: np.ndarray, x: np.ndarray, tol: float = 1e-12, max_iter: int = 200):
    """Independent Newton-Raphson solver for the logistic MLE.

    Written directly from the log-likelihood derivatives; shares no code
    with the package's IRLS path.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    beta = np.zeros(x.shape[1])
    for _ in range(max_iter):
        eta = 1.0 / (1.0 + np.exp(-(x @ beta)))
        grad = x.T @ (y - eta)
        hess = -(x * (eta * (1.0 - eta))[:, None]).T @ x
        step = np.linalg.solve(hess, -grad)
        beta = beta + step
        if np.max(np.abs(step)) < tol:
            return beta
    raise RuntimeError("newton oracle failed to converge")


def explicit_projection(x: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Dense residual-covariance matrix W - W X (X' W X)^{-1} X' W."""
    w = np.diag(lam)
    middle = np.linalg.inv(x.T @ w @ x)
    return w - w @ x @ middle @ x.T @ w


def make_scoreset(u, boot, seed: int = 0) -> ScoreSet:
    u = np.asarray(u, dtype=float)
    boot = np.asarray(boot, dtype=float)
    return ScoreSet(u=u, boot=boot, n_boot=boot.shape[0], seed=seed)


def constant_boot(p: int, n_boot: int, value: float) -> np.ndarray:
    return np.full((n_boot, p), value, dtype=float)
