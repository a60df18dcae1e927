"""Greedy sparse-recovery baselines on the nominal (on-grid) dictionary."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GreedyConfig:
    target_sparsity: int = 8
    residual_tolerance: float = 1e-8
    max_iterations: int = 50

    def __post_init__(self):
        if self.target_sparsity < 1:
            raise ValueError("target sparsity must be >= 1")


def _least_squares(columns: np.ndarray, y: np.ndarray, support: list[int]):
    """LS fit on a support, dropping atoms that make it rank deficient."""
    support = list(support)
    while support:
        sub = columns[:, support]
        coef, _, rank, _ = np.linalg.lstsq(sub, y, rcond=None)
        if rank == len(support):
            return support, coef
        # drop the weakest atom and retry
        weakest = int(np.argmin(np.abs(coef)))
        support.pop(weakest)
    return [], np.zeros(0, complex)


def omp(y: np.ndarray, f_matrix: np.ndarray, config: GreedyConfig | None = None) -> np.ndarray:
    """Orthogonal matching pursuit.

    Selects the column best correlated with the residual, re-solves least
    squares on the accumulated support, and stops at the target sparsity
    or when the relative residual falls below tolerance.
    """
    cfg = config or GreedyConfig()
    p, n = f_matrix.shape
    if n < cfg.target_sparsity:
        raise ValueError("fewer columns than target sparsity")
    x = np.zeros(n, complex)
    ynorm = np.linalg.norm(y)
    if ynorm == 0:
        return x
    norms = np.linalg.norm(f_matrix, axis=0)
    norms[norms == 0] = 1.0
    residual = y.copy()
    support: list[int] = []
    coef = np.zeros(0, complex)
    for _ in range(cfg.target_sparsity):
        corr = np.abs(f_matrix.conj().T @ residual) / norms
        corr[support] = 0
        support.append(int(np.argmax(corr)))
        support, coef = _least_squares(f_matrix, y, support)
        residual = y - f_matrix[:, support] @ coef
        if np.linalg.norm(residual) <= cfg.residual_tolerance * ynorm:
            break
    x[support] = coef
    return x


def sp(y: np.ndarray, f_matrix: np.ndarray, config: GreedyConfig | None = None) -> np.ndarray:
    """Subspace pursuit with fixed sparsity.

    Expands the support with the K best correlations, solves least
    squares, prunes back to K, and iterates until the residual stops
    improving.
    """
    cfg = config or GreedyConfig()
    p, n = f_matrix.shape
    k = cfg.target_sparsity
    if n < k:
        raise ValueError("fewer columns than target sparsity")
    x = np.zeros(n, complex)
    ynorm = np.linalg.norm(y)
    if ynorm == 0:
        return x
    norms = np.linalg.norm(f_matrix, axis=0)
    norms[norms == 0] = 1.0

    corr = np.abs(f_matrix.conj().T @ y) / norms
    support = list(np.argsort(corr)[::-1][:k])
    support, coef = _least_squares(f_matrix, y, support)
    residual = y - f_matrix[:, support] @ coef
    best = np.linalg.norm(residual)

    for _ in range(cfg.max_iterations):
        corr = np.abs(f_matrix.conj().T @ residual) / norms
        expanded = list(dict.fromkeys(support + list(np.argsort(corr)[::-1][:k])))
        expanded, coef = _least_squares(f_matrix, y, expanded)
        if not expanded:
            break
        order = np.argsort(np.abs(coef))[::-1][:k]
        pruned = [expanded[i] for i in order]
        pruned, coef = _least_squares(f_matrix, y, pruned)
        new_residual = y - f_matrix[:, pruned] @ coef
        new_norm = np.linalg.norm(new_residual)
        if new_norm >= best:
            break
        support, residual, best = pruned, new_residual, new_norm
        if best <= cfg.residual_tolerance * ynorm:
            break

    support, coef = _least_squares(f_matrix, y, support)
    x = np.zeros(n, complex)
    x[support] = coef
    return x
