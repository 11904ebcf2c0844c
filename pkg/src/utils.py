#!/usr/bin/env python3

import logging
import os
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

import constants as c

logger = logging.getLogger(__name__)


def worker_count() -> int:
    """Thread pool size: ACX_THREADS when set, otherwise the CPU count."""
    default = os.cpu_count() or 1
    value = os.environ.get(c.THREADS_ENV)
    if not value:
        return default
    try:
        threads = int(value)
    except ValueError:
        logger.warning('Ignoring %s=%r, not an integer', c.THREADS_ENV, value)
        return default
    if threads < 1:
        logger.warning('Ignoring %s=%r, must be at least 1', c.THREADS_ENV, value)
        return default
    return threads


def orthonormal_columns(a: np.ndarray, rcond: Optional[float] = None) -> Tuple[np.ndarray, int]:
    """Orthonormal basis of the column span of `a` together with its numerical rank."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.zeros((a.shape[0], 0)), 0
    basis = scipy.linalg.orth(a, rcond=rcond)
    return basis, basis.shape[1]


def principal_cosines(q1: np.ndarray, q2: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Cosines of the principal angles between span(q1) and span(q2), largest first.

    Both arguments must have orthonormal columns. Also returns the right singular
    vectors (as columns) so that q2 @ vectors[:, k] is the k-th principal vector in span(q2).
    """
    _, s, vh = scipy.linalg.svd(q1.T @ q2)
    return np.clip(s, 0.0, 1.0), vh.T


def max_abs(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0
