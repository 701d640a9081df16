import logging

import numpy as np
import scipy.linalg
from joblib import Memory

from options import options

memory = Memory(location=options["cache_dir"] if options["use_cache"] else None, verbose=0)
logger = logging.getLogger(__name__)


@memory.cache
def _dense_eig(matrix):
    """
    Right eigenvectors and their inverse for a dense matrix.

    Args:
        matrix: square complex array, hashed by joblib as the cache key.

    Returns:
        tuple: (eigenvalues, V, V^-1, condition number of V).
    """
    energies, vectors = np.linalg.eig(matrix)
    condition = np.linalg.cond(vectors)
    try:
        inverse = np.linalg.inv(vectors)
    except np.linalg.LinAlgError:
        inverse = None
    return energies, vectors, inverse, condition


def dense_eig(matrix):
    logger.debug(f"Diagonalising {matrix.shape[0]}x{matrix.shape[1]} matrix")
    return _dense_eig(np.ascontiguousarray(matrix, dtype=complex))


@memory.cache
def _conditioned_eigvals(matrix):
    energies, left, right = scipy.linalg.eig(matrix, left=True, right=True)
    overlap = np.abs(np.einsum("in,in->n", left.conj(), right))
    with np.errstate(divide="ignore"):
        condition = np.where(overlap > 0, 1.0 / overlap, np.inf)
    return energies, condition


def conditioned_eigvals(matrix):
    """Eigenvalues with their individual condition numbers 1/|l_n^H r_n| (unit-norm l_n, r_n)."""
    logger.debug(f"Eigenvalue conditioning of a {matrix.shape[0]}x{matrix.shape[1]} matrix")
    return _conditioned_eigvals(np.ascontiguousarray(matrix, dtype=complex))
