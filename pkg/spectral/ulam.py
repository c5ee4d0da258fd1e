"""
Ulam discretization of the Perron-Frobenius operator of the jump transformation G.

Cells are the dyadic intervals of [0, 1]. Entry (i, j) of the row-stochastic
matrix is the proportion of cell i that G maps into cell j; the part of the
cells below the last branch kept is spread uniformly over all targets.
"""
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigs

from interval_maps.exceptions import ConvergenceError, DomainError

logger = logging.getLogger(__name__)


@dataclass
class UlamResult:
    eigenvalues: np.ndarray
    density: np.ndarray
    cells: np.ndarray
    resolution_bits: int


def ulam_operator(induced, resolution_bits=10, branch_cutoff=None):
    """
    Sparse row-stochastic Ulam matrix of G on 2^resolution_bits cells

    Args:
        induced: InducedMapService providing the branches phi_n
        resolution_bits: log2 of the number of cells
        branch_cutoff: last branch resolved exactly

    Returns:
        scipy.sparse.csr_matrix
    """
    if not 2 <= resolution_bits <= 20:
        raise DomainError(f'resolution_bits must lie in [2, 20], got {resolution_bits}')
    branch_cutoff = branch_cutoff or settings.DYNZETA_BRANCH_CUTOFF
    cells = 2 ** resolution_bits
    edges = np.linspace(0.0, 1.0, cells + 1)

    rows, cols, lengths = [], [], []
    for n in range(1, branch_cutoff + 1):
        images = np.asarray(induced.phi(n, edges, order=1).value, dtype=float)
        order = np.argsort(images)
        images = images[order]
        # target cell of the image interval (images[k], images[k+1])
        targets = np.minimum(order[:-1], order[1:])
        lo, hi = images[0], images[-1]
        inner = edges[(edges > lo) & (edges < hi)]
        breaks = np.union1d(images, inner)
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        widths = np.diff(breaks)
        source = np.minimum((mids * cells).astype(np.int64), cells - 1)
        target = targets[np.clip(np.searchsorted(images, mids) - 1, 0, cells - 1)]
        rows.append(source)
        cols.append(target)
        lengths.append(widths)

    matrix = sparse.coo_matrix(
        (np.concatenate(lengths) * cells, (np.concatenate(rows), np.concatenate(cols))), shape=(cells, cells),
    ).tocsr()
    matrix.sum_duplicates()

    missing = 1.0 - np.asarray(matrix.sum(axis=1)).ravel()
    short = np.flatnonzero(missing > 1e-14)
    if short.size:
        spread = sparse.csr_matrix(
            (np.repeat(missing[short] / cells, cells), (np.repeat(short, cells), np.tile(np.arange(cells), short.size))),
            shape=(cells, cells),
        )
        matrix = matrix + spread
    logger.info(f'Ulam matrix: {cells} cells, {matrix.nnz} entries, {short.size} cells below branch {branch_cutoff}')
    return matrix


def ulam_spectrum(matrix, top_count=2):
    """
    Leading eigenvalues and the invariant density of a row-stochastic Ulam matrix

    Returns:
        UlamResult with eigenvalues by decreasing modulus and the density as cell averages
    """
    cells = matrix.shape[0]
    try:
        values, vectors = eigs(matrix.T.tocsr(), k=top_count, which='LM', tol=1e-12)
    except ArpackNoConvergence as exc:
        logger.error(f'ARPACK did not converge on the {cells}-cell Ulam matrix')
        raise ConvergenceError(f'Ulam eigensolver failed: {exc}')
    order = np.argsort(-np.abs(values))
    values, vectors = values[order], vectors[:, order]
    density = np.real(vectors[:, 0])
    density = density / density.sum() * cells
    centers = (np.arange(cells) + 0.5) / cells
    return UlamResult(eigenvalues=values, density=density, cells=centers,
                      resolution_bits=int(round(np.log2(cells))))
