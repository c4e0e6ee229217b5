"""Ulam discretisation of the transfer operator of a piecewise monotone interval map."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse

from ergotest.core.errors import CapabilityError, ParameterError, PreconditionError
from ergotest.maps.catalog import DynamicalSystem

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class UlamOperator:
    """Row-stochastic matrix ``P[i, j] = m(B_i ∩ f^-1 B_j) / m(B_i)``.

    ``edges`` holds the equal-width bin edges for interval operators; tower
    operators carry ``labels`` naming each state instead.
    """

    system: DynamicalSystem
    matrix: sparse.csr_matrix = field(repr=False)
    edges: Optional[np.ndarray] = field(default=None, repr=False)
    labels: Optional[Tuple[Tuple[int, int], ...]] = field(default=None, repr=False)

    @property
    def bins(self) -> int:
        return int(self.matrix.shape[0])

    @cached_property
    def stationary(self) -> np.ndarray:
        from .spectrum import stationary_density

        return stationary_density(self)

    @cached_property
    def lambda2(self) -> float:
        from .spectrum import spectral_gap

        return spectral_gap(self).lambda2

    @property
    def gap(self) -> float:
        return 1.0 - self.lambda2

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()


def _branch_entries(
    lo: float,
    hi: float,
    preimages: np.ndarray,
    edges: np.ndarray,
    rows: List[int],
    cols: List[int],
    values: List[float],
) -> None:
    n = edges.size - 1
    for j in range(n):
        a, b = sorted((float(preimages[j]), float(preimages[j + 1])))
        a, b = max(a, lo), min(b, hi)
        if b <= a:
            continue
        first = max(int(a * n) - 1, 0)
        last = min(int(math.ceil(b * n)), n - 1)
        for i in range(first, last + 1):
            left = max(a, float(edges[i]))
            right = min(b, float(edges[i + 1]))
            if right > left:
                rows.append(i)
                cols.append(j)
                values.append(right - left)


def build_ulam(system: DynamicalSystem, bins: int) -> UlamOperator:
    """Assemble the Ulam matrix from exact preimage intersections, branch by branch."""

    if system.state_dim != 1:
        raise CapabilityError(f"Ulam operators need a one-dimensional system, '{system.name}' is {system.state_dim}-D")
    if bins < 1:
        raise ParameterError(f"N must be ≥ 1, got {bins}")
    branches = system.monotone_branches()
    edges = np.arange(bins + 1, dtype=np.float64) / bins

    rows: List[int] = []
    cols: List[int] = []
    values: List[float] = []
    for branch in branches:
        preimages = np.clip(branch.inverse(edges), branch.lo, branch.hi)
        # Pin the outermost preimages so each branch tiles [lo, hi] without gaps.
        if branch.increasing:
            preimages[0], preimages[-1] = branch.lo, branch.hi
        else:
            preimages[0], preimages[-1] = branch.hi, branch.lo
        _branch_entries(branch.lo, branch.hi, preimages, edges, rows, cols, values)

    matrix = sparse.coo_matrix((values, (rows, cols)), shape=(bins, bins)).tocsr()
    totals = np.asarray(matrix.sum(axis=1)).ravel()
    if np.any(totals <= 0):
        raise PreconditionError(f"{int(np.sum(totals <= 0))} bin(s) of '{system.name}' carry no preimage mass")
    matrix = sparse.diags(1.0 / totals) @ matrix
    logger.debug("built %dx%d Ulam matrix for %s (%d nonzeros)", bins, bins, system.name, matrix.nnz)
    return UlamOperator(system=system, matrix=sparse.csr_matrix(matrix), edges=edges)


def reference_masses(system: DynamicalSystem, bins: int) -> np.ndarray:
    """Exact invariant mass of each equal-width bin, when the invariant law is known."""

    edges = np.arange(bins + 1, dtype=np.float64) / bins
    cdf = system.invariant_cdf(edges)
    if cdf is None:
        raise CapabilityError(f"No closed-form invariant law known for '{system.name}' with {dict(system.params)}")
    return np.diff(cdf)


def stationary_l1_error(op: UlamOperator) -> Optional[float]:
    if op.edges is None or op.system.invariant_cdf(np.zeros(1)) is None:
        return None
    return float(np.sum(np.abs(op.stationary - reference_masses(op.system, op.bins))))


def summary(op: UlamOperator) -> Dict[str, object]:
    return {
        "N": op.bins,
        "lambda2": op.lambda2,
        "gap": op.gap,
        "stationary_l1_error": stationary_l1_error(op),
    }


def write_matrix_csv(op: UlamOperator, path: Path) -> Path:
    coo = op.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["row", "col", "value"])
        for k in order:
            writer.writerow([int(coo.row[k]), int(coo.col[k]), format(float(coo.data[k]), ".17g")])
    return Path(path)
