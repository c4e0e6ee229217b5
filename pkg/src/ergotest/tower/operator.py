"""Ulam operator of the truncated tower and its projection back to the interval."""
from __future__ import annotations

import logging
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np
from scipy import sparse

from ergotest.core.errors import ParameterError, PreconditionError, TruncationError
from ergotest.transfer.ulam import UlamOperator

from .dyadic import Interval, iterate_interval, overlap
from .model import KAC_TAIL_LIMIT, TowerModel

logger = logging.getLogger(__name__)


def _base_bins(tower: TowerModel, bins_per_level: int) -> List[Interval]:
    lo, hi = tower.base
    width = (hi - lo) / bins_per_level
    return [(lo + k * width, lo + (k + 1) * width) for k in range(bins_per_level)]


def _level_pieces(tower: TowerModel, q: int) -> List[Tuple[Interval, int]]:
    """Base intervals forming ``Δ_q`` with their return times (``0`` marks the truncated tail)."""

    pieces = [((b.left, b.right), b.return_time) for b in tower.branches if b.return_time > q]
    pieces.extend((interval, 0) for interval in tower.tail)
    return pieces


def tower_ulam(tower: TowerModel, bins_per_level: int) -> UlamOperator:
    """Row-stochastic Ulam matrix on the (level, base bin) states of positive measure.

    Mass climbs one level inside ``{R > q + 1}``, returns to the base through
    ``f^R_i`` for branches with ``R_i = q + 1`` and, at the top level, the
    truncated tail returns in proportion to the base bin measures.
    """

    if bins_per_level < 1:
        raise ParameterError(f"bins_per_level must be ≥ 1, got {bins_per_level}")
    if tower.tail_remainder >= KAC_TAIL_LIMIT:
        raise TruncationError(
            f"truncated mass {float(tower.tail_remainder):.3e} exceeds {KAC_TAIL_LIMIT:g}; raise q_max"
        )
    bins = _base_bins(tower, bins_per_level)
    index: Dict[Tuple[int, int], int] = {}
    state_mass: Dict[Tuple[int, int], Fraction] = {}
    for q in range(tower.q_max):
        pieces = _level_pieces(tower, q)
        for b, cell in enumerate(bins):
            mass = sum((overlap(interval, cell) for interval, _ in pieces), Fraction(0))
            if mass > 0:
                index[(q, b)] = len(index)
                state_mass[(q, b)] = mass

    base_total = tower.base_measure
    rows: List[int] = []
    cols: List[int] = []
    values: List[float] = []
    for (q, b), row in index.items():
        cell = bins[b]
        flows: Dict[int, Fraction] = {}
        up = index.get((q + 1, b))
        for interval, return_time in _level_pieces(tower, q):
            part = overlap(interval, cell)
            if part == 0:
                continue
            if return_time == 0 and q + 1 == tower.q_max:
                for target, target_cell in enumerate(bins):
                    col = index[(0, target)]
                    share = part * (target_cell[1] - target_cell[0]) / base_total
                    flows[col] = flows.get(col, Fraction(0)) + share
            elif return_time == q + 1:
                branch = tower.branch_at(interval[0])
                clipped = (max(interval[0], cell[0]), min(interval[1], cell[1]))
                image = sorted((branch.first_return(clipped[0]), branch.first_return(clipped[1])))
                stretch = abs(branch.slope)
                for target, target_cell in enumerate(bins):
                    share = overlap((image[0], image[1]), target_cell) / stretch
                    if share > 0:
                        col = index[(0, target)]
                        flows[col] = flows.get(col, Fraction(0)) + share
            elif up is not None:
                flows[up] = flows.get(up, Fraction(0)) + part
        total = state_mass[(q, b)]
        for col, share in sorted(flows.items()):
            rows.append(row)
            cols.append(col)
            values.append(float(share / total))

    size = len(index)
    matrix = sparse.csr_matrix((values, (rows, cols)), shape=(size, size))
    labels = tuple(sorted(index, key=index.__getitem__))
    logger.debug("tower Ulam operator: %d states, %d nonzeros", size, matrix.nnz)
    return UlamOperator(system=tower.system, matrix=matrix, labels=labels)


def level_masses(op: UlamOperator) -> np.ndarray:
    """Stationary mass summed over the bins of each level."""

    if op.labels is None:
        raise PreconditionError("level masses need a tower operator")
    levels = max(q for q, _ in op.labels) + 1
    masses = np.zeros(levels)
    for (q, _), mass in zip(op.labels, op.stationary):
        masses[q] += mass
    return masses


def project_to_interval(tower: TowerModel, op: UlamOperator, bins: int) -> np.ndarray:
    """Push the tower stationary vector to ``bins`` equal bins of [0, 1] through ``π(x, q) = f^q(x)``.

    Each state's mass is spread uniformly over its base set before projection.
    """

    if op.labels is None:
        raise PreconditionError("projection needs a tower operator")
    if bins < 1:
        raise ParameterError(f"bins must be ≥ 1, got {bins}")
    per_level = max(b for _, b in op.labels) + 1
    cells = _base_bins(tower, per_level)
    targets = [(Fraction(k, bins), Fraction(k + 1, bins)) for k in range(bins)]
    branches = tower.map_branches
    result = np.zeros(bins)
    for (q, b), mass in zip(op.labels, op.stationary):
        parts: List[Tuple[Interval, Fraction]] = []
        for interval, _ in _level_pieces(tower, q):
            clipped = (max(interval[0], cells[b][0]), min(interval[1], cells[b][1]))
            if clipped[1] > clipped[0]:
                parts.append((clipped, clipped[1] - clipped[0]))
        total = sum((length for _, length in parts), Fraction(0))
        for clipped, length in parts:
            image = iterate_interval(branches, clipped, q)
            width = image[1] - image[0]
            weight = float(mass) * float(length / total)
            for k, target in enumerate(targets):
                share = overlap(image, target)
                if share > 0:
                    result[k] += weight * float(share / width)
    return result
