"""
Four-Case Construction Service

Builds the grid function h: {1..M}^k -> {0,1} from a 2-coloring g of
D(k,M) without monochromatic k-vertex paths:

    h(z) = g(z)              z strictly increasing
           g(reversed z)     z strictly decreasing
           0                 some coordinate repeats
           alpha(z_2, z_3)   otherwise, alpha(x, y) = 0 iff x < y

Long runs of equal h-values over distinct coordinates are then impossible.
"""

import logging
from math import comb
from typing import Sequence

import numpy as np

from lab.exceptions import InvalidDimensionError, InvalidInputError
from lab.services.blockfactor import GridFunction
from lab.services.coloring import VertexColoring
from lab.services.debruijn import get_graph

logger = logging.getLogger(__name__)


def alpha(x: int, y: int) -> int:
    return 0 if x < y else 1


class FourCaseRule:
    """
    Rule-backed evaluation of h; scalar and batched.

    Attributes:
        coloring: The underlying 2-coloring g of D(k,M)
    """

    def __init__(self, coloring: VertexColoring):
        self.coloring = coloring
        self.k = coloring.k
        self.M = coloring.m
        self.graph = get_graph(coloring.k, coloring.m)
        self._colors = np.asarray(coloring.colors, dtype=np.int64)
        self._binom = np.array(
            [[comb(n, i) for i in range(self.k + 1)] for n in range(self.M + 1)],
            dtype=np.int64,
        )

    def __repr__(self) -> str:
        return f"FourCaseRule(k={self.k}, M={self.M})"

    def __call__(self, z: Sequence[int]) -> int:
        z = tuple(z)
        if len(set(z)) < len(z):
            return 0
        steps = [b - a for a, b in zip(z, z[1:])]
        if all(s > 0 for s in steps):
            return self.coloring.colors[self.graph.rank(z)]
        if all(s < 0 for s in steps):
            return self.coloring.colors[self.graph.rank(z[::-1])]
        return alpha(z[1], z[2])

    def vectorized(self, points: np.ndarray) -> np.ndarray:
        """h on every row of an (n, k) array of grid points."""
        points = np.asarray(points, dtype=np.int64)
        steps = np.diff(points, axis=1)
        increasing = (steps > 0).all(axis=1)
        decreasing = (steps < 0).all(axis=1)
        repeated = (np.diff(np.sort(points, axis=1), axis=1) == 0).any(axis=1)

        values = (points[:, 1] > points[:, 2]).astype(np.int64)
        values[repeated] = 0
        monotone = increasing | decreasing
        if monotone.any():
            words = np.where(decreasing[:, None], points[:, ::-1], points)[monotone]
            ranks = self._binom[words - 1, np.arange(1, self.k + 1)].sum(axis=1)
            values[monotone] = self._colors[ranks]
        return values


def construct_h(g: VertexColoring) -> GridFunction:
    """
    The four-case function of a 2-coloring of D(k,M).

    Args:
        g: Vertex coloring with colors in {0,1}

    Returns:
        Rule-backed GridFunction with window k, grid M and r = 2

    Raises:
        InvalidDimensionError: k < 3 (the last case reads z_2 and z_3)
        InvalidInputError: g uses more than two colors
    """
    if g.k < 3:
        raise InvalidDimensionError(f"The four-case construction needs k >= 3, got k={g.k}", k=g.k)
    if g.r > 2:
        raise InvalidInputError(f"The four-case construction needs a 2-coloring, got r={g.r}", r=g.r)
    logger.debug(f"Building h from a coloring of D({g.k},{g.m})")
    return GridFunction(g.k, g.m, 2, rule=FourCaseRule(g))
