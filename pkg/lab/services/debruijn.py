"""
Increasing de Bruijn Graph Service

Implicit construction of D(k,m): vertices are strictly increasing k-words
over {1..m}, with an edge u -> v iff v drops the first symbol of u and
appends a larger one. Vertices are identified by their colexicographic
rank, which is also a topological order (the last symbol grows along
every edge).

D(k+1,m) is the directed line graph of D(k,m): the (k+1)-word
(a_1..a_{k+1}) is the edge ((a_1..a_k), (a_2..a_{k+1})).
"""

import csv
import io
import logging
from functools import cached_property, lru_cache
from math import comb
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx

from lab.constants import budget
from lab.exceptions import (
    InvalidDimensionError,
    InvalidEdgeError,
    InvalidInputError,
    RankRangeError,
    ResourceError,
)

logger = logging.getLogger(__name__)


class IncreasingWord(tuple):
    """
    A strictly increasing tuple of positive symbols.

    The alphabet bound m is checked by the graph, not by the word, so the
    same word is a vertex of every D(k,m) with m >= its last symbol.
    """

    def __new__(cls, symbols: Iterable[int]) -> "IncreasingWord":
        values = tuple(int(s) for s in symbols)
        if not values:
            raise InvalidDimensionError("A word needs at least one symbol", symbols=values)
        if values[0] < 1:
            raise InvalidInputError("Symbols start at 1", symbols=list(values))
        for left, right in zip(values, values[1:]):
            if left >= right:
                raise InvalidInputError("Symbols must be strictly increasing", symbols=list(values))
        return super().__new__(cls, values)

    @property
    def k(self) -> int:
        return len(self)

    def fits(self, m: int) -> bool:
        """True if every symbol lies in {1..m}."""
        return self[-1] <= m

    def __repr__(self) -> str:
        return f"IncreasingWord({tuple(self)!r})"


Edge = Tuple[IncreasingWord, IncreasingWord]


class DeBruijnGraph:
    """
    The increasing k-dimensional de Bruijn graph of m symbols.

    Immutable after construction and safe to share between threads;
    adjacency lists are materialized on first use when the graph is small
    enough (MATERIALIZE_LIMIT), otherwise computed from the overlap rule.
    """

    def __init__(self, k: int, m: int, vertex_budget: Optional[int] = None):
        if k < 1 or m < 1 or k > m:
            raise InvalidDimensionError(
                f"D(k,m) needs 1 <= k <= m, got k={k}, m={m}", k=k, m=m
            )
        limit = budget("VERTEX_BUDGET", vertex_budget)
        count = comb(m, k)
        if count > limit:
            raise ResourceError(
                f"D({k},{m}) has {count} vertices, over the budget of {limit}",
                k=k, m=m, vertex_count=count, vertex_budget=limit,
            )
        self.k = k
        self.m = m
        self.vertex_count = count
        self.edge_count = comb(m, k + 1)
        # _binom[n][i] = C(n, i) for n < m+1, i <= k+1 (ranks of k- and (k+1)-words)
        self._binom = [[comb(n, i) for i in range(k + 2)] for n in range(m + 1)]

    def __repr__(self) -> str:
        return f"DeBruijnGraph(k={self.k}, m={self.m})"

    @property
    def graph_id(self) -> Tuple[int, int]:
        return (self.k, self.m)

    # Ranking

    def rank(self, word: Sequence[int]) -> int:
        """Colexicographic rank of a vertex: sum of C(a_i - 1, i)."""
        word = self._vertex(word)
        return self._rank_symbols(word)

    def _rank_symbols(self, symbols: Sequence[int]) -> int:
        binom = self._binom
        return sum(binom[a - 1][i] for i, a in enumerate(symbols, start=1))

    def unrank(self, index: int) -> IncreasingWord:
        """Inverse of rank."""
        return IncreasingWord(self._unrank_symbols(index, self.k))

    def _unrank_symbols(self, index: int, length: int) -> List[int]:
        total = comb(self.m, length)
        if not 0 <= index < total:
            raise RankRangeError(
                f"Rank {index} outside 0..{total - 1} for words of length {length} over {self.m}",
                index=index, k=length, m=self.m,
            )
        symbols = [0] * length
        c = self.m - 1
        for i in range(length, 0, -1):
            # largest c with C(c, i) <= index; c strictly decreases with i
            while comb(c, i) > index:
                c -= 1
            symbols[i - 1] = c + 1
            index -= comb(c, i)
            c -= 1
        return symbols

    def vertices(self) -> Iterator[IncreasingWord]:
        """All vertices in rank (topological) order."""
        for index in range(self.vertex_count):
            yield self.unrank(index)

    def topological_order(self) -> range:
        """Ranks in an order with no back edges."""
        return range(self.vertex_count)

    def _vertex(self, word: Sequence[int]) -> IncreasingWord:
        if not isinstance(word, IncreasingWord):
            word = IncreasingWord(word)
        if word.k != self.k or not word.fits(self.m):
            raise InvalidInputError(f"Not a vertex of D({self.k},{self.m})", word=list(word))
        return word

    # Adjacency

    def successors(self, word: Sequence[int]) -> List[IncreasingWord]:
        """Words (a_2..a_k, b) with a_k < b <= m."""
        word = self._vertex(word)
        tail = tuple(word[1:])
        return [IncreasingWord(tail + (b,)) for b in range(word[-1] + 1, self.m + 1)]

    def predecessors(self, word: Sequence[int]) -> List[IncreasingWord]:
        """Words (b, a_1..a_{k-1}) with 1 <= b < a_1."""
        word = self._vertex(word)
        head = tuple(word[:-1])
        return [IncreasingWord((b,) + head) for b in range(1, word[0])]

    def successor_ranks(self, index: int) -> List[int]:
        if self._materialize:
            return self._adjacency[index]
        return self._successor_ranks_of(self._unrank_symbols(index, self.k))

    def predecessor_ranks(self, index: int) -> List[int]:
        if self._materialize:
            return self._reverse_adjacency[index]
        symbols = self._unrank_symbols(index, self.k)
        binom = self._binom
        # shifting a_1..a_{k-1} up one position changes their rank weights
        base = sum(binom[a - 1][i + 1] for i, a in enumerate(symbols[:-1], start=1))
        return [binom[b - 1][1] + base for b in range(1, symbols[0])]

    def _successor_ranks_of(self, symbols: Sequence[int]) -> List[int]:
        binom = self._binom
        k = self.k
        base = sum(binom[a - 1][i] for i, a in enumerate(symbols[1:], start=1))
        return [base + binom[b - 1][k] for b in range(symbols[-1] + 1, self.m + 1)]

    @property
    def _materialize(self) -> bool:
        return self.vertex_count <= budget("MATERIALIZE_LIMIT")

    @cached_property
    def _adjacency(self) -> List[List[int]]:
        logger.debug(f"Materializing adjacency of D({self.k},{self.m})")
        return [
            self._successor_ranks_of(self._unrank_symbols(index, self.k))
            for index in range(self.vertex_count)
        ]

    @cached_property
    def _reverse_adjacency(self) -> List[List[int]]:
        reverse: List[List[int]] = [[] for _ in range(self.vertex_count)]
        for u, targets in enumerate(self._adjacency):
            for v in targets:
                reverse[v].append(u)
        return reverse

    def undirected_neighbors(self) -> List[Set[int]]:
        """Neighbor sets of the underlying undirected graph, by rank."""
        neighbors: List[Set[int]] = [set() for _ in range(self.vertex_count)]
        for u, v in self.edge_ranks():
            neighbors[u].add(v)
            neighbors[v].add(u)
        return neighbors

    def has_edge(self, u: Sequence[int], v: Sequence[int]) -> bool:
        u = self._vertex(u)
        v = self._vertex(v)
        return tuple(v[:-1]) == tuple(u[1:]) and v[-1] > u[-1]

    def edges(self) -> Iterator[Edge]:
        """All edges, ordered by the rank of their (k+1)-word."""
        for index in range(self.edge_count):
            yield self.word_to_edge(self._unrank_symbols(index, self.k + 1))

    def edge_ranks(self) -> Iterator[Tuple[int, int]]:
        for u in range(self.vertex_count):
            for v in self.successor_ranks(u):
                yield u, v

    # Line-graph bijection

    def edge_to_word(self, u: Sequence[int], v: Sequence[int]) -> IncreasingWord:
        """phi^-1: the edge (u, v) as an increasing (k+1)-word."""
        if not self.has_edge(u, v):
            raise InvalidEdgeError(
                f"{tuple(u)} -> {tuple(v)} is not an edge of D({self.k},{self.m})",
                u=list(u), v=list(v),
            )
        return IncreasingWord(tuple(u) + (v[-1],))

    def word_to_edge(self, word: Sequence[int]) -> Edge:
        """phi: (a_1..a_{k+1}) -> ((a_1..a_k), (a_2..a_{k+1}))."""
        word = IncreasingWord(word)
        if word.k != self.k + 1 or not word.fits(self.m):
            raise InvalidEdgeError(
                f"{tuple(word)} is not a ({self.k + 1})-word over {self.m} symbols",
                word=list(word),
            )
        return IncreasingWord(word[:-1]), IncreasingWord(word[1:])

    def edge_index(self, u: Sequence[int], v: Sequence[int]) -> int:
        """Rank of the edge's (k+1)-word; the key of an EdgeColoring entry."""
        return self._rank_symbols(self.edge_to_word(u, v))

    def edge_index_of_ranks(self, u: int, v: int) -> int:
        symbols = self._unrank_symbols(u, self.k)
        last = self._unrank_symbols(v, self.k)[-1]
        return self._rank_symbols(symbols + [last])

    def edge_ranks_of_index(self, index: int) -> Tuple[int, int]:
        """The (tail rank, head rank) of the edge with the given (k+1)-word rank."""
        symbols = self._unrank_symbols(index, self.k + 1)
        return self._rank_symbols(symbols[:-1]), self._rank_symbols(symbols[1:])

    # Export

    def summary(self) -> Dict[str, Any]:
        """Graph summary for JSON output."""
        return {
            "k": self.k,
            "m": self.m,
            "vertex_count": self.vertex_count,
            "edge_count": self.edge_count,
        }

    def edge_list_csv(self) -> str:
        """Edge list as CSV of rank pairs."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["source_rank", "target_rank"])
        for u, v in self.edge_ranks():
            writer.writerow([u, v])
        return buffer.getvalue()

    def to_networkx(self) -> nx.DiGraph:
        """Materialize as a networkx DiGraph on ranks, with words as node attributes."""
        digraph = nx.DiGraph(k=self.k, m=self.m)
        for index in range(self.vertex_count):
            digraph.add_node(index, word=tuple(self.unrank(index)))
        digraph.add_edges_from(self.edge_ranks())
        return digraph


def build_graph(k: int, m: int, vertex_budget: Optional[int] = None) -> DeBruijnGraph:
    """
    Build D(k,m).

    Args:
        k: Word length, 1 <= k <= m
        m: Alphabet size
        vertex_budget: Override for VERTEX_BUDGET

    Returns:
        The implicit graph
    """
    return DeBruijnGraph(k, m, vertex_budget=vertex_budget)


@lru_cache(maxsize=64)
def get_graph(k: int, m: int) -> DeBruijnGraph:
    """Get a shared D(k,m) instance (graphs are immutable)."""
    return DeBruijnGraph(k, m)


def rank(word: Sequence[int], m: int) -> int:
    return get_graph(len(word), m).rank(word)


def unrank(index: int, k: int, m: int) -> IncreasingWord:
    return get_graph(k, m).unrank(index)


def successors(graph: DeBruijnGraph, word: Sequence[int]) -> List[IncreasingWord]:
    return graph.successors(word)


def edge_to_word(graph: DeBruijnGraph, edge: Tuple[Sequence[int], Sequence[int]]) -> IncreasingWord:
    u, v = edge
    return graph.edge_to_word(u, v)


def word_to_edge(graph: DeBruijnGraph, word: Sequence[int]) -> Edge:
    return graph.word_to_edge(word)
