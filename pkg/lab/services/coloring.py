"""
Coloring Service

Vertex and edge colorings of increasing de Bruijn graphs:
- exact chromatic number (iterative deepening over DSATUR backtracking)
- the subset lift of an edge coloring to a vertex coloring
- monochromatic directed paths (longest-path DP in rank order)
- digit colorings and backtracking search for colorings without long
  monochromatic paths

Path lengths are always explicit at this boundary: ``length_vertices`` or
``length_edges``, with length_edges = length_vertices - 1.
"""

import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import mpmath
import networkx as nx

from lab.constants import MODE_EXHAUSTIVE, budget
from lab.exceptions import InvalidInputError, ResourceError, VerificationError
from lab.services.bounds import iterated_log2
from lab.services.debruijn import DeBruijnGraph, IncreasingWord, build_graph
from lab.services.streams import chunk_sizes, resolve_seed, stream

logger = logging.getLogger(__name__)

SEARCH_FOUND = "found"
SEARCH_EXHAUSTED = "exhausted"
SEARCH_TIMEOUT = "timeout"


@dataclass(frozen=True)
class VertexColoring:
    """
    One color in {0..r-1} per vertex of D(k,m), indexed by colex rank.

    Attributes:
        k: Word length of the graph
        m: Alphabet size of the graph
        r: Number of colors available
        colors: Color of each vertex rank
    """
    k: int
    m: int
    r: int
    colors: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "colors", tuple(int(c) for c in self.colors))
        expected = comb(self.m, self.k)
        if len(self.colors) != expected:
            raise InvalidInputError(
                f"A coloring of D({self.k},{self.m}) needs {expected} entries, got {len(self.colors)}",
                k=self.k, m=self.m, entries=len(self.colors),
            )
        if self.r < 1:
            raise InvalidInputError("A coloring needs at least one color", r=self.r)
        for index, color in enumerate(self.colors):
            if not 0 <= color < self.r:
                raise InvalidInputError(
                    f"Color {color} of vertex {index} is outside 0..{self.r - 1}",
                    vertex=index, color=color, r=self.r,
                )

    @property
    def graph_id(self) -> Tuple[int, int]:
        return (self.k, self.m)

    @property
    def colors_used(self) -> int:
        return len(set(self.colors))

    def matches(self, graph: DeBruijnGraph) -> bool:
        return self.graph_id == graph.graph_id

    def color_of(self, graph: DeBruijnGraph, word: Sequence[int]) -> int:
        return self.colors[graph.rank(word)]

    @classmethod
    def uniform(cls, graph: DeBruijnGraph, color: int = 0, r: int = 1) -> "VertexColoring":
        return cls(graph.k, graph.m, r, (color,) * graph.vertex_count)

    def to_dict(self) -> Dict[str, Any]:
        """Coloring file format: colors keyed by colex vertex rank."""
        return {"k": self.k, "m": self.m, "r": self.r, "colors": list(self.colors)}


@dataclass(frozen=True)
class EdgeColoring:
    """
    One color in {0..q-1} per edge of D(k,m), keyed by the colex rank of the
    edge's (k+1)-word; equivalently a vertex coloring of D(k+1,m).
    """
    k: int
    m: int
    q: int
    colors: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "colors", tuple(int(c) for c in self.colors))
        expected = comb(self.m, self.k + 1)
        if len(self.colors) != expected:
            raise InvalidInputError(
                f"An edge coloring of D({self.k},{self.m}) needs {expected} entries, got {len(self.colors)}",
                k=self.k, m=self.m, entries=len(self.colors),
            )
        if any(not 0 <= c < self.q for c in self.colors):
            raise InvalidInputError(f"Edge colors must lie in 0..{self.q - 1}", q=self.q)

    def as_vertex_coloring(self) -> VertexColoring:
        """The same colors read as a vertex coloring of D(k+1,m)."""
        return VertexColoring(self.k + 1, self.m, self.q, self.colors)

    @classmethod
    def from_vertex_coloring(cls, coloring: VertexColoring) -> "EdgeColoring":
        if coloring.k < 2:
            raise InvalidInputError("Only colorings of D(k+1,m), k >= 1, are edge colorings", k=coloring.k)
        return cls(coloring.k - 1, coloring.m, coloring.r, coloring.colors)

    def to_dict(self) -> Dict[str, Any]:
        return {"k": self.k, "m": self.m, "q": self.q, "colors": list(self.colors)}


@dataclass(frozen=True)
class DirectedPath:
    """A directed path given by vertex ranks."""
    vertices: Tuple[int, ...]

    @property
    def length_vertices(self) -> int:
        return len(self.vertices)

    @property
    def length_edges(self) -> int:
        return max(len(self.vertices) - 1, 0)

    def words(self, graph: DeBruijnGraph) -> List[IncreasingWord]:
        return [graph.unrank(v) for v in self.vertices]

    def to_dict(self, graph: Optional[DeBruijnGraph] = None) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "vertices": list(self.vertices),
            "length_vertices": self.length_vertices,
            "length_edges": self.length_edges,
        }
        if graph is not None:
            data["words"] = [list(w) for w in self.words(graph)]
        return data


@dataclass
class SearchOutcome:
    """Three-valued result of a coloring search; a timeout proves nothing."""
    status: str
    coloring: Optional[VertexColoring] = None
    nodes: int = 0
    elapsed: float = 0.0
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status == SEARCH_FOUND

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "params": self.params,
            "nodes": self.nodes,
            "elapsed_seconds": round(self.elapsed, 6),
            "coloring": self.coloring.to_dict() if self.coloring else None,
        }


# Chromatic number

def chromatic_bounds(k: int, m: int) -> Tuple[int, int]:
    """
    Bounds on chi(D(k,m)) available without search.

    Lower: the iterated-log bound (k-1 applications of log2 to m), and 2 once
    an edge exists. Upper: coloring each word by its first symbol is proper
    (along an edge the first symbol strictly increases) and uses m-k+1 colors.
    """
    upper = m - k + 1
    if comb(m, k + 1) == 0:
        return 1, 1
    bound = iterated_log2(m, k - 1)
    lower = max(2, int(mpmath.ceil(bound))) if mpmath.isfinite(bound) else 2
    return min(lower, upper), upper


def chromatic_coloring(graph: DeBruijnGraph, upper_budget: Optional[int] = None) -> Tuple[int, VertexColoring]:
    """
    Exact chromatic number of the underlying undirected graph, with a witness.

    Tries r = 2, 3, ... with DSATUR-ordered backtracking; failing at r is an
    exhaustive proof, so the first success is certified minimal. The DSATUR
    greedy coloring from networkx caps the search.

    Raises:
        ResourceError: vertex count above CHROMATIC_VERTEX_BUDGET; carries bounds
    """
    limit = budget("CHROMATIC_VERTEX_BUDGET", upper_budget)
    if graph.vertex_count > limit:
        lower, upper = chromatic_bounds(graph.k, graph.m)
        raise ResourceError(
            f"D({graph.k},{graph.m}) has {graph.vertex_count} vertices; exact chromatic number limited to {limit}",
            vertex_count=graph.vertex_count, lower_bound=lower, upper_bound=upper,
        )

    if graph.edge_count == 0:
        return 1, VertexColoring.uniform(graph)

    neighbors = graph.undirected_neighbors()
    greedy = nx.greedy_color(graph.to_networkx().to_undirected(), strategy="DSATUR")
    upper = max(greedy.values()) + 1
    logger.debug(f"D({graph.k},{graph.m}): DSATUR greedy uses {upper} colors")

    for r in range(2, upper):
        colors = _proper_coloring(neighbors, r)
        if colors is not None:
            logger.info(f"chi(D({graph.k},{graph.m})) = {r}")
            return r, VertexColoring(graph.k, graph.m, r, colors)

    colors = [greedy[v] for v in range(graph.vertex_count)]
    logger.info(f"chi(D({graph.k},{graph.m})) = {upper} (greedy optimal)")
    return upper, VertexColoring(graph.k, graph.m, upper, colors)


def chromatic_number(graph: DeBruijnGraph, upper_budget: Optional[int] = None) -> int:
    """Exact chromatic number; see chromatic_coloring."""
    return chromatic_coloring(graph, upper_budget)[0]


def _proper_coloring(neighbors: List[set], r: int) -> Optional[List[int]]:
    """
    DSATUR backtracking: a proper r-coloring or None if none exists.

    New colors are opened in order (color c only after c-1 is in use), which
    removes color-permutation symmetry without losing completeness.
    """
    n = len(neighbors)
    colors = [-1] * n
    counts = [[0] * r for _ in range(n)]
    saturation = [0] * n
    degree = [len(nb) for nb in neighbors]
    uncolored = set(range(n))

    def select() -> int:
        return max(uncolored, key=lambda v: (saturation[v], degree[v], -v))

    def candidates(v: int, max_used: int) -> List[int]:
        return [c for c in range(min(r, max_used + 2)) if counts[v][c] == 0]

    def assign(v: int, c: int) -> None:
        colors[v] = c
        uncolored.discard(v)
        for u in neighbors[v]:
            counts[u][c] += 1
            if counts[u][c] == 1:
                saturation[u] += 1

    def unassign(v: int) -> None:
        c = colors[v]
        for u in neighbors[v]:
            counts[u][c] -= 1
            if counts[u][c] == 0:
                saturation[u] -= 1
        colors[v] = -1
        uncolored.add(v)

    first = select()
    # frame: [vertex, candidate colors, next candidate, max color used before]
    stack = [[first, candidates(first, -1), 0, -1]]
    while stack:
        frame = stack[-1]
        v, options, position, prev_max = frame
        if colors[v] != -1:
            unassign(v)
        if position == len(options):
            stack.pop()
            continue
        c = options[position]
        frame[2] = position + 1
        assign(v, c)
        if not uncolored:
            return list(colors)
        max_used = max(prev_max, c)
        w = select()
        stack.append([w, candidates(w, max_used), 0, max_used])
    return None


def is_proper(graph: DeBruijnGraph, coloring: VertexColoring) -> bool:
    colors = coloring.colors
    return all(colors[u] != colors[v] for u, v in graph.edge_ranks())


# Lift

def find_mono_two_edge_path(graph: DeBruijnGraph, ec: EdgeColoring) -> Optional[Tuple[int, int, int]]:
    """Vertex ranks (u, v, w) of a 2-edge path whose edges share a color, if any."""
    in_edges: List[Dict[int, int]] = [dict() for _ in range(graph.vertex_count)]
    out_edges: List[Dict[int, int]] = [dict() for _ in range(graph.vertex_count)]
    for index, color in enumerate(ec.colors):
        u, v = graph.edge_ranks_of_index(index)
        out_edges[u].setdefault(color, v)
        in_edges[v].setdefault(color, u)
    for v in range(graph.vertex_count):
        for color, u in in_edges[v].items():
            if color in out_edges[v]:
                return u, v, out_edges[v][color]
    return None


def lift_edge_coloring(graph: DeBruijnGraph, ec: EdgeColoring) -> VertexColoring:
    """
    Lift an edge coloring without monochromatic 2-edge paths to a proper
    vertex coloring: each vertex gets the set of its out-edge colors,
    encoded as a bitmask in {0..2^q-1}.

    Raises:
        InvalidInputError: ec has a monochromatic 2-edge path (named in details)
        VerificationError: the lifted coloring is not proper
    """
    if (ec.k, ec.m) != graph.graph_id:
        raise InvalidInputError(
            f"Edge coloring is for D({ec.k},{ec.m}), graph is D({graph.k},{graph.m})",
        )
    violation = find_mono_two_edge_path(graph, ec)
    if violation is not None:
        raise InvalidInputError(
            "Edge coloring has a monochromatic directed path of 2 edges",
            path=[list(graph.unrank(v)) for v in violation],
        )

    masks = [0] * graph.vertex_count
    for index, color in enumerate(ec.colors):
        u, _v = graph.edge_ranks_of_index(index)
        masks[u] |= 1 << color
    lifted = VertexColoring(graph.k, graph.m, 2 ** ec.q, masks)

    for u, v in graph.edge_ranks():
        if masks[u] == masks[v]:
            raise VerificationError(
                "Lifted coloring is not proper",
                edge=[list(graph.unrank(u)), list(graph.unrank(v))],
            )
    return lifted


# Monochromatic paths

def _longest_mono_runs(graph: DeBruijnGraph, colors: Sequence[int]) -> Tuple[List[int], List[int]]:
    """Longest monochromatic path (in vertices) ending at each rank, with back pointers."""
    n = graph.vertex_count
    best = [1] * n
    back = [-1] * n
    for v in graph.topological_order():
        run = best[v] + 1
        color = colors[v]
        for w in graph.successor_ranks(v):
            if colors[w] == color and run > best[w]:
                best[w] = run
                back[w] = v
    return best, back


def longest_mono_path_length(graph: DeBruijnGraph, vc: VertexColoring) -> int:
    """Number of vertices on a longest monochromatic directed path."""
    best, _back = _longest_mono_runs(graph, vc.colors)
    return max(best)


def find_mono_path(graph: DeBruijnGraph, vc: VertexColoring, length_vertices: int) -> Optional[DirectedPath]:
    """
    A monochromatic directed path of exactly ``length_vertices`` vertices.

    Returns:
        The path (ending at the lowest-ranked possible vertex), or None
    """
    if length_vertices < 1:
        raise InvalidInputError("Path length must be at least one vertex", length_vertices=length_vertices)
    if not vc.matches(graph):
        raise InvalidInputError(f"Coloring is for D{vc.graph_id}, graph is D{graph.graph_id}")

    best, back = _longest_mono_runs(graph, vc.colors)
    for end, run in enumerate(best):
        if run >= length_vertices:
            path = [end]
            while len(path) < length_vertices:
                path.append(back[path[-1]])
            return DirectedPath(tuple(reversed(path)))
    return None


# Enumeration and search

def enumerate_colorings(length: int, r: int) -> Iterator[Tuple[int, ...]]:
    """All r-colorings of ``length`` items in lexicographic order."""
    return itertools.product(range(r), repeat=length)


def coloring_at(index: int, length: int, r: int) -> List[int]:
    """The ``index``-th coloring of enumerate_colorings."""
    digits = [0] * length
    for position in range(length - 1, -1, -1):
        index, digits[position] = divmod(index, r)
    return digits


def colorings_in_range(start: int, stop: int, length: int, r: int) -> Iterator[Tuple[int, ...]]:
    """Colorings start..stop-1 of enumerate_colorings, for partitioned scans."""
    if start >= stop:
        return
    digits = coloring_at(start, length, r)
    for _ in range(stop - start):
        yield tuple(digits)
        position = length - 1
        while position >= 0:
            digits[position] += 1
            if digits[position] < r:
                break
            digits[position] = 0
            position -= 1


def partition(count: int, parts: int) -> List[Tuple[int, int]]:
    """Split range(count) into at most ``parts`` contiguous blocks."""
    parts = max(1, min(parts, count))
    size, extra = divmod(count, parts)
    blocks = []
    start = 0
    for i in range(parts):
        stop = start + size + (1 if i < extra else 0)
        blocks.append((start, stop))
        start = stop
    return blocks


def digit_coloring(graph: DeBruijnGraph, r: int, length_vertices: int) -> Optional[VertexColoring]:
    """
    Closed-form r-coloring of D(k,m) without a monochromatic path of
    ``length_vertices`` vertices, when one of this shape exists.

    For k = 1 the symbols are cut into blocks of length_vertices - 1. For
    k >= 2 the word (a, b, ...) takes the position of the most significant
    base-length_vertices digit in which a-1 and b-1 differ. Along a
    monochromatic path that digit strictly increases while the higher ones
    stay fixed, so a path needs more symbols than the base allows.

    Returns:
        The coloring, or None when m is too large for the construction
    """
    k, m = graph.graph_id
    if length_vertices < 2:
        return None
    base = length_vertices - 1 if k == 1 else length_vertices
    if m > (r * base if k == 1 else base ** r):
        return None

    places = [base ** (r - 1 - i) for i in range(r)]

    def color(word: IncreasingWord) -> int:
        if k == 1:
            return (word[0] - 1) // base
        x, y = word[0] - 1, word[1] - 1
        return next(i for i, place in enumerate(places) if x // place != y // place)

    return VertexColoring(k, m, r, [color(word) for word in graph.vertices()])


def search_coloring(
    k: int,
    m: int,
    r: int,
    length_vertices: int,
    time_budget: Optional[float] = None,
    vertex_budget: Optional[int] = None,
) -> SearchOutcome:
    """
    Search for an r-coloring of D(k,m) without a monochromatic directed path
    of ``length_vertices`` vertices.

    The digit coloring is tried first and returned when it checks out. After
    that comes backtracking in rank order, so every predecessor is colored
    first; each vertex keeps the longest same-colored path ending at it, and
    a color is pruned as soon as that run would reach the forbidden length.
    A vertex whose run reaches length_vertices - 1 blocks its color on every
    successor, and an assignment that leaves some successor with no color at
    all is undone at once.

    Returns:
        SearchOutcome with status found / exhausted / timeout
    """
    if r < 1:
        raise InvalidInputError("Search needs at least one color", r=r)
    if length_vertices < 1:
        raise InvalidInputError("Path length must be at least one vertex", length_vertices=length_vertices)

    graph = build_graph(k, m, vertex_budget=vertex_budget)
    seconds = budget("SEARCH_TIME_BUDGET", time_budget)
    interval = budget("SEARCH_CLOCK_INTERVAL")
    params = {"k": k, "m": m, "r": r, "length_vertices": length_vertices, "time_budget": seconds}
    label = f"search_coloring(k={k}, m={m}, r={r}, l={length_vertices})"

    started = time.monotonic()
    seeded = digit_coloring(graph, r, length_vertices)
    if seeded is not None and find_mono_path(graph, seeded, length_vertices) is None:
        logger.info(f"{label}: digit coloring avoids the path")
        return SearchOutcome(SEARCH_FOUND, seeded, 0, time.monotonic() - started, params)

    n = graph.vertex_count
    limit = length_vertices - 1
    predecessors = [graph.predecessor_ranks(v) for v in range(n)]
    successors = [graph.successor_ranks(v) for v in range(n)]
    colors = [-1] * n
    runs = [0] * n
    blocked = [[0] * r for _ in range(n)]
    options: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
    position = [0] * n
    prev_max = [-1] * n

    def candidates(v: int, max_used: int) -> List[Tuple[int, int]]:
        found = []
        for c in range(min(r, max_used + 2)):
            if blocked[v][c]:
                continue
            run = 1 + max((runs[p] for p in predecessors[v] if colors[p] == c), default=0)
            if run < length_vertices:
                found.append((c, run))
        # shortest run first
        found.sort(key=lambda option: option[1])
        return found

    def block(v: int, delta: int) -> None:
        c = colors[v]
        for w in successors[v]:
            blocked[w][c] += delta

    def wiped_out(v: int) -> bool:
        return any(all(blocked[w]) for w in successors[v])

    nodes = 0
    depth = 0
    max_used = -1
    if n:
        options[0] = candidates(0, max_used)
    while True:
        if depth == n:
            coloring = VertexColoring(k, m, r, colors)
            elapsed = time.monotonic() - started
            logger.info(f"{label}: found after {nodes} nodes")
            return SearchOutcome(SEARCH_FOUND, coloring, nodes, elapsed, params)

        if position[depth] < len(options[depth]):
            c, run = options[depth][position[depth]]
            position[depth] += 1
            nodes += 1
            if nodes % interval == 0 and time.monotonic() - started > seconds:
                logger.warning(f"{label}: timeout after {nodes} nodes")
                return SearchOutcome(SEARCH_TIMEOUT, None, nodes, time.monotonic() - started, params)
            colors[depth] = c
            runs[depth] = run
            if run == limit:
                block(depth, 1)
                if wiped_out(depth):
                    block(depth, -1)
                    colors[depth] = -1
                    runs[depth] = 0
                    continue
            prev_max[depth] = max_used
            max_used = max(max_used, c)
            depth += 1
            if depth < n:
                options[depth] = candidates(depth, max_used)
                position[depth] = 0
            continue

        depth -= 1
        if depth < 0:
            elapsed = time.monotonic() - started
            logger.info(f"{label}: exhausted after {nodes} nodes")
            return SearchOutcome(SEARCH_EXHAUSTED, None, nodes, elapsed, params)
        if runs[depth] == limit:
            block(depth, -1)
        colors[depth] = -1
        runs[depth] = 0
        max_used = prev_max[depth]


# Exhaustive and sampled scans

@dataclass
class ColoringScan:
    """
    Tally of a scan over r-colorings of a graph's vertices for monochromatic
    paths of a given length.

    Attributes:
        checked: Colorings examined
        misses: Colorings without the path
        first_miss: Lowest-index (or first-sampled) coloring without the path
    """
    checked: int = 0
    misses: int = 0
    first_miss: Optional[Tuple[int, ...]] = None
    first_miss_index: Optional[Tuple[int, int]] = None

    def merge(self, other: "ColoringScan") -> "ColoringScan":
        first = self
        if other.first_miss_index is not None and (
            self.first_miss_index is None or other.first_miss_index < self.first_miss_index
        ):
            first = other
        return ColoringScan(
            self.checked + other.checked,
            self.misses + other.misses,
            first.first_miss,
            first.first_miss_index,
        )


def scan_colorings(
    graph: DeBruijnGraph,
    r: int,
    length_vertices: int,
    mode: str = MODE_EXHAUSTIVE,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    coloring_limit: Optional[int] = None,
) -> ColoringScan:
    """
    Check every (or every sampled) r-coloring of the vertices of ``graph``
    for a monochromatic path of ``length_vertices`` vertices.

    Exhaustive scans split the lexicographic enumeration into contiguous
    blocks, one per thread; sampled scans draw one seeded stream per chunk.
    Either way the merged tally does not depend on the thread count.

    Raises:
        ResourceError: exhaustive mode with r^vertex_count above EXHAUSTIVE_COLORING_LIMIT
    """
    n = graph.vertex_count
    workers = budget("DEFAULT_THREADS", threads)

    def tally(coloring: Sequence[int], position: Tuple[int, int], scan: ColoringScan) -> None:
        scan.checked += 1
        best, _back = _longest_mono_runs(graph, coloring)
        if max(best) < length_vertices:
            scan.misses += 1
            if scan.first_miss is None:
                scan.first_miss = tuple(int(c) for c in coloring)
                scan.first_miss_index = position

    if mode == MODE_EXHAUSTIVE:
        count = r ** n
        limit = budget("EXHAUSTIVE_COLORING_LIMIT", coloring_limit)
        if count > limit:
            raise ResourceError(
                f"Exhaustive scan over {r}^{n} colorings exceeds the limit {limit}",
                colorings=count, limit=limit,
            )

        def run_block(block: Tuple[int, int]) -> ColoringScan:
            scan = ColoringScan()
            for offset, coloring in enumerate(colorings_in_range(block[0], block[1], n, r)):
                tally(coloring, (0, block[0] + offset), scan)
            return scan

        jobs = partition(count, workers)
        run = run_block
    else:
        seed = resolve_seed(seed)
        draws = budget("DEFAULT_SAMPLES", samples)

        def run_chunk(job: Tuple[int, int]) -> ColoringScan:
            index, size = job
            scan = ColoringScan()
            for row, coloring in enumerate(stream(seed, index).integers(0, r, size=(size, n))):
                tally(coloring, (index, row), scan)
            return scan

        jobs = list(enumerate(chunk_sizes(draws, budget("MC_CHUNK_SIZE"))))
        run = run_chunk

    with ThreadPoolExecutor(max_workers=workers) as executor:
        scans = list(executor.map(run, jobs))
    merged = ColoringScan()
    for scan in scans:
        merged = merged.merge(scan)
    logger.info(
        f"scan_colorings(D({graph.k},{graph.m}), r={r}, l={length_vertices}, {mode}): "
        f"{merged.checked} checked, {merged.misses} without the path"
    )
    return merged
