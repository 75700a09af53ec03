"""Text formats: edge lists, partition files, label-aware .td files, gadget metadata."""

from __future__ import annotations

from pathlib import Path

from .graph import Graph, GraphError, PartitionError, build_graph
from .treedecomp import TDFormatError, TreeDecomposition, format_td, parse_td


def parse_edge_list(text: str) -> Graph:
    """One edge per line as two labels; ``#`` starts a comment; ``v <label>`` declares a vertex."""
    pairs, lines, isolated = [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "v" and len(tok) == 2:
            isolated.append(tok[1])
        elif len(tok) == 2:
            pairs.append((tok[0], tok[1]))
            lines.append(lineno)
        else:
            raise GraphError(f"line {lineno}: expected two labels, got {line!r}")
    return build_graph(pairs, isolated, lines)


def format_edge_list(G: Graph) -> str:
    out = []
    touched = set()
    for u, v in G.edges:
        a, b = G.labels[u], G.labels[v]
        if a == "v":  # "v x" would read back as a vertex declaration
            a, b = b, a
        out.append(f"{a} {b}")
        touched.update((u, v))
    out.extend(f"v {G.labels[v]}" for v in range(G.n) if v not in touched)
    return "\n".join(out) + "\n"


def read_graph(path) -> Graph:
    return parse_edge_list(Path(path).read_text())


def parse_partition(text: str, G: Graph) -> list:
    """Parts as lists of vertex indices; unknown labels raise :class:`PartitionError`."""
    parts = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        part = []
        for label in line.split():
            try:
                part.append(G.index_of(label))
            except KeyError:
                raise PartitionError(f"line {lineno}: unknown vertex {label!r}") from None
        parts.append(part)
    return parts


def format_partition(G: Graph, partition) -> str:
    return "".join(" ".join(G.labels[v] for v in sorted(p)) + "\n" for p in partition)


# ---------------------------------------------------------------------------
# .td files against labelled graphs
#
# When the labels are exactly "1".."n" the wire vertex i is the vertex
# labelled "i"; otherwise wire vertex i is the i-th vertex in first-appearance
# order of the edge list.

def numeric_labels(G: Graph) -> bool:
    return sorted(G.labels) == sorted(str(i) for i in range(1, G.n + 1))


def td_from_text(text: str, G: Graph) -> TreeDecomposition:
    td = parse_td(text)
    if td.n_vertices != G.n:
        raise TDFormatError(f".td declares {td.n_vertices} vertices, graph has {G.n}")
    if numeric_labels(G):
        where = [G.index_of(str(i + 1)) for i in range(G.n)]
        td.bags = [frozenset(where[v] for v in b) for b in td.bags]
    return td


def td_to_text(td: TreeDecomposition, G: Graph) -> str:
    if numeric_labels(G):
        wire = {v: int(G.labels[v]) - 1 for v in range(G.n)}
        td = TreeDecomposition([frozenset(wire[v] for v in b) for b in td.bags], td.edges, td.root, G.n)
    return format_td(td, G.n)


# ---------------------------------------------------------------------------
# gadget metadata: one ``key=value`` per line, ``#`` comments

def format_metadata(items: dict) -> str:
    return "".join(f"{k}={v}\n" for k, v in items.items())


def parse_metadata(text: str) -> dict:
    out = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out
