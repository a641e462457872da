"""Immutable multilayer network model.

A multilayer network couples one shared entity set across several layers.
Each layer carries its own presence set and its own undirected, unweighted
intra-layer edges. Inter-layer links are implicit: an entity present in two
layers couples those layers through its two occurrences. Entities may be
present in a layer without any incident edge there (declared presence).

Networks are immutable once built; every query below is a pure function of
the network and safe to call concurrently.
"""

from __future__ import annotations

import statistics
from collections import deque
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import InputError


class PairingScheme(Enum):
    """Which layer pairs may couple when the layers are naturally ordered."""

    ADJACENT = "adjacent"  # each layer pairs with its immediate successor
    PAIRWISE = "pairwise"  # each layer pairs with every later layer


@dataclass(frozen=True)
class LayerOrdering:
    """Optional natural order over the layers plus the pairing constraint.

    ``sequence is None`` means the layers are unordered and every layer pairs
    with every other one. A natural ordering needs a pairing scheme;
    ``time_aware`` additionally requires a natural ordering.
    """

    sequence: tuple | None = None
    scheme: PairingScheme | None = None
    time_aware: bool = False

    def __post_init__(self):
        if self.sequence is None:
            if self.scheme is not None or self.time_aware:
                raise InputError("unordered layers admit no pairing scheme or time-awareness")
        else:
            if len(set(self.sequence)) != len(self.sequence):
                raise InputError("layer ordering contains duplicates")
            if self.scheme is None:
                raise InputError("a natural layer ordering requires a pairing scheme")

    @classmethod
    def unordered(cls) -> "LayerOrdering":
        return cls()

    @classmethod
    def natural(cls, sequence, scheme: PairingScheme = PairingScheme.ADJACENT,
                time_aware: bool = False) -> "LayerOrdering":
        return cls(tuple(sequence), scheme, time_aware)

    @property
    def is_natural(self) -> bool:
        return self.sequence is not None

    def position(self, layer) -> int:
        if not self.is_natural:
            raise InputError("layers are unordered, no positions defined")
        try:
            return self.sequence.index(layer)
        except ValueError:
            raise InputError(f"layer {layer!r} is not part of the ordering") from None


@dataclass(frozen=True)
class LayerStats:
    """Single-layer structural summary."""

    degree_mean: float
    degree_std: float
    avg_path_length: float
    clustering_coefficient: float


@dataclass(frozen=True)
class LayerGraph:
    """Read-only view of one layer as a plain undirected graph."""

    layer: object
    nodes: tuple
    adjacency: dict  # entity id -> frozenset of neighbour ids
    edge_count: int

    def degree(self, node) -> int:
        return len(self.adjacency.get(node, ()))


class MultilayerNetwork:
    """Entities, layers, per-layer presence and edge sets, optional ordering.

    Use :func:`build_network` or :func:`read_network` to construct instances;
    the constructor is internal.
    """

    def __init__(self, entity_ids, layer_ids, presence, adj, edges, entity_layers, ordering):
        self._entity_ids = entity_ids
        self._entity_index = {e: i for i, e in enumerate(entity_ids)}
        self._layer_ids = layer_ids
        self._layer_index = {l: i for i, l in enumerate(layer_ids)}
        self._presence = presence          # per layer: frozenset of entity indices
        self._adj = adj                    # per layer: dict idx -> frozenset of idx
        self._edges = edges                # per layer: tuple of (u, v) with u < v
        self._entity_layers = entity_layers  # per entity: frozenset of layer indices
        self.ordering = ordering

    # -- basic accessors ---------------------------------------------------

    @property
    def entity_ids(self) -> tuple:
        return self._entity_ids

    @property
    def layer_ids(self) -> tuple:
        return self._layer_ids

    @property
    def num_entities(self) -> int:
        return len(self._entity_ids)

    @property
    def num_layers(self) -> int:
        return len(self._layer_ids)

    def entity_index(self, entity) -> int:
        try:
            return self._entity_index[entity]
        except KeyError:
            raise KeyError(f"unknown entity {entity!r}") from None

    def layer_index(self, layer) -> int:
        try:
            return self._layer_index[layer]
        except KeyError:
            raise KeyError(f"unknown layer {layer!r}") from None

    def num_edges(self, layer=None) -> int:
        if layer is None:
            return sum(len(e) for e in self._edges)
        return len(self._edges[self.layer_index(layer)])

    def layer_entities(self, layer) -> frozenset:
        li = self.layer_index(layer)
        return frozenset(self._entity_ids[i] for i in self._presence[li])

    def entity_layers(self, entity) -> frozenset:
        ei = self.entity_index(entity)
        return frozenset(self._layer_ids[i] for i in self._entity_layers[ei])

    def is_present(self, entity, layer) -> bool:
        return self.entity_index(entity) in self._presence[self.layer_index(layer)]

    def tuples(self):
        """All present (entity, layer) pairs, entity-major order."""
        for ei in range(len(self._entity_ids)):
            for li in sorted(self._entity_layers[ei]):
                yield self._entity_ids[ei], self._layer_ids[li]

    def num_tuples(self) -> int:
        return sum(len(ls) for ls in self._entity_layers)

    # index-level accessors used by the scoring and detection modules
    def presence_idx(self, li: int) -> frozenset:
        return self._presence[li]

    def adj_idx(self, li: int) -> dict:
        return self._adj[li]

    def edges_idx(self, li: int) -> tuple:
        return self._edges[li]

    def entity_layers_idx(self, ei: int) -> frozenset:
        return self._entity_layers[ei]

    # -- degree and pairing queries -----------------------------------------

    def intra_degree(self, entity, layer) -> int:
        """Number of intra-layer edges of ``entity`` inside ``layer``.

        Raises InputError if the entity is not present in the layer, which is
        distinct from a present-but-isolated entity (degree 0).
        """
        ei = self.entity_index(entity)
        li = self.layer_index(layer)
        if ei not in self._presence[li]:
            raise InputError(f"entity {entity!r} is not present in layer {layer!r}")
        return len(self._adj[li].get(ei, ()))

    def valid_pairings(self, layer, ordering: LayerOrdering | None = None) -> list:
        """Layers that ``layer`` may couple with, in deterministic order.

        Unordered: every other layer. Natural order with the adjacent scheme:
        the immediate successor only. Natural order with the pair-wise scheme:
        all strict successors.
        """
        ordering = self.ordering if ordering is None else ordering
        self.layer_index(layer)
        if not ordering.is_natural:
            return [l for l in self._layer_ids if l != layer]
        pos = ordering.position(layer)
        if ordering.scheme is PairingScheme.ADJACENT:
            return list(ordering.sequence[pos + 1:pos + 2])
        return list(ordering.sequence[pos + 1:])

    def shared_entity_count(self, layer_a, layer_b) -> int:
        ia = self.layer_index(layer_a)
        ib = self.layer_index(layer_b)
        return len(self._presence[ia] & self._presence[ib])

    def coupling_count(self, beta: int = 1, ordering: LayerOrdering | None = None) -> int:
        """Total shared-entity count over all valid (ordered) pairings.

        This is the number of coupling terms the multilayer quality function
        evaluates; with unordered layers each coupled occurrence pair shows up
        once per direction.
        """
        if beta == 0:
            return 0
        ordering = self.ordering if ordering is None else ordering
        total = 0
        for layer in self._layer_ids:
            for other in self.valid_pairings(layer, ordering):
                total += self.shared_entity_count(layer, other)
        return total

    def coupling_edges(self, beta: int = 1, ordering: LayerOrdering | None = None) -> int:
        """Number of distinct inter-layer coupling edges admitted by the ordering.

        A coupling edge joins the two occurrences of one entity in a valid
        layer pair and is counted once regardless of direction.
        """
        if beta == 0:
            return 0
        ordering = self.ordering if ordering is None else ordering
        if not ordering.is_natural:
            total = 0
            for a in range(len(self._layer_ids)):
                for b in range(a + 1, len(self._layer_ids)):
                    total += len(self._presence[a] & self._presence[b])
            return total
        # under a natural ordering every valid pairing is one-directional
        return self.coupling_count(beta, ordering)

    def total_degree(self, beta: int = 1, ordering: LayerOrdering | None = None) -> int:
        """Total degree of the multilayer graph, couplings included.

        Every intra-layer edge contributes 2, and every distinct coupling edge
        admitted by the ordering contributes 2 (one per endpoint). With
        ``beta=0`` this reduces to twice the total intra-layer edge count.
        """
        total = 2 * self.num_edges() + 2 * self.coupling_edges(beta, ordering)
        if total == 0:
            raise InputError("degenerate normalization: network has no edges and no couplings")
        return total

    # -- dataset statistics --------------------------------------------------

    def node_coverage(self) -> float:
        """Mean over layers of the fraction of entities present in the layer."""
        if self.num_entities == 0:
            raise InputError("network has no entities")
        n = self.num_entities
        return sum(len(p) / n for p in self._presence) / self.num_layers

    def edge_coverage(self) -> float:
        """Mean over layers of the layer's share of all edges (1/num_layers)."""
        m = self.num_edges()
        if m == 0:
            raise InputError("network has no edges")
        return sum(len(e) / m for e in self._edges) / self.num_layers

    def layer_graph(self, layer) -> LayerGraph:
        li = self.layer_index(layer)
        adj = {self._entity_ids[u]: frozenset(self._entity_ids[v] for v in nb)
               for u, nb in self._adj[li].items()}
        nodes = tuple(self._entity_ids[i] for i in sorted(self._presence[li]))
        for n in nodes:
            adj.setdefault(n, frozenset())
        return LayerGraph(layer, nodes, adj, len(self._edges[li]))

    def monoplex_stats(self, layer) -> LayerStats:
        """Degree mean/std (population), average shortest-path length over
        connected pairs, and mean local clustering coefficient for one layer.

        Nodes of degree < 2 contribute 0 to clustering; with no connected pair
        the average path length is reported as 0.0.
        """
        li = self.layer_index(layer)
        nodes = sorted(self._presence[li])
        if not nodes:
            raise InputError(f"layer {layer!r} is empty")
        adj = self._adj[li]
        degrees = [len(adj.get(v, ())) for v in nodes]
        return LayerStats(
            degree_mean=statistics.fmean(degrees),
            degree_std=statistics.pstdev(degrees),
            avg_path_length=_avg_path_length(adj, nodes),
            clustering_coefficient=_mean_clustering(adj, nodes),
        )


def _avg_path_length(adj, nodes) -> float:
    total = 0
    pairs = 0
    for s in nodes:
        dist = {s: 0}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in adj.get(u, ()):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        total += sum(dist.values())
        pairs += len(dist) - 1
    return total / pairs if pairs else 0.0


def _mean_clustering(adj, nodes) -> float:
    values = []
    for v in nodes:
        nb = adj.get(v, frozenset())
        k = len(nb)
        if k < 2:
            values.append(0.0)
            continue
        nbl = list(nb)
        links = 0
        for i, u in enumerate(nbl):
            au = adj[u]
            links += sum(1 for w in nbl[i + 1:] if w in au)
        values.append(2 * links / (k * (k - 1)))
    return statistics.fmean(values)


def build_network(entities=(), layers=(), edges=(), ordering: LayerOrdering | None = None,
                  presence=()) -> MultilayerNetwork:
    """Assemble a normalized, deduplicated multilayer network.

    Args:
        entities: optional upfront entity declarations (ids, any hashable).
        layers: layer ids in declaration order; duplicates are an error.
        edges: iterable of (layer, u, v) intra-layer edges; endpoints register
            the entities; duplicates collapse; self-loops are rejected.
        ordering: optional LayerOrdering; a natural ordering must be a
            permutation of the layers and fixes the dense layer indexing.
        presence: iterable of (layer, entity) declaring presence without edges.

    Every entity must end up present in at least one layer.
    """
    layer_list = list(layers)
    if len(set(layer_list)) != len(layer_list):
        raise InputError("duplicate layer id in layer declaration")
    if not layer_list:
        raise InputError("a multilayer network needs at least one layer")
    ordering = LayerOrdering.unordered() if ordering is None else ordering
    if ordering.is_natural:
        if set(ordering.sequence) != set(layer_list) or len(ordering.sequence) != len(layer_list):
            raise InputError("layer ordering is not a permutation of the declared layers")
        layer_list = list(ordering.sequence)
    layer_index = {l: i for i, l in enumerate(layer_list)}

    entity_list = []
    entity_index = {}

    def intern(entity):
        if entity not in entity_index:
            entity_index[entity] = len(entity_list)
            entity_list.append(entity)
        return entity_index[entity]

    for e in entities:
        intern(e)

    present = [set() for _ in layer_list]
    edge_sets = [set() for _ in layer_list]
    for layer, entity in presence:
        if layer not in layer_index:
            raise InputError(f"presence declaration references unknown layer {layer!r}")
        present[layer_index[layer]].add(intern(entity))
    for layer, u, v in edges:
        if layer not in layer_index:
            raise InputError(f"edge ({u!r}, {v!r}) references unknown layer {layer!r}")
        ui, vi = intern(u), intern(v)
        if ui == vi:
            raise InputError(f"self-loop on {u!r} in layer {layer!r}")
        li = layer_index[layer]
        present[li].update((ui, vi))
        edge_sets[li].add((min(ui, vi), max(ui, vi)))

    entity_layers = [set() for _ in entity_list]
    for li, p in enumerate(present):
        for ei in p:
            entity_layers[ei].add(li)
    for ei, ls in enumerate(entity_layers):
        if not ls:
            raise InputError(f"entity {entity_list[ei]!r} is not present in any layer")

    adj = []
    for li in range(len(layer_list)):
        a = {}
        for u, v in edge_sets[li]:
            a.setdefault(u, set()).add(v)
            a.setdefault(v, set()).add(u)
        adj.append({u: frozenset(nb) for u, nb in a.items()})

    return MultilayerNetwork(
        entity_ids=tuple(entity_list),
        layer_ids=tuple(layer_list),
        presence=tuple(frozenset(p) for p in present),
        adj=tuple(adj),
        edges=tuple(tuple(sorted(es)) for es in edge_sets),
        entity_layers=tuple(frozenset(ls) for ls in entity_layers),
        ordering=ordering,
    )


# -- edge-list text format ----------------------------------------------------
#
# One record per line, whitespace separated:
#   L u v            intra-layer edge between entities u and v in layer L
#   %presence L u    entity u is present in layer L without requiring an edge
#   %order L1 L2 ..  natural order over all layers (at most once)
#   # ...            comment, also allowed after a record
# Identifiers are arbitrary non-whitespace tokens.


def parse_network_text(text: str):
    """Parse edge-list text into (layers, edges, presences, order or None)."""
    layers = []
    seen_layers = set()
    edges = []
    presences = []
    order = None

    def note_layer(l):
        if l not in seen_layers:
            seen_layers.add(l)
            layers.append(l)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "%order":
            if order is not None:
                raise InputError(f"line {lineno}: duplicate %order directive")
            if len(tokens) < 2:
                raise InputError(f"line {lineno}: %order needs at least one layer")
            order = tuple(tokens[1:])
            for l in order:
                note_layer(l)
        elif tokens[0] == "%presence":
            if len(tokens) != 3:
                raise InputError(f"line {lineno}: %presence expects 'L u'")
            note_layer(tokens[1])
            presences.append((tokens[1], tokens[2]))
        elif tokens[0].startswith("%"):
            raise InputError(f"line {lineno}: unknown directive {tokens[0]!r}")
        else:
            if len(tokens) != 3:
                raise InputError(f"line {lineno}: expected 3 tokens")
            note_layer(tokens[0])
            edges.append((tokens[0], tokens[1], tokens[2]))
    return layers, edges, presences, order


def read_network(path, ordering_mode: str = "auto", time_aware: bool = False) -> MultilayerNetwork:
    """Read a network file.

    ordering_mode selects the LayerOrdering:
      "auto"              natural adjacent order when the file has %order,
                          otherwise unordered
      "none"              unordered, even if the file declares %order
      "natural-adjacent"  natural order (the %order sequence, or declaration
                          order when absent) with adjacent pairing
      "natural-pairwise"  same with pair-wise pairing
    """
    text = Path(path).read_text(encoding="utf-8")
    layers, edges, presences, order = parse_network_text(text)
    if ordering_mode == "auto":
        ordering_mode = "natural-adjacent" if order is not None else "none"
    if ordering_mode == "none":
        ordering = LayerOrdering.unordered()
        if time_aware:
            raise InputError("time-aware coupling requires a natural layer ordering")
    elif ordering_mode in ("natural-adjacent", "natural-pairwise"):
        scheme = PairingScheme.ADJACENT if ordering_mode.endswith("adjacent") else PairingScheme.PAIRWISE
        sequence = order if order is not None else tuple(layers)
        ordering = LayerOrdering.natural(sequence, scheme, time_aware)
    else:
        raise InputError(f"unknown ordering mode {ordering_mode!r}")
    return build_network(layers=layers, edges=edges, presence=presences, ordering=ordering)


def write_network(net: MultilayerNetwork, path) -> None:
    """Write a network in the edge-list format; round-trips exactly."""
    lines = []
    if net.ordering.is_natural:
        lines.append("%order " + " ".join(str(l) for l in net.ordering.sequence))
    for li, layer in enumerate(net.layer_ids):
        adj = net.adj_idx(li)
        for ei in sorted(net.presence_idx(li)):
            if not adj.get(ei):
                lines.append(f"%presence {layer} {net.entity_ids[ei]}")
    for li, layer in enumerate(net.layer_ids):
        for u, v in net.edges_idx(li):
            lines.append(f"{layer} {net.entity_ids[u]} {net.entity_ids[v]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
