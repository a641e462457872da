"""Community structures over entity-layer pairs.

A community structure partitions every present (entity, layer) occurrence of
a network into communities. Besides the plain partition bookkeeping this
module carries the redundancy machinery: which entity pairs of a community
are connected in one layer (P1) or several layers (P2), which layers support
a pair, and the per-layer resolution factor derived from those counts.
"""

from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path

from .errors import InputError
from .mlgraph import MultilayerNetwork


def supporting_layers(net: MultilayerNetwork, u, v) -> frozenset:
    """Layers in which the entity pair (u, v) is linked."""
    ui = net.entity_index(u)
    vi = net.entity_index(v)
    out = set()
    for li, layer in enumerate(net.layer_ids):
        if vi in net.adj_idx(li).get(ui, ()):
            out.add(layer)
    return frozenset(out)


class CommunityStructure:
    """Immutable partition of all present entity-layer pairs.

    Community labels are normalized to dense indices 0..k-1 by first
    appearance in entity-major tuple order; empty communities disappear.
    """

    def __init__(self, net: MultilayerNetwork, assignment):
        """``assignment`` maps every present (entity, layer) pair to a label."""
        self.net = net
        idx_assign = {}
        for (entity, layer), label in assignment.items():
            ei = net.entity_index(entity)
            li = net.layer_index(layer)
            if ei not in net.presence_idx(li):
                raise InputError(
                    f"assignment references ({entity!r}, {layer!r}) but the entity "
                    f"is not present in that layer")
            if (ei, li) in idx_assign:
                raise InputError(f"duplicate assignment for ({entity!r}, {layer!r})")
            idx_assign[(ei, li)] = label

        labels = {}
        assign = {}
        for ei in range(net.num_entities):
            for li in sorted(net.entity_layers_idx(ei)):
                if (ei, li) not in idx_assign:
                    raise InputError(
                        f"unassigned occurrence ({net.entity_ids[ei]!r}, {net.layer_ids[li]!r})")
                label = idx_assign[(ei, li)]
                if label not in labels:
                    labels[label] = len(labels)
                assign[(ei, li)] = labels[label]

        self._assign = assign
        k = len(labels)
        self._members = [[] for _ in range(k)]
        self._proj = [dict() for _ in range(k)]
        self._flat = [dict() for _ in range(k)]
        for (ei, li), c in sorted(assign.items()):
            self._members[c].append((ei, li))
            self._proj[c].setdefault(li, set()).add(ei)
            self._flat[c][ei] = self._flat[c].get(ei, 0) + 1
        self._proj = [{li: frozenset(s) for li, s in p.items()} for p in self._proj]

        self._deg = [dict() for _ in range(k)]
        self._dint = [dict() for _ in range(k)]
        for c in range(k):
            for li, proj in self._proj[c].items():
                adj = net.adj_idx(li)
                deg = 0
                dint = 0
                for ei in proj:
                    nb = adj.get(ei, frozenset())
                    deg += len(nb)
                    dint += len(nb & proj)
                self._deg[c][li] = deg
                self._dint[c][li] = dint
        self._pair_layers_cache = [None] * k

    @classmethod
    def from_entity_partition(cls, net: MultilayerNetwork, partition) -> "CommunityStructure":
        """Expand an entity partition to every layer where the entity is present."""
        assignment = {}
        for entity, layer in net.tuples():
            if entity not in partition:
                raise InputError(f"entity {entity!r} has no community assignment")
            assignment[(entity, layer)] = partition[entity]
        return cls(net, assignment)

    # -- partition accessors -------------------------------------------------

    @property
    def num_communities(self) -> int:
        return len(self._members)

    def communities(self) -> range:
        return range(len(self._members))

    def assignment_of(self, entity, layer) -> int:
        key = (self.net.entity_index(entity), self.net.layer_index(layer))
        if key not in self._assign:
            raise InputError(f"({entity!r}, {layer!r}) is not a present occurrence")
        return self._assign[key]

    def members(self, c: int) -> tuple:
        return tuple((self.net.entity_ids[ei], self.net.layer_ids[li])
                     for ei, li in self._members[c])

    def projection(self, c: int, layer) -> frozenset:
        """Entities of community ``c`` that lay on ``layer``."""
        li = self.net.layer_index(layer)
        proj = self._proj[c].get(li, frozenset())
        return frozenset(self.net.entity_ids[ei] for ei in proj)

    def projection_size(self, c: int, layer) -> int:
        return len(self._proj[c].get(self.net.layer_index(layer), ()))

    def shared_projection_count(self, c: int, layer_a, layer_b) -> int:
        pa = self._proj[c].get(self.net.layer_index(layer_a), frozenset())
        pb = self._proj[c].get(self.net.layer_index(layer_b), frozenset())
        return len(pa & pb)

    def degree(self, c: int, layer) -> int:
        return self._deg[c].get(self.net.layer_index(layer), 0)

    def internal_degree(self, c: int, layer) -> int:
        return self._dint[c].get(self.net.layer_index(layer), 0)

    def flat_entities(self, c: int) -> frozenset:
        """Entities with at least one occurrence in community ``c``."""
        return frozenset(self.net.entity_ids[ei] for ei in self._flat[c])

    def instance_count(self, c: int, entity) -> int:
        return self._flat[c].get(self.net.entity_index(entity), 0)

    def coupled_instance_pairs(self, c: int) -> int:
        """Unordered pairs of same-entity occurrences inside community ``c``."""
        return sum(n * (n - 1) // 2 for n in self._flat[c].values())

    # -- redundancy machinery --------------------------------------------------

    def _pair_layers(self, c: int) -> dict:
        """Entity-index pairs of community ``c`` (flattened membership) that are
        linked somewhere, mapped to their supporting layer indices."""
        cached = self._pair_layers_cache[c]
        if cached is not None:
            return cached
        flat = self._flat[c]
        pairs = {}
        for li in range(self.net.num_layers):
            for u, v in self.net.edges_idx(li):
                if u in flat and v in flat:
                    pairs.setdefault((u, v), set()).add(li)
        pairs = {p: frozenset(ls) for p, ls in pairs.items()}
        self._pair_layers_cache[c] = pairs
        return pairs

    def redundant_pairs(self, c: int):
        """(P1, P2): entity pairs of ``c`` linked in >= 1 layer and >= 2 layers."""
        pairs = self._pair_layers(c)
        ids = self.net.entity_ids
        p1 = frozenset((ids[u], ids[v]) for u, v in pairs)
        p2 = frozenset((ids[u], ids[v]) for (u, v), ls in pairs.items() if len(ls) >= 2)
        return p1, p2

    def redundancy(self, c: int) -> Fraction:
        """Supporting-layer mass of the redundant pairs of ``c``, normalized by
        the layer count times the number of connected pairs; 0 when the
        community has no connected pair."""
        pairs = self._pair_layers(c)
        if not pairs:
            return Fraction(0)
        support = sum(len(ls) for ls in pairs.values() if len(ls) >= 2)
        return Fraction(support, self.net.num_layers * len(pairs))

    def redundant_pair_count(self, c: int, layer) -> int:
        """Number of redundant pairs of ``c`` supported by ``layer``."""
        li = self.net.layer_index(layer)
        pairs = self._pair_layers(c)
        return sum(1 for ls in pairs.values() if len(ls) >= 2 and li in ls)

    def redundancy_resolution(self, c: int, layer) -> float:
        """Resolution factor for (layer, community) derived from redundancy.

        Equals 2 when the layer supports no redundant pair of the community
        and decays into (0, 1] as the count grows.
        """
        nrp = self.redundant_pair_count(c, layer)
        return 2.0 / (1.0 + math.log2(1.0 + nrp))

    # -- flattening --------------------------------------------------------------

    def flatten_majority(self) -> dict:
        """Entity partition by majority vote over the entity's occurrences.

        Ties break toward the lowest community index.
        """
        out = {}
        for ei in range(self.net.num_entities):
            votes = {}
            for li in self.net.entity_layers_idx(ei):
                c = self._assign[(ei, li)]
                votes[c] = votes.get(c, 0) + 1
            best = min(votes, key=lambda c: (-votes[c], c))
            out[self.net.entity_ids[ei]] = best
        return out

    def as_assignment(self) -> dict:
        """Plain {(entity, layer): community} mapping."""
        return {(self.net.entity_ids[ei], self.net.layer_ids[li]): c
                for (ei, li), c in sorted(self._assign.items())}


# -- community file format -------------------------------------------------------
#
# One record per line. Extended form: "u L c" assigns entity u in layer L to
# community c. Flattened form: "u c" assigns every occurrence of u to c.
# The two forms must not be mixed in one file; '#' starts a comment.


def read_communities(net: MultilayerNetwork, path) -> CommunityStructure:
    text = Path(path).read_text(encoding="utf-8")
    extended = {}
    flat = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) == 3:
            if flat:
                raise InputError(f"line {lineno}: extended record in a flattened file")
            entity, layer, label = tokens
            try:
                net.entity_index(entity)
                net.layer_index(layer)
            except KeyError as exc:
                raise InputError(f"line {lineno}: {exc.args[0]}") from None
            if (entity, layer) in extended:
                raise InputError(f"line {lineno}: duplicate assignment for ({entity}, {layer})")
            extended[(entity, layer)] = label
        elif len(tokens) == 2:
            if extended:
                raise InputError(f"line {lineno}: flattened record in an extended file")
            entity, label = tokens
            try:
                net.entity_index(entity)
            except KeyError as exc:
                raise InputError(f"line {lineno}: {exc.args[0]}") from None
            if entity in flat:
                raise InputError(f"line {lineno}: duplicate assignment for {entity}")
            flat[entity] = label
        else:
            raise InputError(f"line {lineno}: expected 2 or 3 tokens")
    if extended:
        return CommunityStructure(net, extended)
    if flat:
        return CommunityStructure.from_entity_partition(net, flat)
    raise InputError("community file is empty")


def write_communities(cs: CommunityStructure, path) -> None:
    """Write the extended (per occurrence) community file."""
    lines = [f"{entity} {layer} {c}" for (entity, layer), c in cs.as_assignment().items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_flat_partition(partition: dict, path) -> None:
    """Write a flattened community file from an entity partition."""
    lines = [f"{entity} {partition[entity]}" for entity in sorted(partition, key=str)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
