"""Synthetic multilayer networks with planted communities, plus brute-force
evaluators used as independent checks by the test suite.

The planted generator draws each layer as an independent planted-partition
graph over the entities present in that layer, with one shared ground-truth
entity partition. The direct evaluator recomputes the multilayer score by
literal nested summation with no caching, and the exhaustive searcher
enumerates set partitions of the occurrence set outright; both are guarded
against instances too large for that treatment.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .community import CommunityStructure, write_flat_partition
from .errors import GuardError, InputError
from .mlgraph import (LayerOrdering, MultilayerNetwork, PairingScheme,
                      build_network, write_network)
from .modularity import CouplingPolicy, ResolutionPolicy, distance_penalty

_DIRECT_PAIR_GUARD = 10_000
_EXHAUSTIVE_TUPLE_GUARD = 12


@dataclass(frozen=True)
class PlantedSpec:
    """Parameters of the planted-partition multilayer generator."""

    entities: int
    communities: int
    layers: int
    p_in: float
    p_out: float
    presence: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.p_out <= self.p_in <= 1:
            raise InputError("need 0 <= p_out <= p_in <= 1")
        if not 0 < self.presence <= 1:
            raise InputError("need 0 < presence <= 1")
        if not 0 < self.communities <= self.entities:
            raise InputError("need 0 < communities <= entities")
        if self.layers < 1:
            raise InputError("need at least one layer")


def planted_multilayer(spec: PlantedSpec):
    """Generate (network, planted entity partition) deterministically from the seed.

    Entities are present in each layer with the given probability and forced
    into one uniformly chosen layer when they would otherwise vanish; edges
    within a layer appear with p_in inside a planted community and p_out
    across communities.
    """
    rng = random.Random(spec.seed)
    n, k, ell = spec.entities, spec.communities, spec.layers
    entities = [f"n{i:03d}" for i in range(n)]
    layers = [f"l{j:02d}" for j in range(ell)]
    planted = {entities[i]: i * k // n for i in range(n)}

    present = [[rng.random() < spec.presence for _ in range(ell)] for _ in range(n)]
    for i in range(n):
        if not any(present[i]):
            present[i][rng.randrange(ell)] = True

    edges = []
    presence_decl = []
    for j in range(ell):
        members = [i for i in range(n) if present[i][j]]
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                u, v = members[a], members[b]
                p = spec.p_in if planted[entities[u]] == planted[entities[v]] else spec.p_out
                if rng.random() < p:
                    edges.append((layers[j], entities[u], entities[v]))
        presence_decl.extend((layers[j], entities[i]) for i in members)

    ordering = LayerOrdering.natural(layers, PairingScheme.ADJACENT) if ell > 1 \
        else LayerOrdering.unordered()
    net = build_network(entities=entities, layers=layers, edges=edges,
                        presence=presence_decl, ordering=ordering)
    return net, planted


def save_planted(net: MultilayerNetwork, planted: dict, network_path, labels_path) -> None:
    """Write the generated network and its planted labels as a sidecar file."""
    write_network(net, network_path)
    write_flat_partition(planted, labels_path)


# -- literal evaluation of the multilayer score ------------------------------------


def _literal_degree(net, ei, li) -> int:
    return sum(1 for u, v in net.edges_idx(li) if ei in (u, v))


def _literal_pairings(net, li, ordering):
    ids = net.layer_ids
    if not ordering.is_natural:
        return [net.layer_index(l) for l in ids if l != ids[li]]
    pos = ordering.position(ids[li])
    if ordering.scheme is PairingScheme.ADJACENT:
        succ = ordering.sequence[pos + 1:pos + 2]
    else:
        succ = ordering.sequence[pos + 1:]
    return [net.layer_index(l) for l in succ]


def multilayer_modularity_direct(net: MultilayerNetwork, cs: CommunityStructure,
                                 resolution: ResolutionPolicy | None = None,
                                 coupling: CouplingPolicy | None = None,
                                 ordering: LayerOrdering | None = None) -> float:
    """Multilayer modularity by literal nested summation.

    Degrees, projections, redundant pairs and coupling values are all
    recomputed in place from the raw edge lists, with no shared caches, so
    this serves as an independent check of the optimized scorer. Guarded to
    networks with at most 10^4 occurrence pairs.
    """
    resolution = ResolutionPolicy.constant(1.0) if resolution is None else resolution
    coupling = CouplingPolicy.none() if coupling is None else coupling
    ordering = net.ordering if ordering is None else ordering
    n_tuples = net.num_tuples()
    if n_tuples * n_tuples > _DIRECT_PAIR_GUARD:
        raise GuardError(f"direct evaluation guard exceeded ({n_tuples} occurrences)")
    if net.num_edges() == 0:
        raise InputError("multilayer modularity is undefined on an edgeless network")

    beta = coupling.beta
    ell = net.num_layers

    # total degree, by enumeration
    norm = 0
    for li in range(ell):
        for ei in net.presence_idx(li):
            norm += _literal_degree(net, ei, li)
    if beta:
        for a in range(ell):
            for b in range(a + 1, ell):
                pa = _literal_pairings(net, a, ordering)
                pb = _literal_pairings(net, b, ordering)
                if b in pa or a in pb:
                    norm += 2 * len(net.presence_idx(a) & net.presence_idx(b))

    assign = {(net.entity_index(e), net.layer_index(l)): c
              for (e, l), c in cs.as_assignment().items()}
    k = cs.num_communities

    total = 0.0
    for c in range(k):
        flat = {ei for (ei, li), cc in assign.items() if cc == c}
        # supporting layers of every linked pair inside the flattened community
        pair_layers = {}
        for li in range(ell):
            for u, v in net.edges_idx(li):
                if u in flat and v in flat:
                    pair_layers.setdefault((u, v), set()).add(li)
        for li in range(ell):
            dint = 0
            d = 0
            for u, v in net.edges_idx(li):
                if assign.get((u, li)) == c and assign.get((v, li)) == c:
                    dint += 2
            for ei in net.presence_idx(li):
                if assign.get((ei, li)) == c:
                    d += _literal_degree(net, ei, li)
            if resolution.kind == "constant":
                gamma = resolution.gamma
            else:
                nrp = sum(1 for ls in pair_layers.values() if len(ls) >= 2 and li in ls)
                gamma = 2.0 / (1.0 + math.log2(1.0 + nrp))
            coup = 0.0
            if beta:
                proj_i = {ei for ei in net.presence_idx(li) if assign.get((ei, li)) == c}
                for lj in _literal_pairings(net, li, ordering):
                    proj_j = {ei for ei in net.presence_idx(lj) if assign.get((ei, lj)) == c}
                    shared_nodes = len(net.presence_idx(li) & net.presence_idx(lj))
                    if shared_nodes == 0:
                        continue
                    sym = Fraction(len(proj_i & proj_j), shared_nodes)
                    if coupling.kind == "symmetric":
                        value = float(sym)
                    elif coupling.kind == "asym-inner":
                        if not proj_i:
                            value = 0.0
                        else:
                            value = float(sym * Fraction(len(net.presence_idx(li)), len(proj_i)))
                    else:
                        if not proj_j:
                            value = 0.0
                        else:
                            value = float(sym * Fraction(len(net.presence_idx(lj)), len(proj_j)))
                    if coupling.time_aware:
                        dist = abs(ordering.position(net.layer_ids[lj])
                                   - ordering.position(net.layer_ids[li]))
                        value *= distance_penalty(dist)
                    coup += value
            total += dint - gamma * d * d / norm + beta * coup
    return total / norm


# -- exhaustive optimum over tiny instances ------------------------------------------


def _restricted_growth_strings(n: int, max_blocks: int):
    """All set partitions of range(n) as restricted-growth strings, in
    lexicographic order, with at most ``max_blocks`` blocks."""
    code = [0] * n

    def rec(i, used):
        if i == n:
            yield tuple(code)
            return
        for c in range(min(used + 1, max_blocks)):
            code[i] = c
            yield from rec(i + 1, max(used, c + 1))

    yield from rec(0, 0)


def best_partition_exhaustive(net: MultilayerNetwork,
                              resolution: ResolutionPolicy | None = None,
                              coupling: CouplingPolicy | None = None,
                              ordering: LayerOrdering | None = None,
                              max_communities: int | None = None):
    """Exhaustive optimum of the multilayer score over occurrence partitions.

    Returns (assignment, best_score) where assignment maps each (entity, layer)
    occurrence to a community index. Ties resolve to the lexicographically
    smallest restricted-growth string. Guarded to at most 12 occurrences.
    """
    tuples = list(net.tuples())
    if len(tuples) > _EXHAUSTIVE_TUPLE_GUARD:
        raise GuardError(
            f"exhaustive search guard exceeded ({len(tuples)} occurrences, limit "
            f"{_EXHAUSTIVE_TUPLE_GUARD})")
    if max_communities is None:
        max_communities = len(tuples)

    from .modularity import multilayer_modularity

    best_code = None
    best_value = None
    for code in _restricted_growth_strings(len(tuples), max_communities):
        assignment = {tuples[i]: code[i] for i in range(len(tuples))}
        cs = CommunityStructure(net, assignment)
        value = multilayer_modularity(net, cs, resolution, coupling, ordering).total
        if best_value is None or value > best_value:
            best_value = value
            best_code = code
    return {tuples[i]: best_code[i] for i in range(len(tuples))}, best_value
