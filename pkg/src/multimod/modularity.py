"""Quality functions for single-layer and multilayer community structures.

Three scores live here. ``newman_modularity`` is the classic single-graph
measure. ``multislice_modularity`` couples the occurrences of an entity
across every unordered layer pair with a constant weight and keeps a
layer-local null model. ``multilayer_modularity`` normalizes globally,
lets the resolution factor vary per layer and community, and scores the
inter-layer couplings through community projections, optionally restricted
and penalized by a natural layer ordering.

Projection-based coupling values are returned as exact rationals; the
composite scores are floats accumulated with ``math.fsum`` in a fixed order
(community index, then layer index), so results are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .community import CommunityStructure
from .errors import InputError, PolicyError
from .mlgraph import LayerGraph, LayerOrdering, MultilayerNetwork


@dataclass(frozen=True)
class ResolutionPolicy:
    """Null-model multiplier: a constant, or derived from community redundancy."""

    kind: str  # "constant" | "redundancy"
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "redundancy"):
            raise PolicyError(f"unknown resolution policy {self.kind!r}")
        if self.kind == "constant" and self.gamma < 0:
            raise PolicyError("constant resolution requires gamma >= 0")

    @classmethod
    def constant(cls, gamma: float = 1.0) -> "ResolutionPolicy":
        return cls("constant", float(gamma))

    @classmethod
    def redundancy(cls) -> "ResolutionPolicy":
        return cls("redundancy")

    def value(self, cs: CommunityStructure, c: int, layer) -> float:
        if self.kind == "constant":
            return self.gamma
        return cs.redundancy_resolution(c, layer)


@dataclass(frozen=True)
class CouplingPolicy:
    """Inter-layer coupling selector; ``none`` switches the coupling term off."""

    kind: str  # "none" | "symmetric" | "asym-inner" | "asym-outer"
    time_aware: bool = False

    def __post_init__(self):
        if self.kind not in ("none", "symmetric", "asym-inner", "asym-outer"):
            raise PolicyError(f"unknown coupling policy {self.kind!r}")
        if self.time_aware and self.kind not in ("asym-inner", "asym-outer"):
            raise PolicyError("time-aware coupling requires an asymmetric policy")

    @classmethod
    def none(cls) -> "CouplingPolicy":
        return cls("none")

    @classmethod
    def symmetric(cls) -> "CouplingPolicy":
        return cls("symmetric")

    @classmethod
    def asym_inner(cls, time_aware: bool = False) -> "CouplingPolicy":
        return cls("asym-inner", time_aware)

    @classmethod
    def asym_outer(cls, time_aware: bool = False) -> "CouplingPolicy":
        return cls("asym-outer", time_aware)

    @property
    def beta(self) -> int:
        return 0 if self.kind == "none" else 1


@dataclass(frozen=True)
class ScoreTerm:
    """Raw (un-normalized) contribution of one community in one layer."""

    community: int
    layer: object
    intra: float
    null_model: float
    coupling: float


@dataclass(frozen=True)
class ScoreReport:
    """Decomposed multilayer modularity value.

    ``total`` always equals the fsum of per-community term sums divided by
    ``normalization``; :meth:`recompute_total` replays that exact reduction.
    """

    total: float
    normalization: int
    terms: tuple = ()
    policy: dict = field(default_factory=dict)

    def community_total(self, c: int) -> float:
        return math.fsum(t.intra - t.null_model + t.coupling
                         for t in self.terms if t.community == c)

    def recompute_total(self) -> float:
        communities = sorted({t.community for t in self.terms})
        return math.fsum(self.community_total(c) for c in communities) / self.normalization

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "normalization": self.normalization,
            "policy": dict(self.policy),
            "terms": [
                {"community": t.community, "layer": str(t.layer), "intra": t.intra,
                 "null_model": t.null_model, "coupling": t.coupling}
                for t in self.terms
            ],
        }

    def to_tsv(self) -> str:
        lines = ["community\tlayer\tintra\tnull_model\tcoupling"]
        for t in self.terms:
            lines.append(f"{t.community}\t{t.layer}\t{t.intra!r}\t{t.null_model!r}\t{t.coupling!r}")
        return "\n".join(lines) + "\n"


# -- classic modularity ---------------------------------------------------------


def newman_modularity(graph: LayerGraph, partition) -> float:
    """Classic modularity of a node partition on a plain undirected graph."""
    if graph.edge_count == 0:
        raise InputError("modularity is undefined on an edgeless graph")
    groups = {}
    for node in graph.nodes:
        if node not in partition:
            raise InputError(f"node {node!r} has no community assignment")
        groups.setdefault(partition[node], set()).add(node)
    two_m = 2 * graph.edge_count
    parts = []
    for label in sorted(groups, key=str):
        members = groups[label]
        deg = 0
        dint = 0
        for v in members:
            nb = graph.adjacency.get(v, frozenset())
            deg += len(nb)
            dint += len(nb & members)
        parts.append(dint / two_m - (deg / two_m) ** 2)
    return math.fsum(parts)


# -- multislice modularity --------------------------------------------------------


def coupling_pair_total(net: MultilayerNetwork) -> int:
    """Constant-coupling edge count: one per entity and unordered layer pair
    in which the entity is present on both sides."""
    total = 0
    for ei in range(net.num_entities):
        n = len(net.entity_layers_idx(ei))
        total += n * (n - 1) // 2
    return total


def multislice_modularity(net: MultilayerNetwork, cs: CommunityStructure,
                          gamma=1.0, omega: float = 0.0) -> float:
    """Multislice modularity with constant inter-layer coupling weight.

    Args:
        gamma: per-layer resolution, a scalar broadcast to all layers or a
            sequence with one value per layer (dense layer order).
        omega: coupling weight applied to every unordered layer pair sharing
            an entity's occurrences.

    Each layer uses its own null model, so any layer that contains assigned
    occurrences but no edges is an error. The normalization adds twice the
    omega-weighted coupling edge count to twice the intra-layer edge count.
    """
    ell = net.num_layers
    if isinstance(gamma, (int, float)):
        gammas = [float(gamma)] * ell
    else:
        gammas = [float(g) for g in gamma]
        if len(gammas) != ell:
            raise PolicyError(f"expected {ell} per-layer gamma values, got {len(gammas)}")
    if any(g < 0 for g in gammas):
        raise PolicyError("gamma must be >= 0")
    if omega < 0:
        raise PolicyError("omega must be >= 0")
    for li, layer in enumerate(net.layer_ids):
        if net.presence_idx(li) and not net.edges_idx(li):
            raise InputError(
                f"layer {layer!r} has assigned occurrences but no edges; "
                f"its null model is undefined")

    norm = 2 * net.num_edges() + 2 * omega * coupling_pair_total(net)
    community_sums = []
    for c in cs.communities():
        layer_terms = []
        for li, layer in enumerate(net.layer_ids):
            two_e = 2 * len(net.edges_idx(li))
            if two_e == 0:
                continue
            d = cs.degree(c, layer)
            layer_terms.append(cs.internal_degree(c, layer) - gammas[li] * d * d / two_e)
        layer_terms.append(2.0 * omega * cs.coupled_instance_pairs(c))
        community_sums.append(math.fsum(layer_terms))
    return math.fsum(community_sums) / norm


# -- projection-based inter-layer coupling --------------------------------------


def symmetric_coupling(cs: CommunityStructure, c: int, layer_i, layer_j) -> Fraction:
    """Shared projection of the community over the shared node set of the two
    layers; 0 when the layers share no entity."""
    shared_nodes = cs.net.shared_entity_count(layer_i, layer_j)
    if shared_nodes == 0:
        return Fraction(0)
    return Fraction(cs.shared_projection_count(c, layer_i, layer_j), shared_nodes)


def asymmetric_coupling(cs: CommunityStructure, c: int, layer_i, layer_j) -> Fraction:
    """Symmetric coupling rescaled by how small the community's projection on
    the source layer is relative to that layer; 0 for an empty projection.

    Values may exceed 1; no clamping is applied.
    """
    proj = cs.projection_size(c, layer_i)
    if proj == 0:
        return Fraction(0)
    li = cs.net.layer_index(layer_i)
    layer_size = len(cs.net.presence_idx(li))
    return symmetric_coupling(cs, c, layer_i, layer_j) * Fraction(layer_size, proj)


def distance_penalty(distance: int) -> float:
    """Smooth decay factor for coupling layers ``distance`` positions apart."""
    if distance < 1:
        raise PolicyError("layer distance must be >= 1")
    return 2.0 / (1.0 + math.log2(1.0 + distance))


def time_aware_coupling(cs: CommunityStructure, c: int, layer_i, layer_j,
                        ordering: LayerOrdering | None = None) -> float:
    """Asymmetric coupling scaled down by the positional distance of the two
    layers in the natural order; distance 1 applies no penalty."""
    ordering = cs.net.ordering if ordering is None else ordering
    if not ordering.is_natural:
        raise PolicyError("time-aware coupling requires a natural layer ordering")
    distance = abs(ordering.position(layer_j) - ordering.position(layer_i))
    return float(asymmetric_coupling(cs, c, layer_i, layer_j)) * distance_penalty(distance)


# -- multilayer modularity --------------------------------------------------------


def _coupling_value(cs, c, layer, other, coupling, ordering) -> float:
    if coupling.kind == "symmetric":
        value = float(symmetric_coupling(cs, c, layer, other))
    elif coupling.kind == "asym-inner":
        value = float(asymmetric_coupling(cs, c, layer, other))
    else:  # asym-outer
        value = float(asymmetric_coupling(cs, c, other, layer))
    if coupling.time_aware:
        distance = abs(ordering.position(other) - ordering.position(layer))
        value *= distance_penalty(distance)
    return value


def multilayer_modularity(net: MultilayerNetwork, cs: CommunityStructure,
                          resolution: ResolutionPolicy | None = None,
                          coupling: CouplingPolicy | None = None,
                          ordering: LayerOrdering | None = None) -> ScoreReport:
    """Multilayer modularity with pluggable resolution and coupling policies.

    For each community and layer the score accumulates the internal degree,
    subtracts the resolution-weighted squared community degree over the total
    degree, and adds the coupling value against every validly paired layer.
    The sum is normalized by the total degree of the multilayer graph, which
    counts the coupling edges the chosen policy actually admits.

    A single layer with constant resolution 1 and coupling ``none`` reduces
    exactly to classic modularity.
    """
    resolution = ResolutionPolicy.constant(1.0) if resolution is None else resolution
    coupling = CouplingPolicy.none() if coupling is None else coupling
    ordering = net.ordering if ordering is None else ordering
    if net.num_edges() == 0:
        raise InputError("multilayer modularity is undefined on an edgeless network")
    if coupling.time_aware and not ordering.is_natural:
        raise PolicyError("time-aware coupling requires a natural layer ordering")

    beta = coupling.beta
    norm = net.total_degree(beta=beta, ordering=ordering)
    terms = []
    community_sums = []
    for c in cs.communities():
        layer_terms = []
        for layer in net.layer_ids:
            intra = float(cs.internal_degree(c, layer))
            d = cs.degree(c, layer)
            null = resolution.value(cs, c, layer) * d * d / norm
            coup = 0.0
            if beta:
                coup = math.fsum(
                    _coupling_value(cs, c, layer, other, coupling, ordering)
                    for other in net.valid_pairings(layer, ordering))
            terms.append(ScoreTerm(c, layer, intra, null, coup))
            layer_terms.append(intra - null + coup)
        community_sums.append(math.fsum(layer_terms))
    total = math.fsum(community_sums) / norm

    policy = {
        "objective": "multilayer",
        "resolution": resolution.kind,
        "gamma": resolution.gamma if resolution.kind == "constant" else None,
        "coupling": coupling.kind,
        "time_aware": coupling.time_aware,
        "ordering": "natural" if ordering.is_natural else "unordered",
        "scheme": ordering.scheme.value if ordering.is_natural else None,
        "beta": beta,
    }
    return ScoreReport(total=total, normalization=norm, terms=tuple(terms), policy=policy)
