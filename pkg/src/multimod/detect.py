"""Community detection over multilayer networks.

The main routine is a Louvain-style greedy optimizer that assigns every
(entity, layer) occurrence separately: occurrences are visited in seeded
shuffled order and moved to the neighboring or coupled community with the
best positive gain; once a full pass stalls, occurrences sharing a community
and a layer are fused into super-node blocks and the moving continues at the
coarser granularity. Gains are exact objective differences computed from
integer per-community aggregates, so the objective never decreases.

Also here: a single-layer Louvain wrapper, the per-layer aggregation
baseline with majority voting, and normalized mutual information.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .community import CommunityStructure
from .errors import InputError, PolicyError
from .mlgraph import LayerOrdering, MultilayerNetwork, build_network
from .modularity import (CouplingPolicy, ResolutionPolicy, distance_penalty,
                         multilayer_modularity, multislice_modularity)

_EMPTY = frozenset()


@dataclass(frozen=True)
class MultisliceObjective:
    """Optimize the multislice score with fixed gamma(s) and coupling weight."""

    gamma: object = 1.0  # scalar or per-layer sequence
    omega: float = 0.0


@dataclass(frozen=True)
class MultilayerObjective:
    """Optimize the multilayer score under the given policies."""

    resolution: ResolutionPolicy = field(default_factory=lambda: ResolutionPolicy.constant(1.0))
    coupling: CouplingPolicy = field(default_factory=CouplingPolicy.none)
    ordering: LayerOrdering | None = None  # defaults to the network's ordering


@dataclass(frozen=True)
class DetectConfig:
    objective: object = field(default_factory=MultilayerObjective)
    seed: int = 0
    max_passes: int = 50
    min_gain: float = 1e-9

    def __post_init__(self):
        if self.min_gain <= 0:
            raise PolicyError("min_gain must be > 0")
        if self.max_passes < 1:
            raise PolicyError("max_passes must be >= 1")


@dataclass(frozen=True)
class DetectResult:
    structure: CommunityStructure
    partition: dict            # entity -> community (majority vote)
    objective: float           # re-scored value of `structure`
    passes: int
    moves: int


class _Comm:
    """Mutable per-community aggregates; all counters are exact integers."""

    __slots__ = ("tuples", "proj", "flat", "deg", "dint", "inter", "nrp", "cpairs")

    def __init__(self):
        self.tuples = set()     # {(e, l)}
        self.proj = {}          # l -> set(e)
        self.flat = {}          # e -> occurrence count
        self.deg = {}           # l -> int
        self.dint = {}          # l -> int
        self.inter = {}         # (i, j) i < j -> |proj[i] & proj[j]|
        self.nrp = {}           # l -> redundant pairs supported by l
        self.cpairs = 0         # same-entity occurrence pairs


class _Unit:
    """A movable block: one or more occurrences of a single layer."""

    __slots__ = ("layer", "entities", "tuples", "within", "degsum")

    def __init__(self, layer, entities, tuples, within, degsum):
        self.layer = layer
        self.entities = entities
        self.tuples = tuples
        self.within = within    # edges among the block's entities in `layer`
        self.degsum = degsum    # their total intra-layer degree


class _Patch:
    __slots__ = ("ddint", "ddeg", "dinter", "flat_step", "dnrp", "dcpairs")

    def __init__(self, ddint=0, ddeg=0, dinter=None, flat_step=None, dnrp=None, dcpairs=0):
        self.ddint = ddint
        self.ddeg = ddeg
        self.dinter = dinter or {}
        self.flat_step = flat_step
        self.dnrp = dnrp or {}
        self.dcpairs = dcpairs


def _make_unit(net, layer, entities):
    entities = tuple(sorted(entities))
    adj = net.adj_idx(layer)
    eset = set(entities)
    within = sum(len(adj.get(v, _EMPTY) & eset) for v in entities) // 2
    degsum = sum(len(adj.get(v, _EMPTY)) for v in entities)
    return _Unit(layer, entities, tuple((v, layer) for v in entities), within, degsum)


def _redundant_pair_adjacency(net):
    """entity -> tuple of (partner, supporting layer indices) over pairs linked
    in at least two layers."""
    pair_layers = {}
    for li in range(net.num_layers):
        for u, v in net.edges_idx(li):
            pair_layers.setdefault((u, v), []).append(li)
    rp = {}
    for (u, v), layers in pair_layers.items():
        if len(layers) < 2:
            continue
        sl = tuple(layers)
        rp.setdefault(u, []).append((v, sl))
        rp.setdefault(v, []).append((u, sl))
    return {e: tuple(ps) for e, ps in rp.items()}


class _MultilayerEngine:
    """Exact gain evaluation for the multilayer objective."""

    def __init__(self, net, objective):
        self.net = net
        self.resolution = objective.resolution
        self.coupling = objective.coupling
        ordering = objective.ordering if objective.ordering is not None else net.ordering
        if self.coupling.time_aware and not ordering.is_natural:
            raise PolicyError("time-aware coupling requires a natural layer ordering")
        self.beta = self.coupling.beta
        self.norm = float(net.total_degree(beta=self.beta, ordering=ordering))
        self.redundancy = self.resolution.kind == "redundancy"
        self.rp_adj = _redundant_pair_adjacency(net) if self.redundancy else {}

        ell = net.num_layers
        self.vsize = [len(net.presence_idx(l)) for l in range(ell)]
        self.vinter = {}
        for a in range(ell):
            for b in range(a + 1, ell):
                self.vinter[(a, b)] = len(net.presence_idx(a) & net.presence_idx(b))
        # ordered valid pairings as (i, j, penalty) records
        self.records = []
        ids = net.layer_ids
        for i in range(ell):
            for other in net.valid_pairings(ids[i], ordering):
                j = net.layer_index(other)
                penalty = 1.0
                if self.coupling.time_aware:
                    penalty = distance_penalty(abs(ordering.position(other)
                                                   - ordering.position(ids[i])))
                self.records.append((i, j, penalty))
        self.touching = {l: [r for r in self.records if l in (r[0], r[1])]
                         for l in range(ell)}

    def new_comm(self, tuples):
        comm = _Comm()
        for e, l in tuples:
            comm.tuples.add((e, l))
            comm.proj.setdefault(l, set()).add(e)
            comm.flat[e] = comm.flat.get(e, 0) + 1
        for l, proj in comm.proj.items():
            adj = self.net.adj_idx(l)
            comm.deg[l] = sum(len(adj.get(v, _EMPTY)) for v in proj)
            comm.dint[l] = sum(len(adj.get(v, _EMPTY) & proj) for v in proj)
        layers = sorted(comm.proj)
        for a in range(len(layers)):
            for b in range(a + 1, len(layers)):
                i, j = layers[a], layers[b]
                comm.inter[(i, j)] = len(comm.proj[i] & comm.proj[j])
        if self.redundancy:
            added = set()
            for v in sorted(comm.flat):
                for u, sl in self.rp_adj.get(v, ()):
                    if u in added:
                        for l in sl:
                            comm.nrp[l] = comm.nrp.get(l, 0) + 1
                added.add(v)
        return comm

    def _gamma(self, nrp):
        if not self.redundancy:
            return self.resolution.gamma
        return 2.0 / (1.0 + math.log2(1.0 + nrp))

    def _record_value(self, comm, rec, layer=None, psize_delta=0, dinter=None):
        """Coupling value of one (i, j, penalty) record, optionally with the
        pending projection-size and intersection deltas applied at `layer`."""
        i, j, penalty = rec
        key = (i, j) if i < j else (j, i)
        vint = self.vinter[key]
        if vint == 0:
            return 0.0
        inter = comm.inter.get(key, 0)
        if dinter is not None and layer in key:
            other = key[0] if key[1] == layer else key[1]
            inter += dinter.get(other, 0)
        if self.coupling.kind == "symmetric":
            return inter / vint * penalty
        src = i if self.coupling.kind == "asym-inner" else j
        psize = len(comm.proj.get(src, _EMPTY))
        if src == layer:
            psize += psize_delta
        if psize == 0:
            return 0.0
        return inter / vint * self.vsize[src] / psize * penalty

    def _delta(self, comm, unit, removing):
        l = unit.layer
        S = unit.entities
        adj = self.net.adj_idx(l)
        proj_l = comm.proj.get(l, _EMPTY)
        k_s = sum(len(adj.get(v, _EMPTY) & proj_l) for v in S)
        if removing:
            ddint = -(2 * k_s - 2 * unit.within)
            ddeg = -unit.degsum
            psize_delta = -len(S)
        else:
            ddint = 2 * (k_s + unit.within)
            ddeg = unit.degsum
            psize_delta = len(S)

        dinter = {}
        for lj, pj in comm.proj.items():
            if lj == l:
                continue
            cnt = sum(1 for v in S if v in pj)
            if cnt:
                dinter[lj] = -cnt if removing else cnt

        dnrp = {}
        flat_step = []
        if removing:
            flat_step = [v for v in S if comm.flat.get(v, 0) == 1]
        else:
            flat_step = [v for v in S if comm.flat.get(v, 0) == 0]
        if self.redundancy and flat_step:
            if removing:
                gone = set()
                for v in flat_step:
                    gone.add(v)
                    for u, sl in self.rp_adj.get(v, ()):
                        if comm.flat.get(u, 0) > 0 and u not in gone:
                            for lj in sl:
                                dnrp[lj] = dnrp.get(lj, 0) - 1
            else:
                added = set()
                for v in flat_step:
                    for u, sl in self.rp_adj.get(v, ()):
                        if comm.flat.get(u, 0) > 0 or u in added:
                            for lj in sl:
                                dnrp[lj] = dnrp.get(lj, 0) + 1
                    added.add(v)

        # objective delta; fixed layer order keeps float accumulation reproducible
        affected = sorted({l, *dnrp})
        d_null = 0.0
        for lj in affected:
            d_old = comm.deg.get(lj, 0)
            d_new = d_old + (ddeg if lj == l else 0)
            g_old = self._gamma(comm.nrp.get(lj, 0))
            g_new = self._gamma(comm.nrp.get(lj, 0) + dnrp.get(lj, 0))
            d_null += g_new * d_new * d_new - g_old * d_old * d_old

        d_coup = 0.0
        if self.beta:
            for rec in self.touching[l]:
                before = self._record_value(comm, rec)
                after = self._record_value(comm, rec, layer=l,
                                           psize_delta=psize_delta, dinter=dinter)
                d_coup += after - before

        dq = (ddint - d_null / self.norm + self.beta * d_coup) / self.norm
        patch = _Patch(ddint, ddeg, dinter, flat_step, dnrp)
        return dq, patch

    def remove_eval(self, comm, unit):
        return self._delta(comm, unit, removing=True)

    def insert_eval(self, comm, unit):
        return self._delta(comm, unit, removing=False)

    def apply(self, comm, unit, patch, removing):
        l = unit.layer
        if removing:
            comm.tuples.difference_update(unit.tuples)
            comm.proj[l].difference_update(unit.entities)
            if not comm.proj[l]:
                del comm.proj[l]
            for v in unit.entities:
                comm.flat[v] -= 1
                if comm.flat[v] == 0:
                    del comm.flat[v]
        else:
            comm.tuples.update(unit.tuples)
            comm.proj.setdefault(l, set()).update(unit.entities)
            for v in unit.entities:
                comm.flat[v] = comm.flat.get(v, 0) + 1
        comm.dint[l] = comm.dint.get(l, 0) + patch.ddint
        comm.deg[l] = comm.deg.get(l, 0) + patch.ddeg
        for lj, dv in patch.dinter.items():
            key = (l, lj) if l < lj else (lj, l)
            comm.inter[key] = comm.inter.get(key, 0) + dv
        for lj, dv in patch.dnrp.items():
            comm.nrp[lj] = comm.nrp.get(lj, 0) + dv

    def rescore(self, net, cs):
        objective = multilayer_modularity(net, cs, self.resolution, self.coupling)
        return objective.total


class _MultisliceEngine:
    """Exact gain evaluation for the multislice objective."""

    def __init__(self, net, objective):
        self.net = net
        ell = net.num_layers
        gamma = objective.gamma
        if isinstance(gamma, (int, float)):
            self.gammas = [float(gamma)] * ell
        else:
            self.gammas = [float(g) for g in gamma]
            if len(self.gammas) != ell:
                raise PolicyError(f"expected {ell} per-layer gamma values")
        if any(g < 0 for g in self.gammas):
            raise PolicyError("gamma must be >= 0")
        if objective.omega < 0:
            raise PolicyError("omega must be >= 0")
        self.omega = float(objective.omega)
        for li, layer in enumerate(net.layer_ids):
            if net.presence_idx(li) and not net.edges_idx(li):
                raise InputError(
                    f"layer {layer!r} has assigned occurrences but no edges; "
                    f"its null model is undefined")
        self.two_e = [2 * len(net.edges_idx(l)) for l in range(ell)]
        from .modularity import coupling_pair_total
        self.norm = 2 * net.num_edges() + 2 * self.omega * coupling_pair_total(net)
        self.gamma_arg = objective.gamma

    def new_comm(self, tuples):
        comm = _Comm()
        for e, l in tuples:
            comm.tuples.add((e, l))
            comm.proj.setdefault(l, set()).add(e)
            comm.flat[e] = comm.flat.get(e, 0) + 1
        for l, proj in comm.proj.items():
            adj = self.net.adj_idx(l)
            comm.deg[l] = sum(len(adj.get(v, _EMPTY)) for v in proj)
            comm.dint[l] = sum(len(adj.get(v, _EMPTY) & proj) for v in proj)
        comm.cpairs = sum(n * (n - 1) // 2 for n in comm.flat.values())
        return comm

    def _delta(self, comm, unit, removing):
        l = unit.layer
        S = unit.entities
        adj = self.net.adj_idx(l)
        proj_l = comm.proj.get(l, _EMPTY)
        k_s = sum(len(adj.get(v, _EMPTY) & proj_l) for v in S)
        if removing:
            ddint = -(2 * k_s - 2 * unit.within)
            ddeg = -unit.degsum
            dcpairs = -sum(comm.flat.get(v, 0) - 1 for v in S)
        else:
            ddint = 2 * (k_s + unit.within)
            ddeg = unit.degsum
            dcpairs = sum(comm.flat.get(v, 0) for v in S)
        d_old = comm.deg.get(l, 0)
        d_new = d_old + ddeg
        d_null = self.gammas[l] * (d_new * d_new - d_old * d_old) / self.two_e[l]
        dq = (ddint - d_null + 2.0 * self.omega * dcpairs) / self.norm
        return dq, _Patch(ddint, ddeg, None, None, None, dcpairs)

    def remove_eval(self, comm, unit):
        return self._delta(comm, unit, removing=True)

    def insert_eval(self, comm, unit):
        return self._delta(comm, unit, removing=False)

    def apply(self, comm, unit, patch, removing):
        l = unit.layer
        if removing:
            comm.tuples.difference_update(unit.tuples)
            comm.proj[l].difference_update(unit.entities)
            if not comm.proj[l]:
                del comm.proj[l]
            for v in unit.entities:
                comm.flat[v] -= 1
                if comm.flat[v] == 0:
                    del comm.flat[v]
        else:
            comm.tuples.update(unit.tuples)
            comm.proj.setdefault(l, set()).update(unit.entities)
            for v in unit.entities:
                comm.flat[v] = comm.flat.get(v, 0) + 1
        comm.dint[l] = comm.dint.get(l, 0) + patch.ddint
        comm.deg[l] = comm.deg.get(l, 0) + patch.ddeg
        comm.cpairs += patch.dcpairs

    def rescore(self, net, cs):
        return multislice_modularity(net, cs, self.gamma_arg, self.omega)


def _build_engine(net, objective):
    if isinstance(objective, MultilayerObjective):
        return _MultilayerEngine(net, objective)
    if isinstance(objective, MultisliceObjective):
        return _MultisliceEngine(net, objective)
    raise PolicyError(f"unknown objective {objective!r}")


def generalized_louvain(net: MultilayerNetwork, config: DetectConfig) -> DetectResult:
    """Greedy local moving over entity-layer occurrences with aggregation.

    Occurrences start in singleton communities and are visited in seeded
    shuffled order; each is moved to the candidate community (those of its
    intra-layer neighbors and of the same entity's other occurrences) with
    the best strictly positive gain, ties toward the lowest community index.
    When a full pass gains at most ``min_gain``, occurrences are fused into
    per-layer super-node blocks of their communities and the process repeats
    on the blocks, stopping once aggregation no longer coarsens anything (or
    ``max_passes`` sweeps have run).

    The reported objective is obtained by re-scoring the final structure
    through the scoring module, not from the incremental bookkeeping.
    """
    if net.num_edges() == 0:
        raise InputError("cannot detect communities on an edgeless network")
    engine = _build_engine(net, config.objective)
    rng = random.Random(config.seed)

    occurrences = [(net.entity_index(e), net.layer_index(l)) for e, l in net.tuples()]
    assign = {}
    comms = {}
    units = []
    for cid, (e, l) in enumerate(occurrences):
        unit = _make_unit(net, l, (e,))
        units.append(unit)
        assign[(e, l)] = cid
        comms[cid] = engine.new_comm(unit.tuples)

    passes = 0
    moves = 0
    while passes < config.max_passes:
        # local moving at the current granularity
        while passes < config.max_passes:
            passes += 1
            order = list(range(len(units)))
            rng.shuffle(order)
            pass_gain = 0.0
            for ui in order:
                unit = units[ui]
                src = assign[unit.tuples[0]]
                candidates = set()
                for v, l in unit.tuples:
                    for u in net.adj_idx(l).get(v, _EMPTY):
                        candidates.add(assign[(u, l)])
                    for lj in net.entity_layers_idx(v):
                        if lj != l:
                            candidates.add(assign[(v, lj)])
                candidates.discard(src)
                if not candidates:
                    continue
                dq_rem, patch_rem = engine.remove_eval(comms[src], unit)
                best_gain = 0.0
                best_cid = None
                best_patch = None
                for cid in sorted(candidates):
                    dq_ins, patch_ins = engine.insert_eval(comms[cid], unit)
                    gain = dq_rem + dq_ins
                    if gain > best_gain:
                        best_gain = gain
                        best_cid = cid
                        best_patch = patch_ins
                if best_cid is None:
                    continue
                engine.apply(comms[src], unit, patch_rem, removing=True)
                engine.apply(comms[best_cid], unit, best_patch, removing=False)
                if not comms[src].tuples:
                    del comms[src]
                for t in unit.tuples:
                    assign[t] = best_cid
                pass_gain += best_gain
                moves += 1
            if pass_gain <= config.min_gain:
                break
        # aggregate into per-layer super-nodes of the current communities
        blocks = {}
        for (e, l), cid in assign.items():
            blocks.setdefault((cid, l), []).append(e)
        if len(blocks) == len(units):
            break
        units = [_make_unit(net, l, members)
                 for (cid, l), members in sorted(blocks.items())]

    assignment = {(net.entity_ids[e], net.layer_ids[l]): cid
                  for (e, l), cid in assign.items()}
    cs = CommunityStructure(net, assignment)
    objective = engine.rescore(net, cs)
    return DetectResult(structure=cs, partition=cs.flatten_majority(),
                        objective=objective, passes=passes, moves=moves)


def _single_layer_network(net: MultilayerNetwork, layer) -> MultilayerNetwork:
    li = net.layer_index(layer)
    entities = [net.entity_ids[e] for e in sorted(net.presence_idx(li))]
    edges = [(layer, net.entity_ids[u], net.entity_ids[v]) for u, v in net.edges_idx(li)]
    presence = [(layer, e) for e in entities]
    return build_network(entities=entities, layers=[layer], edges=edges, presence=presence)


def louvain_layer(net: MultilayerNetwork, layer, seed: int = 0,
                  max_passes: int = 50, min_gain: float = 1e-9) -> dict:
    """Classic Louvain partition of one layer's graph (node -> community).

    Runs the generalized optimizer on the layer in isolation; with a single
    layer and no coupling the objective reduces to classic modularity.
    """
    if net.num_edges(layer) == 0:
        raise InputError(f"layer {layer!r} has no edges")
    sub = _single_layer_network(net, layer)
    config = DetectConfig(objective=MultisliceObjective(gamma=1.0, omega=0.0),
                          seed=seed, max_passes=max_passes, min_gain=min_gain)
    return generalized_louvain(sub, config).partition


def aggregate_majority(net: MultilayerNetwork, config: DetectConfig) -> DetectResult:
    """Aggregation baseline: per-layer Louvain, greedy label matching by
    maximum entity overlap, then per-entity majority vote.

    The matched labeling is expanded to every occurrence and re-scored with
    the objective carried by ``config``.
    """
    for layer in net.layer_ids:
        if net.num_edges(layer) == 0:
            raise InputError(f"layer {layer!r} has no edges")

    sub_results = []
    for layer in net.layer_ids:
        sub = _single_layer_network(net, layer)
        cfg = DetectConfig(objective=MultisliceObjective(gamma=1.0, omega=0.0),
                           seed=config.seed, max_passes=config.max_passes,
                           min_gain=config.min_gain)
        sub_results.append(generalized_louvain(sub, cfg))

    proto = {}  # global label -> set of entities seen with it so far
    next_label = 0
    matched = []
    for res in sub_results:
        groups = {}
        for e, c in res.partition.items():
            groups.setdefault(c, set()).add(e)
        local = sorted(groups, key=lambda c: min(net.entity_index(e) for e in groups[c]))
        mapping = {}
        if proto:
            scored = []
            for a in local:
                for g, members in proto.items():
                    ov = len(groups[a] & members)
                    if ov:
                        scored.append((-ov, g, a))
            used_g = set()
            used_a = set()
            for neg_ov, g, a in sorted(scored):
                if g in used_g or a in used_a:
                    continue
                mapping[a] = g
                used_g.add(g)
                used_a.add(a)
        for a in local:
            if a not in mapping:
                mapping[a] = next_label
                next_label += 1
        for a in local:
            proto.setdefault(mapping[a], set()).update(groups[a])
        matched.append({e: mapping[c] for e, c in res.partition.items()})

    partition = {}
    for entity in net.entity_ids:
        votes = {}
        for layer_map in matched:
            if entity in layer_map:
                g = layer_map[entity]
                votes[g] = votes.get(g, 0) + 1
        partition[entity] = min(votes, key=lambda g: (-votes[g], g))

    cs = CommunityStructure.from_entity_partition(net, partition)
    engine = _build_engine(net, config.objective)
    objective = engine.rescore(net, cs)
    return DetectResult(structure=cs, partition=cs.flatten_majority(),
                        objective=objective,
                        passes=sum(r.passes for r in sub_results),
                        moves=sum(r.moves for r in sub_results))


def nmi(partition_a: dict, partition_b: dict) -> float:
    """Normalized mutual information of two partitions of the same universe,
    with arithmetic-mean normalization; two zero-entropy partitions are
    considered identical (NMI 1)."""
    if set(partition_a) != set(partition_b):
        raise InputError("partitions cover different entity universes")
    n = len(partition_a)
    if n == 0:
        raise InputError("partitions are empty")
    joint = {}
    ca = {}
    cb = {}
    for e in partition_a:
        a, b = partition_a[e], partition_b[e]
        joint[(a, b)] = joint.get((a, b), 0) + 1
        ca[a] = ca.get(a, 0) + 1
        cb[b] = cb.get(b, 0) + 1
    h_a = -sum(c / n * math.log(c / n) for c in ca.values())
    h_b = -sum(c / n * math.log(c / n) for c in cb.values())
    if h_a == 0.0 and h_b == 0.0:
        return 1.0
    info = 0.0
    for (a, b), c in joint.items():
        info += c / n * math.log(c * n / (ca[a] * cb[b]))
    value = 2.0 * info / (h_a + h_b)
    return min(1.0, max(0.0, value))
