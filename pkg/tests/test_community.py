"""Community structures: expansion, projections, redundancy, flattening, files."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

import multimod as mm
from multimod.errors import InputError

from _gen import random_multilayer, random_structure
from conftest import ORDERED3_PARTITION


class TestFromEntityPartition:
    def test_single_community(self, twin_triangle_layers):
        net = twin_triangle_layers
        cs = mm.CommunityStructure.from_entity_partition(net, {e: 0 for e in net.entity_ids})
        assert cs.num_communities == 1
        assert len(cs.members(0)) == net.num_tuples()

    def test_ordered3_projections(self, ordered3, ordered3_cs):
        c1 = ordered3_cs.assignment_of("e01", "L1")
        assert len(ordered3_cs.projection(c1, "L1")) == 3
        assert len(ordered3_cs.projection(c1, "L2")) == 2
        assert ordered3_cs.projection(c1, "L2") == {"e01", "e02"}

    def test_singletons(self, two_triangles):
        net = two_triangles
        cs = mm.CommunityStructure.from_entity_partition(
            net, {e: i for i, e in enumerate(net.entity_ids)})
        assert cs.num_communities == net.num_entities

    def test_unassigned_entity(self, two_triangles):
        with pytest.raises(InputError, match="no community assignment"):
            mm.CommunityStructure.from_entity_partition(two_triangles, {0: 0})


class TestProjection:
    def test_absent_community_layer(self, ordered3, ordered3_cs):
        c1 = ordered3_cs.assignment_of("e01", "L1")
        # C1 holds only e10 on L3
        assert ordered3_cs.projection(c1, "L3") == {"e10"}
        # a community whose entities all miss a layer projects to nothing there
        pair_only = mm.CommunityStructure(
            ordered3, {t: (0 if t[0] in ("e01", "e02") else 1)
                       for t in ordered3.tuples()})
        assert pair_only.projection(0, "L3") == frozenset()
        assert pair_only.projection_size(0, "L3") == 0

    def test_full_layer(self, two_triangles):
        net = two_triangles
        cs = mm.CommunityStructure.from_entity_partition(net, {e: 0 for e in net.entity_ids})
        assert cs.projection(0, "L") == set(net.entity_ids)

    def test_degree_caches(self, twin_triangle_layers):
        net = twin_triangle_layers
        cs = mm.CommunityStructure.from_entity_partition(
            net, {e: (0 if e < 3 else 1) for e in net.entity_ids})
        for layer in net.layer_ids:
            assert sum(cs.degree(c, layer) for c in cs.communities()) == 2 * net.num_edges(layer)
            for c in cs.communities():
                assert cs.internal_degree(c, layer) <= cs.degree(c, layer)


class TestSupportingLayers:
    def test_cases(self):
        edges = [("L1", "a", "b"), ("L3", "a", "b"), ("L1", "b", "c"),
                 ("L2", "c", "d"), ("L3", "c", "d"), ("L2", "a", "d")]
        net = mm.build_network(layers=["L1", "L2", "L3"], edges=edges)
        assert mm.supporting_layers(net, "a", "b") == {"L1", "L3"}
        assert mm.supporting_layers(net, "a", "c") == frozenset()
        every = [("L1", "x", "y"), ("L2", "x", "y"), ("L3", "x", "y")]
        net2 = mm.build_network(layers=["L1", "L2", "L3"], edges=every)
        assert mm.supporting_layers(net2, "x", "y") == {"L1", "L2", "L3"}


class TestRedundancy:
    def test_single_layer_has_no_redundancy(self, two_triangles):
        cs = mm.CommunityStructure.from_entity_partition(
            two_triangles, {e: 0 for e in two_triangles.entity_ids})
        _, p2 = cs.redundant_pairs(0)
        assert p2 == frozenset()
        assert cs.redundancy(0) == 0

    def test_pair_in_two_layers(self):
        net = mm.build_network(layers=["L1", "L2"],
                               edges=[("L1", "a", "b"), ("L2", "a", "b")])
        cs = mm.CommunityStructure.from_entity_partition(net, {"a": 0, "b": 0})
        p1, p2 = cs.redundant_pairs(0)
        assert len(p1) == 1 and len(p2) == 1

    def test_distinct_layers_no_redundant(self):
        # three entities linked pairwise, each pair in its own layer
        edges = [("L1", "a", "b"), ("L2", "b", "c"), ("L3", "a", "c")]
        net = mm.build_network(layers=["L1", "L2", "L3"], edges=edges)
        cs = mm.CommunityStructure.from_entity_partition(net, {"a": 0, "b": 0, "c": 0})
        p1, p2 = cs.redundant_pairs(0)
        assert len(p1) == 3
        assert p2 == frozenset()

    def test_redundancy_value(self):
        # two layers; pairs (a,b), (b,c), (a,c) linked somewhere, only (a,b) twice
        edges = [("L1", "a", "b"), ("L2", "a", "b"), ("L1", "b", "c"), ("L2", "a", "c")]
        net = mm.build_network(layers=["L1", "L2"], edges=edges)
        cs = mm.CommunityStructure.from_entity_partition(net, {"a": 0, "b": 0, "c": 0})
        # direct enumeration: support mass 2 over (2 layers * 3 connected pairs)
        assert cs.redundancy(0) == Fraction(2, 6) == Fraction(1, 3)

    def test_maximal(self):
        edges = [(l, u, v) for l in ("L1", "L2") for u, v in [("a", "b"), ("b", "c"), ("a", "c")]]
        net = mm.build_network(layers=["L1", "L2"], edges=edges)
        cs = mm.CommunityStructure.from_entity_partition(net, {"a": 0, "b": 0, "c": 0})
        assert cs.redundancy(0) == 1


class TestLayerRedundantPairCount:
    def test_none(self, two_triangles):
        cs = mm.CommunityStructure.from_entity_partition(
            two_triangles, {e: 0 for e in two_triangles.entity_ids})
        assert cs.redundant_pair_count(0, "L") == 0

    def test_two_pairs_one_layer(self):
        edges = [("L1", "a", "b"), ("L2", "a", "b"), ("L1", "c", "d"), ("L2", "c", "d")]
        net = mm.build_network(layers=["L1", "L2"], edges=edges)
        cs = mm.CommunityStructure.from_entity_partition(net, dict.fromkeys("abcd", 0))
        assert cs.redundant_pair_count(0, "L1") == 2

    def test_mixed_support(self):
        edges = [("L1", "a", "b"), ("L2", "a", "b"),       # pair supported by L1, L2
                 ("L2", "c", "d"), ("L3", "c", "d")]       # pair supported by L2, L3
        net = mm.build_network(layers=["L1", "L2", "L3"], edges=edges)
        cs = mm.CommunityStructure.from_entity_partition(net, dict.fromkeys("abcd", 0))
        assert cs.redundant_pair_count(0, "L2") == 2
        assert cs.redundant_pair_count(0, "L1") == 1

    def test_bookkeeping_identity(self):
        rng = random.Random(11)
        for _ in range(50):
            net = random_multilayer(rng)
            cs = random_structure(rng, net)
            for c in cs.communities():
                _, p2 = cs.redundant_pairs(c)
                per_layer = [cs.redundant_pair_count(c, l) for l in net.layer_ids]
                assert all(v <= len(p2) for v in per_layer)
                support = sum(len(mm.supporting_layers(net, u, v)) for u, v in p2)
                assert sum(per_layer) == support


class TestRedundancyResolution:
    def test_zero_pairs_gives_two(self, two_triangles):
        cs = mm.CommunityStructure.from_entity_partition(
            two_triangles, {e: 0 for e in two_triangles.entity_ids})
        assert cs.redundancy_resolution(0, "L") == 2.0

    def test_one_pair_gives_one(self):
        net = mm.build_network(layers=["L1", "L2"],
                               edges=[("L1", "a", "b"), ("L2", "a", "b")])
        cs = mm.CommunityStructure.from_entity_partition(net, {"a": 0, "b": 0})
        assert cs.redundancy_resolution(0, "L1") == 1.0

    def test_seven_pairs_give_half(self):
        edges = [(l, "hub", f"s{i}") for l in ("L1", "L2") for i in range(7)]
        net = mm.build_network(layers=["L1", "L2"], edges=edges)
        part = {"hub": 0, **{f"s{i}": 0 for i in range(7)}}
        cs = mm.CommunityStructure.from_entity_partition(net, part)
        assert cs.redundant_pair_count(0, "L1") == 7
        assert cs.redundancy_resolution(0, "L1") == 0.5

    def test_strictly_decreasing_in_pair_count(self):
        values = []
        for spokes in range(9):
            edges = [(l, "hub", f"s{i}") for l in ("L1", "L2") for i in range(spokes)]
            if not edges:
                edges = [("L1", "hub", "s0")]
            net = mm.build_network(layers=["L1", "L2"], edges=edges)
            part = {e: 0 for e in net.entity_ids}
            cs = mm.CommunityStructure.from_entity_partition(net, part)
            assert cs.redundant_pair_count(0, "L1") == (spokes if spokes else 0)
            values.append(cs.redundancy_resolution(0, "L1"))
        assert values[0] == 2.0
        assert all(b < a for a, b in zip(values[1:], values[2:]))


class TestFlattenMajority:
    def test_majority(self):
        net = mm.build_network(layers=["L1", "L2", "L3"],
                               edges=[(l, "a", "b") for l in ("L1", "L2", "L3")])
        cs = mm.CommunityStructure(net, {
            ("a", "L1"): 0, ("a", "L2"): 0, ("a", "L3"): 1,
            ("b", "L1"): 0, ("b", "L2"): 1, ("b", "L3"): 1,
        })
        flat = cs.flatten_majority()
        assert flat["a"] == 0
        assert flat["b"] == 1

    def test_tie_breaks_low(self):
        net = mm.build_network(layers=["L1", "L2"], edges=[(l, "a", "b") for l in ("L1", "L2")])
        cs = mm.CommunityStructure(net, {
            ("a", "L1"): 0, ("a", "L2"): 1, ("b", "L1"): 0, ("b", "L2"): 1})
        assert cs.flatten_majority()["a"] == 0

    def test_single_instance(self):
        net = mm.build_network(layers=["L1", "L2"], edges=[("L1", "a", "b")],
                               presence=[("L2", "c"), ("L2", "a")])
        cs = mm.CommunityStructure(net, {("a", "L1"): 0, ("b", "L1"): 0,
                                         ("a", "L2"): 0, ("c", "L2"): 1})
        flat = cs.flatten_majority()
        assert flat["c"] == cs.assignment_of("c", "L2")
        assert flat["c"] != flat["a"]

    def test_layer_relabel_invariance(self):
        rng = random.Random(23)
        for _ in range(20):
            net = random_multilayer(rng)
            cs = random_structure(rng, net)
            flat = cs.flatten_majority()
            # rebuild with layer ids renamed; assignments carried over
            renamed = {l: f"z{i}" for i, l in enumerate(net.layer_ids)}
            edges = [(renamed[l], net.entity_ids[u], net.entity_ids[v])
                     for li, l in enumerate(net.layer_ids)
                     for u, v in net.edges_idx(li)]
            presence = [(renamed[l], e) for e in net.entity_ids
                        for l in net.entity_layers(e)]
            net2 = mm.build_network(layers=[renamed[l] for l in net.layer_ids],
                                    edges=edges, presence=presence)
            cs2 = mm.CommunityStructure(
                net2, {(e, renamed[l]): cs.assignment_of(e, l)
                       for e, l in net.tuples()})
            assert cs2.flatten_majority() == flat


class TestPartitionInvariants:
    def test_partition_covers_everything(self):
        rng = random.Random(7)
        for _ in range(30):
            net = random_multilayer(rng)
            cs = random_structure(rng, net)
            counted = sum(len(cs.members(c)) for c in cs.communities())
            assert counted == net.num_tuples()
            for layer in net.layer_ids:
                total = sum(cs.degree(c, layer) for c in cs.communities())
                assert total == 2 * net.num_edges(layer)

    def test_p2_subset_p1(self):
        rng = random.Random(13)
        for _ in range(30):
            net = random_multilayer(rng)
            cs = random_structure(rng, net)
            for c in cs.communities():
                p1, p2 = cs.redundant_pairs(c)
                assert p2 <= p1
                assert 0 <= cs.redundancy(c) <= 1


class TestCommunityFiles:
    def test_extended_round_trip(self, tmp_path, ordered3, ordered3_cs):
        path = tmp_path / "c.txt"
        mm.write_communities(ordered3_cs, path)
        again = mm.read_communities(ordered3, path)
        assert again.as_assignment() == ordered3_cs.as_assignment()

    @pytest.fixture
    def string_net(self):
        # community files carry string tokens, so pair them with string ids
        edges = [("L", u, v) for u, v in
                 [("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f")]]
        return mm.build_network(layers=["L"], edges=edges)

    def test_flattened(self, tmp_path, string_net):
        path = tmp_path / "c.txt"
        part = {e: (0 if e in "abc" else 1) for e in string_net.entity_ids}
        mm.write_flat_partition(part, path)
        cs = mm.read_communities(string_net, path)
        assert cs.num_communities == 2

    def test_mixed_forms_rejected(self, tmp_path, string_net):
        path = tmp_path / "c.txt"
        path.write_text("a L 0\nb 0\n", encoding="utf-8")
        with pytest.raises(InputError, match="flattened record"):
            mm.read_communities(string_net, path)

    def test_unknown_entity(self, tmp_path, string_net):
        path = tmp_path / "c.txt"
        path.write_text("ghost 0\n", encoding="utf-8")
        with pytest.raises(InputError, match="line 1"):
            mm.read_communities(string_net, path)

    def test_incomplete_extended(self, tmp_path, string_net):
        path = tmp_path / "c.txt"
        path.write_text("a L 0\n", encoding="utf-8")
        with pytest.raises(InputError, match="unassigned"):
            mm.read_communities(string_net, path)


def test_ordered3_partition_labels(ordered3):
    cs = mm.CommunityStructure.from_entity_partition(ordered3, ORDERED3_PARTITION)
    assert cs.num_communities == 3
    flat = cs.flatten_majority()
    assert {e for e, c in flat.items() if c == flat["e01"]} == {"e01", "e02", "e10"}
