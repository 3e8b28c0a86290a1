import itertools
import math

import networkx as nx
import numpy as np
import pytest

from src.network_features import (NETWORK_FEATURES, build_edit_graph, export_edge_list, graph_features,
                                  harmonic_closeness, network_features)
from tests.builders import T0, chain, window


def edit_window(*editors):
    return window(article=chain("Example", [(T0 + i, who, str(i)) for i, who in enumerate(editors)]))


def edges(*editors):
    return set(build_edit_graph(edit_window(*editors)).edges)


def test_adjacency_rules():
    assert edges("A", "B", "A") == {("A", "B"), ("B", "A")}
    assert edges("A", "A", "B") == {("A", "B")}
    assert edges("A", "192.0.2.1", "B") == set()
    assert set(build_edit_graph(edit_window("A", "192.0.2.1", "B")).nodes) == {"A", "B"}


def test_unknown_contributors_are_skipped_before_pairing():
    assert edges("A", None, "B") == {("A", "B")}
    assert edges("A", None, "A", "B") == {("A", "B")}
    assert edges("A", None, "192.0.2.1", "B") == set()
    assert set(build_edit_graph(edit_window(None, "A", None)).nodes) == {"A"}


def test_three_cycle():
    block = network_features(edit_window("A", "B", "C", "A"))
    values = block.values
    assert len(values) == len(NETWORK_FEATURES) == 23
    assert values["Num-of-Nodes"] == 3
    assert values["Num-of-Edges"] == 3
    assert values["Num-of-Triangles"] == 1
    assert values["Density"] == 0.5
    assert values["Strongly-Connected-Components"] == 1
    assert values["Is-Biconnected"] == 1
    assert values["Nodes-to-Cut"] == 2
    assert values["Degree-Centrality-Mean"] == 1
    assert values["Betweenness-Mean"] == pytest.approx(0.5)
    assert values["Closeness-Mean"] == pytest.approx(0.75)
    assert values["In-Degree-Std"] == 0
    assert block.flags == {"Network-Degenerate-Flag": 0}


def test_star_around_one_editor():
    values = network_features(edit_window("A", "B", "A", "C", "A", "D")).values
    assert values["Num-of-Edges"] == 5
    assert values["Num-of-Triangles"] == 0
    assert values["Is-Biconnected"] == 0
    assert values["Nodes-to-Cut"] == 1
    assert values["Out-Degree-Mean"] == 1.25
    assert values["Out-Degree-Median"] == 1
    assert values["Strongly-Connected-Components"] == 2


def test_disconnected_editors():
    values = network_features(edit_window("A", "192.0.2.1", "B")).values
    assert values["Num-of-Nodes"] == 2
    assert values["Num-of-Edges"] == 0
    assert values["Weakly-Connected-Components"] == 2
    assert values["Is-Biconnected"] == 0
    assert values["Nodes-to-Cut"] == 0


@pytest.mark.parametrize("editors", [("A",), ("192.0.2.1", "192.0.2.2"), ("A", "A", "A")])
def test_degenerate_graphs(editors):
    block = network_features(edit_window(*editors))
    assert block.flags == {"Network-Degenerate-Flag": 1}
    assert block.values["Density"] == 0


def test_aggregates_match_networkx_on_random_graphs():
    rng = np.random.default_rng(3)
    for _ in range(20):
        names = [f"E{i}" for i in rng.integers(0, 8, size=40)]
        graph = build_edit_graph(edit_window(*names))
        n = graph.number_of_nodes()
        if n <= 1:
            continue
        values = graph_features(graph).values
        nodes = sorted(graph)
        expected_closeness = nx.harmonic_centrality(graph.reverse())
        closeness = harmonic_closeness(graph)
        for node in nodes:
            assert closeness[node] == pytest.approx(expected_closeness[node] / (n - 1), abs=1e-12)
        in_degrees = np.array([graph.in_degree(v) for v in nodes], dtype=float)
        assert values["In-Degree-Mean"] == pytest.approx(in_degrees.mean(), abs=1e-12)
        assert values["In-Degree-Std"] == pytest.approx(in_degrees.std(), abs=1e-12)
        assert values["Density"] == pytest.approx(graph.number_of_edges() / (n * (n - 1)), abs=1e-12)


def test_edge_list_export(tmp_path):
    path = tmp_path / "edges.tsv"
    export_edge_list(build_edit_graph(edit_window("B", "A", "B")), str(path))
    assert path.read_text(encoding="utf-8") == "A\tB\nB\tA\n"


IP = "192.0.2.1"


def random_sequence(seed):
    """Up to 15 revisions by up to 7 registered editors, with the odd IP or unknown contributor."""
    rng = np.random.default_rng(seed)
    editors = [f"E{i}" for i in range(int(rng.integers(1, 8)))]
    sequence = []
    for _ in range(int(rng.integers(1, 16))):
        roll = rng.random()
        if roll < 0.1:
            sequence.append(IP)
        elif roll < 0.15:
            sequence.append(None)
        else:
            sequence.append(editors[int(rng.integers(0, len(editors)))])
    return sequence


def flood(members, linked):
    """Connected groups of ``members`` under the symmetric relation ``linked``."""
    groups, left = [], set(members)
    while left:
        stack = [min(left)]
        group = set(stack)
        while stack:
            u = stack.pop()
            for v in left - group:
                if linked[u][v]:
                    group.add(v)
                    stack.append(v)
        groups.append(group)
        left -= group
    return groups


def all_shortest_paths(adjacency, dist, s, t):
    n, paths = len(adjacency), []

    def extend(path):
        u = path[-1]
        if u == t:
            paths.append(path)
            return
        for v in range(n):
            if adjacency[u][v] and dist[s][v] == len(path) and dist[v][t] == dist[s][t] - len(path):
                extend(path + [v])

    extend([s])
    return paths


def brute_force_features(sequence):
    named = [who for who in sequence if who is not None]
    nodes = sorted({who for who in named if who != IP})
    n = len(nodes)
    expected = dict.fromkeys(NETWORK_FEATURES, 0.0)
    expected["Num-of-Nodes"] = float(n)
    if n <= 1:
        expected["Weakly-Connected-Components"] = expected["Strongly-Connected-Components"] = float(n)
        return expected

    index = {name: i for i, name in enumerate(nodes)}
    adjacency = [[False] * n for _ in range(n)]
    for before, after in zip(named, named[1:]):
        if IP not in (before, after) and before != after:
            adjacency[index[before]][index[after]] = True
    undirected = [[adjacency[i][j] or adjacency[j][i] for j in range(n)] for i in range(n)]

    # Floyd-Warshall
    dist = [[0 if i == j else 1 if adjacency[i][j] else math.inf for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                dist[i][j] = min(dist[i][j], dist[i][k] + dist[k][j])

    betweenness = [0.0] * n
    for s, t in itertools.permutations(range(n), 2):
        if dist[s][t] == math.inf:
            continue
        paths = all_shortest_paths(adjacency, dist, s, t)
        for path in paths:
            for v in path[1:-1]:
                betweenness[v] += 1 / len(paths)
    if n > 2:
        betweenness = [b / ((n - 1) * (n - 2)) for b in betweenness]
    closeness = [sum(1 / dist[i][j] for j in range(n) if j != i and dist[i][j] < math.inf) / (n - 1)
                 for i in range(n)]
    out_degree = [sum(adjacency[i]) for i in range(n)]
    in_degree = [sum(adjacency[j][i] for j in range(n)) for i in range(n)]
    centrality = [(in_degree[i] + out_degree[i]) / (n - 1) for i in range(n)]

    edges = sum(out_degree)
    components = flood(range(n), undirected)
    strong = {frozenset(j for j in range(n) if dist[i][j] < math.inf and dist[j][i] < math.inf) for i in range(n)}
    lcc = min(components, key=lambda c: (-len(c), min(c)))

    def connected_without(removed):
        return len(flood(lcc - set(removed), undirected)) == 1

    biconnected = len(lcc) >= 2 and all(connected_without([v]) for v in lcc)
    nodes_to_cut = 0
    if len(lcc) >= 2:
        nodes_to_cut = len(lcc) - 1
        for k in range(len(lcc) - 1):
            if any(not connected_without(cut) for cut in itertools.combinations(sorted(lcc), k)):
                nodes_to_cut = k
                break

    expected.update({
        "Num-of-Edges": float(edges),
        "Num-of-Triangles": float(sum(1 for a, b, c in itertools.combinations(range(n), 3)
                                      if undirected[a][b] and undirected[b][c] and undirected[a][c])),
        "Density": edges / (n * (n - 1)),
        "Weakly-Connected-Components": float(len(components)),
        "Strongly-Connected-Components": float(len(strong)),
        "Is-Biconnected": float(biconnected),
        "Nodes-to-Cut": float(nodes_to_cut),
    })
    for name, series in (("In-Degree", in_degree), ("Out-Degree", out_degree), ("Degree-Centrality", centrality),
                         ("Betweenness", betweenness), ("Closeness", closeness)):
        expected[f"{name}-Mean"] = float(np.mean(series))
        expected[f"{name}-Median"] = float(np.median(series))
        expected[f"{name}-Std"] = float(np.std(series))
    return expected


@pytest.mark.parametrize("seed", range(500))
def test_features_match_brute_force_on_random_sequences(seed):
    sequence = random_sequence(seed)
    block = network_features(edit_window(*sequence))
    expected = brute_force_features(sequence)
    assert block.values == pytest.approx(expected, abs=1e-12)
    assert block.flags["Network-Degenerate-Flag"] == int(expected["Num-of-Nodes"] <= 1)
