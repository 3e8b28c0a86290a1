"""
Network feature family.

The edit network links the editors of temporally adjacent revisions
(earlier editor -> later editor). Anonymous editors are not nodes and an
anonymous revision breaks adjacency. Revisions by an unknown contributor
are skipped before pairing.
"""
import networkx as nx
import numpy as np

from src.window import FeatureBlock

GRAPH_FEATURES = (
    "Num-of-Nodes",
    "Num-of-Edges",
    "Num-of-Triangles",
    "Density",
    "Weakly-Connected-Components",
    "Strongly-Connected-Components",
    "Is-Biconnected",
    "Nodes-to-Cut",
)
NODE_METRICS = ("In-Degree", "Out-Degree", "Degree-Centrality", "Betweenness", "Closeness")
AGGREGATES = ("Mean", "Median", "Std")
NETWORK_FEATURES = GRAPH_FEATURES + tuple(f"{m}-{a}" for m in NODE_METRICS for a in AGGREGATES)
NETWORK_FLAGS = ("Network-Degenerate-Flag",)


def build_edit_graph(w):
    """
    Directed edit network of an in-window article history.

    Args:
        w (WindowedHistory): Pre-promotion window

    Returns:
        nx.DiGraph: Registered editors as nodes, simple edges, no self-loops
    """
    graph = nx.DiGraph()
    # unknown contributors are neither nodes nor breaks in adjacency
    revisions = [r for r in w.article_revisions if not r.editor.is_unknown]
    graph.add_nodes_from(sorted(r.editor.name for r in revisions if r.editor.is_registered))
    for before, after in zip(revisions, revisions[1:]):
        if before.editor.is_anonymous or after.editor.is_anonymous:
            continue
        if before.editor.name != after.editor.name:
            graph.add_edge(before.editor.name, after.editor.name)
    return graph


def largest_component(graph):
    """Largest weakly connected component; equal sizes resolve to the smallest member name."""
    components = list(nx.weakly_connected_components(graph))
    if not components:
        return set()
    return min(components, key=lambda c: (-len(c), min(c)))


def harmonic_closeness(graph):
    """Sum of 1/d(u, v) over nodes v reachable from u, divided by |V| - 1."""
    n = graph.number_of_nodes()
    closeness = {}
    for node in graph:
        distances = nx.single_source_shortest_path_length(graph, node)
        total = sum(1.0 / d for target, d in distances.items() if target != node)
        closeness[node] = total / (n - 1) if n > 1 else 0.0
    return closeness


def _aggregate(name, values):
    array = np.asarray(values, dtype=np.float64)
    return {
        f"{name}-Mean": float(array.mean()),
        f"{name}-Median": float(np.median(array)),
        f"{name}-Std": float(array.std()),
    }


def graph_features(graph):
    """
    The 23 structural values of an edit network.

    Connectivity measures (biconnectivity, nodes-to-cut) use the undirected
    projection of the largest weakly connected component. Graphs with at
    most one node get zeros and the degenerate flag.

    Returns:
        FeatureBlock
    """
    n = graph.number_of_nodes()
    values = dict.fromkeys(NETWORK_FEATURES, 0.0)
    values["Num-of-Nodes"] = float(n)
    if n <= 1:
        values["Weakly-Connected-Components"] = float(n)
        values["Strongly-Connected-Components"] = float(n)
        return FeatureBlock(values=values, flags={"Network-Degenerate-Flag": 1})

    undirected = graph.to_undirected()
    lcc = undirected.subgraph(largest_component(graph)).copy()
    values.update({
        "Num-of-Edges": float(graph.number_of_edges()),
        "Num-of-Triangles": float(sum(nx.triangles(undirected).values()) // 3),
        "Density": float(nx.density(graph)),
        "Weakly-Connected-Components": float(nx.number_weakly_connected_components(graph)),
        "Strongly-Connected-Components": float(nx.number_strongly_connected_components(graph)),
        "Is-Biconnected": float(lcc.number_of_nodes() >= 2 and nx.is_biconnected(lcc)),
        "Nodes-to-Cut": float(nx.node_connectivity(lcc)) if lcc.number_of_nodes() >= 2 else 0.0,
    })

    nodes = sorted(graph.nodes)
    betweenness = nx.betweenness_centrality(graph, normalized=True)
    centrality = nx.degree_centrality(graph)
    closeness = harmonic_closeness(graph)
    values.update(_aggregate("In-Degree", [graph.in_degree(v) for v in nodes]))
    values.update(_aggregate("Out-Degree", [graph.out_degree(v) for v in nodes]))
    values.update(_aggregate("Degree-Centrality", [centrality[v] for v in nodes]))
    values.update(_aggregate("Betweenness", [betweenness[v] for v in nodes]))
    values.update(_aggregate("Closeness", [closeness[v] for v in nodes]))
    return FeatureBlock(values=values, flags={"Network-Degenerate-Flag": 0})


def network_features(w):
    return graph_features(build_edit_graph(w))


def export_edge_list(graph, path):
    """Debug export: one ``src<TAB>dst`` line per edge, sorted."""
    with open(path, "w", encoding="utf-8") as f:
        for src, dst in sorted(graph.edges):
            f.write(f"{src}\t{dst}\n")
