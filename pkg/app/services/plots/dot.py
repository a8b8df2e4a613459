import networkx as nx


def _quote(name: str) -> str:
    return '"' + str(name).replace("\\", "\\\\").replace('"', '\\"') + '"'


def similarity_dot(graph: nx.Graph, name: str = "similarity") -> str:
    """Undirected DOT text; nodes carry ``size``, edges carry ``weight``."""
    lines = [f"graph {_quote(name)} {{"]
    for node in sorted(graph.nodes):
        lines.append(f"    {_quote(node)} [size={graph.nodes[node].get('size', 0)}];")
    for a, b in sorted(tuple(sorted(edge)) for edge in graph.edges):
        lines.append(f"    {_quote(a)} -- {_quote(b)} [weight={graph.edges[a, b]['weight']!r}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
