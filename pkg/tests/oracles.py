"""Independent reference implementations used only for cross-checking.

Everything here is deliberately naive (nested loops, path enumeration,
recursive DFS) and shares no code with the library's fast paths.
"""

import itertools

import numpy as np

from causalbn.bayesnet import Cpt, DiscreteBayesNet, Variable
from causalbn.graph import Dag


def has_cycle_dfs(nodes, parents):
    """Recursive three-color DFS cycle check over the parent relation."""
    children = {n: [] for n in nodes}
    for c in nodes:
        for p in parents[c]:
            children[p].append(c)
    color = {n: 0 for n in nodes}  # 0 white, 1 grey, 2 black

    def visit(n):
        color[n] = 1
        for c in children[n]:
            if color[c] == 1:
                return True
            if color[c] == 0 and visit(c):
                return True
        color[n] = 2
        return False

    return any(color[n] == 0 and visit(n) for n in nodes)


def brute_joint(net: DiscreteBayesNet) -> dict:
    """Full joint as a dict config -> probability, by nested products."""
    nodes = net.dag.nodes
    out = {}
    for cfg in itertools.product(*[net.variables[n].states for n in nodes]):
        assign = dict(zip(nodes, cfg))
        p = 1.0
        for n in nodes:
            cpt = net.cpts[n]
            row = 0
            for par in cpt.parents:
                row = row * net.card(par) + net.variables[par].states.index(assign[par])
            p *= cpt.table[row][net.variables[n].states.index(assign[n])]
        out[cfg] = p
    return out


def brute_query(net, targets, evidence):
    """p(targets | evidence) from the brute joint; dict config -> prob."""
    nodes = net.dag.nodes
    jd = brute_joint(net)
    targets = list(targets)
    num = {}
    den = 0.0
    for cfg, p in jd.items():
        assign = dict(zip(nodes, cfg))
        if any(assign[k] != v for k, v in evidence.items()):
            continue
        den += p
        key = tuple(assign[t] for t in targets)
        num[key] = num.get(key, 0.0) + p
    if den <= 0:
        raise ZeroDivisionError("zero-probability evidence")
    return {k: v / den for k, v in num.items()}


def brute_do(net, target, do):
    """p(target | do(...)) by enumerating the truncated factorization."""
    nodes = net.dag.nodes
    out = {s: 0.0 for s in net.variables[target].states}
    for cfg in itertools.product(*[net.variables[n].states for n in nodes]):
        assign = dict(zip(nodes, cfg))
        if any(assign[k] != v for k, v in do.items()):
            continue
        p = 1.0
        for n in nodes:
            if n in do:
                continue
            cpt = net.cpts[n]
            row = 0
            for par in cpt.parents:
                row = row * net.card(par) + net.variables[par].states.index(assign[par])
            p *= cpt.table[row][net.variables[n].states.index(assign[n])]
        out[assign[target]] += p
    total = sum(out.values())
    return {k: v / total for k, v in out.items()}


def _all_undirected_paths(dag: Dag, start, end):
    """All simple paths treating edges as undirected, with directions kept."""
    nbrs = {n: [] for n in dag.nodes}
    for c in dag.nodes:
        for p in dag.parents[c]:
            nbrs[p].append((c, "out"))   # p -> c
            nbrs[c].append((p, "in"))    # edge into c from p
    paths = []

    def walk(node, visited, path):
        if node == end:
            paths.append(list(path))
            return
        for nxt, direction in nbrs[node]:
            if nxt in visited:
                continue
            path.append((node, nxt, direction))
            walk(nxt, visited | {nxt}, path)
            path.pop()

    walk(start, {start}, [])
    return paths


def d_separated_paths(dag: Dag, a, b, s):
    """Path-enumeration d-separation oracle (graphs of ~8 nodes max)."""
    s = set(s)
    desc_or_self = {}
    children = {n: [] for n in dag.nodes}
    for c in dag.nodes:
        for p in dag.parents[c]:
            children[p].append(c)

    def desc(n):
        if n not in desc_or_self:
            acc = {n}
            for c in children[n]:
                acc |= desc(c)
            desc_or_self[n] = acc
        return desc_or_self[n]

    for x in a:
        for y in b:
            for path in _all_undirected_paths(dag, x, y):
                blocked = False
                for i in range(1, len(path)):
                    mid = path[i - 1][1]
                    into_prev = path[i - 1][2] == "out"  # edge points into mid
                    into_next = path[i][2] == "in"       # next edge points into mid
                    is_collider = into_prev and into_next
                    if is_collider:
                        if not (desc(mid) & s):
                            blocked = True
                            break
                    elif mid in s:
                        blocked = True
                        break
                if not blocked:
                    return False
    return True


def random_cpts(dag: Dag, rng, cards=None):
    """Random strictly-positive CPTs for a dag (binary by default)."""
    cards = cards or {n: 2 for n in dag.nodes}
    variables = {
        n: Variable(n, tuple(str(i) for i in range(cards[n]))) for n in dag.nodes
    }
    cpts = {}
    for n in dag.nodes:
        n_rows = 1
        for p in dag.parents[n]:
            n_rows *= cards[p]
        raw = rng.uniform(0.05, 1.0, size=(n_rows, cards[n]))
        cpts[n] = Cpt(n, dag.parents[n], raw / raw.sum(axis=1, keepdims=True))
    return DiscreteBayesNet(dag, variables, cpts)
