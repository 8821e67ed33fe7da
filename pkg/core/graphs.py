#!/usr/bin/env python3
"""
图算法：强连通分量、传递闭包与最短路径

非递归实现，避免 Python 递归深度限制（前件格可达 65536 个结点）。
"""

from collections import defaultdict, deque
from typing import Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

Node = Hashable


def strongly_connected_components(
    nodes: Sequence[Node], successors: Callable[[Node], Iterable[Node]]
) -> List[List[Node]]:
    """
    Tarjan 算法（显式栈）

    返回分量列表；分量内部按发现顺序排列，分量之间按逆拓扑序。
    """
    index: Dict[Node, int] = {}
    lowest: Dict[Node, int] = {}
    on_stack: Set[Node] = set()
    stack: List[Node] = []
    sccs: List[List[Node]] = []
    counter = 0

    for root in nodes:
        if root in index:
            continue
        index[root] = lowest[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        work = [(root, iter(successors(root)))]

        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = lowest[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                if w in on_stack:
                    lowest[v] = min(lowest[v], index[w])
            if advanced:
                continue

            work.pop()
            if work:
                parent = work[-1][0]
                lowest[parent] = min(lowest[parent], lowest[v])
            if lowest[v] == index[v]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc.append(w)
                    if w == v:
                        break
                scc.reverse()
                sccs.append(scc)

    return sccs


def transitive_closure(pairs: Iterable[Tuple[Node, Node]]) -> List[Tuple[Node, Node]]:
    """
    关系的传递闭包（不加自反对），结果排序返回

    自反对只有在存在环时才会出现。
    """
    successors = defaultdict(list)
    sources = []
    for u, v in pairs:
        if u not in successors:
            sources.append(u)
        successors[u].append(v)

    result = []
    for source in sources:
        reached = set()
        pending = [source]
        while pending:
            current = pending.pop()
            for successor in successors.get(current, ()):
                if successor not in reached:
                    reached.add(successor)
                    pending.append(successor)
        result.extend((source, target) for target in reached)
    return sorted(result)


def shortest_path(source: Node, target: Node,
                  successors: Callable[[Node], Iterable[Node]]) -> Optional[List[Node]]:
    """BFS 最短路径（含两端），不可达返回 None；source == target 时返回 [source]"""
    if source == target:
        return [source]
    parent: Dict[Node, Node] = {source: source}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in successors(v):
            if w in parent:
                continue
            parent[w] = v
            if w == target:
                path = [w]
                while path[-1] != source:
                    path.append(parent[path[-1]])
                path.reverse()
                return path
            queue.append(w)
    return None


def transitive_matrix(relation: np.ndarray) -> np.ndarray:
    """布尔邻接矩阵的传递闭包（反复平方直到稳定）"""
    closure = relation.astype(bool).copy()
    while True:
        step = closure.astype(np.float32)
        grown = closure | ((step @ step) > 0)
        if np.array_equal(grown, closure):
            return closure
        closure = grown
