#!/usr/bin/env python3
"""
Search 🔍 - 反模型搜索与有界证明搜索

- find_countermodel：在给定风味中找满足知识库但违反查询的模型（不蕴含证书）
- bounded_proof：在子公式池上做受限前向闭包，产出可回放的轨迹（蕴含证书）
- find_injective_equivalent：单射标签的等价优先模型（有界枚举）
- find_rationality_violation：定义的关系违反理性公设的优先模型

搜索先穷举至多 max_states 个状态，再做随机重启，直到候选数或时间预算用完。
"""

import itertools
import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .closure import (
    CheckResult, Rationality, System, TraceEvent, lattice_cap, rationality_check,
    direct_justification, replay_events, seeded_table,
)
from .config import get_config
from .errors import PreconditionError
from .formula import Formula, Universe, WorldSet, make_universe, truth_vector, worlds_of
from .graphs import strongly_connected_components, shortest_path
from .knowledge_base import Assertion, KnowledgeBase, SemanticPair, semantic_pair
from .models import (
    FLAVOR_OF_SYSTEM, Flavor, Model, relation_of_model, validate,
)

logger = logging.getLogger(__name__)

__all__ = [
    "FLAVOR_OF_SYSTEM", "SearchBudget", "ProofCertificate", "find_countermodel", "bounded_proof",
    "find_injective_equivalent", "find_rationality_violation", "strict_partial_orders",
    "asymmetric_relations", "default_depth", "quick_budget",
]


@dataclass(frozen=True)
class SearchBudget:
    """搜索预算（全部为正）"""
    max_states: int = 3
    max_candidates: int = 200000
    time_limit: float = 30.0
    seed: int = 0

    def __post_init__(self):
        if self.max_states <= 0 or self.max_candidates <= 0 or self.time_limit <= 0:
            raise ValueError(f"search budget must be positive: {self}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @classmethod
    def from_config(cls, config=None) -> "SearchBudget":
        config = config or get_config()
        return cls(
            max_states=int(config.get("search.max_states", 3)),
            max_candidates=int(config.get("search.max_candidates", 200000)),
            time_limit=float(config.get("search.time_limit", 30.0)),
            seed=int(config.get("search.seed", 0)),
        )


def quick_budget(budget: Optional[SearchBudget] = None) -> SearchBudget:
    """闭包前的快速探测：至多两个状态，不做长时间随机重启"""
    budget = budget or SearchBudget.from_config()
    return SearchBudget(
        max_states=min(2, budget.max_states),
        max_candidates=min(5000, budget.max_candidates),
        time_limit=min(2.0, budget.time_limit),
        seed=budget.seed,
    )


def default_depth() -> int:
    return int(get_config().get("search.proof_depth", 2))


# ============================================================
# 关系枚举
# ============================================================

@lru_cache(maxsize=None)
def strict_partial_orders(k: int) -> Tuple[np.ndarray, ...]:
    """k 个带标号结点上的全部严格偏序（k=3 时 19 个，k=4 时 219 个）"""
    return tuple(r for r in _relations(k) if _transitive(r))


@lru_cache(maxsize=None)
def asymmetric_relations(k: int) -> Tuple[np.ndarray, ...]:
    return tuple(_relations(k))


def _relations(k: int) -> Iterator[np.ndarray]:
    pairs = list(itertools.combinations(range(k), 2))
    # 每个无序对：无边 / i≺j / j≺i
    for choice in itertools.product(range(3), repeat=len(pairs)):
        mat = np.zeros((k, k), dtype=bool)
        for (i, j), c in zip(pairs, choice):
            if c == 1:
                mat[i, j] = True
            elif c == 2:
                mat[j, i] = True
        mat.setflags(write=False)
        yield mat


def _transitive(r: np.ndarray) -> bool:
    rf = r.astype(np.int32)
    return not bool(np.any(((rf @ rf) > 0) & ~r))


# ============================================================
# 反模型搜索
# ============================================================

class _Workspace:
    """候选标签及其对每个断言前件/后件的包含关系（预计算）"""

    def __init__(self, kb: KnowledgeBase, q: Assertion, flavor: Flavor):
        self.u = kb.universe
        self.flavor = flavor
        self.kb_pairs = kb.pairs()
        self.query = semantic_pair(q, self.u)
        relevant = [f for a in kb.assertions + (q,) for f in (a.antecedent, a.consequent)]
        self.representatives = self._representatives(relevant)
        self.labels = self._label_candidates()
        pairs = self.kb_pairs + [self.query]
        self.in_a = [[lab & ~p.antecedent == 0 for p in pairs] for lab in self.labels]
        self.in_b = [[lab & ~p.consequent == 0 for p in pairs] for lab in self.labels]

    def _representatives(self, formulas: Sequence[Formula]) -> List[int]:
        """每种真值签名（在相关公式上）取第一个世界的位置"""
        if self.u.size == 0:
            return []
        if not formulas:
            return [0]
        table = np.stack([truth_vector(f, self.u) for f in formulas])
        _, first = np.unique(np.packbits(table, axis=0), axis=1, return_index=True)
        return sorted(int(k) for k in first)

    def _label_candidates(self) -> List[WorldSet]:
        reps = self.representatives
        singles = [1 << k for k in reps]
        if self.flavor.singleton_labels:
            return singles
        if len(reps) <= 4:
            out = []
            for r in range(1, len(reps) + 1):
                for combo in itertools.combinations(reps, r):
                    out.append(sum(1 << k for k in combo))
            return out
        rep_mask = sum(singles)
        extra = []
        full = self.u.full
        for p in self.kb_pairs + [self.query]:
            for s in (p.antecedent & p.consequent, p.antecedent & ~p.consequent,
                      p.antecedent, full & ~p.antecedent):
                s &= rep_mask
                if s and s not in singles and s not in extra:
                    extra.append(s)
        return singles + extra[:32]

    def orders(self, k: int) -> Sequence[np.ndarray]:
        if self.flavor.simple or k < 2:
            return (np.zeros((k, k), dtype=bool),)
        if self.flavor == Flavor.CUMULATIVE and self.u.size <= lattice_cap():
            return asymmetric_relations(k)
        return strict_partial_orders(k)

    def _holds(self, chosen: Sequence[int], order: np.ndarray, j: int) -> bool:
        hat = [i for i, lab in enumerate(chosen) if self.in_a[lab][j]]
        for t in hat:
            if not any(order[s, t] for s in hat) and not self.in_b[chosen[t]][j]:
                return False
        return True

    def is_countermodel(self, chosen: Sequence[int], order: np.ndarray) -> bool:
        last = len(self.kb_pairs)
        if self._holds(chosen, order, last):
            return False
        return all(self._holds(chosen, order, j) for j in range(last))

    def build(self, chosen: Sequence[int], order: np.ndarray) -> Model:
        names = tuple(f"s{i}" for i in range(len(chosen)))
        labels = tuple(self.labels[i] for i in chosen)
        return Model(self.u, names, labels, np.array(order, dtype=bool), self.flavor)

    def accept(self, chosen: Sequence[int], order: np.ndarray) -> Optional[Model]:
        model = self.build(chosen, order)
        report = validate(model)
        if not report.ok:
            return None
        return model


def find_countermodel(kb: KnowledgeBase, q: Assertion, flavor: Flavor,
                      budget: Optional[SearchBudget] = None) -> Optional[Model]:
    """
    满足 K 中每个断言、但违反 q 的 flavor 模型；找不到返回 None（不代表蕴含）
    """
    budget = budget or SearchBudget.from_config()
    ws = _Workspace(kb, q, flavor)
    if not ws.labels:
        return None
    deadline = time.perf_counter() + budget.time_limit
    tried = 0

    # 穷举
    for k in range(1, budget.max_states + 1):
        for chosen in itertools.combinations_with_replacement(range(len(ws.labels)), k):
            for order in ws.orders(k):
                tried += 1
                if tried > budget.max_candidates or time.perf_counter() > deadline:
                    logger.debug(f"[Search] 预算用尽（穷举阶段，{tried} 个候选）")
                    return None
                if ws.is_countermodel(chosen, order):
                    model = ws.accept(chosen, order)
                    if model is not None:
                        logger.info(f"[Search] 找到 {k} 个状态的反模型（第 {tried} 个候选）")
                        return model

    # 随机重启
    rng = np.random.default_rng(budget.seed)
    while tried < budget.max_candidates and time.perf_counter() <= deadline:
        tried += 1
        k = int(rng.integers(1, budget.max_states + 1))
        chosen = tuple(int(i) for i in rng.integers(0, len(ws.labels), size=k))
        orders = ws.orders(k)
        order = orders[int(rng.integers(len(orders)))]
        if ws.is_countermodel(chosen, order):
            model = ws.accept(chosen, order)
            if model is not None:
                logger.info(f"[Search] 随机重启找到反模型（第 {tried} 个候选）")
                return model

    logger.debug(f"[Search] 未找到反模型（{tried} 个候选）")
    return None


# ============================================================
# 有界证明搜索
# ============================================================

@dataclass
class ProofCertificate:
    """可回放的蕴含证书；events 为空时 rules 记录直接成立的依据"""
    events: List[TraceEvent]
    seed_pairs: Tuple[SemanticPair, ...]
    pool_size: int
    depth: int
    rules: Tuple[str, ...] = field(default=())


def build_pool(kb: KnowledgeBase, q: Assertion, depth: int, max_pool: int) -> List[WorldSet]:
    """子公式的世界集，经 ¬ ∧ ∨ 组合 depth 层（确定性顺序，至多 max_pool 个）"""
    u = kb.universe
    pool: List[WorldSet] = []
    seen = set()

    def add(mask: WorldSet) -> bool:
        if mask in seen:
            return True
        if len(pool) >= max_pool:
            return False
        seen.add(mask)
        pool.append(mask)
        return True

    for mask in (u.full, 0):
        add(mask)
    for a in kb.assertions + (q,):
        for part in (a.antecedent, a.consequent):
            for sub in part.subformulas():
                add(worlds_of(sub, u))

    for _ in range(depth):
        current = list(pool)
        fresh = [u.full & ~x for x in current]
        for x, y in itertools.combinations(current, 2):
            fresh.append(x & y)
            fresh.append(x | y)
        for mask in fresh:
            if not add(mask):
                logger.debug(f"[Search] 公式池达到上限 {max_pool}")
                return pool
    return pool


class _PoolClosure:
    """限制在公式池上的闭包，事件与 ClosureEngine 同格式"""

    def __init__(self, u: Universe, pool: List[WorldSet], seeds: Sequence[SemanticPair], system: System):
        self.full = u.full
        self.pool = pool
        self.system = system
        self.table = seeded_table(u.full, seeds)
        self.core = {a: self.table[a] for a in pool}
        self.events: List[TraceEvent] = []

    def _emit(self, rule: str, a: int, premises, new: int):
        self.events.append(TraceEvent(rule, a, tuple(premises), new))
        self.core[a] = new

    def run(self, target: SemanticPair) -> bool:
        done = lambda: self.core[target.antecedent] & ~target.consequent == 0
        rules = self.system.tightenings
        changed = True
        while changed and not done():
            changed = False
            changed |= self._cut_cm()
            if "LOOP" in rules:
                changed |= self._loop()
            if "OR" in rules:
                changed |= self._or()
            if "MON" in rules:
                changed |= self._mon()
            if "CONTRA" in rules:
                changed |= self._contra()
        return done()

    def _cut_cm(self) -> bool:
        changed = False
        for a in self.pool:
            for d in self.pool:
                ca, cd = self.core[a], self.core[d]
                if d & ~a or ca & ~d:
                    continue
                if ca & ~cd:
                    self._emit("CUT", a, ((a, d), (d, cd)), ca & cd)
                    changed = True
                    ca = self.core[a]
                if cd & ~ca:
                    self._emit("CM", d, ((a, ca), (a, d)), cd & ca)
                    changed = True
        return changed

    def _or(self) -> bool:
        changed = False
        for a in self.pool:
            for x in self.pool:
                if x & ~a:
                    continue
                bound = (a & ~x) | self.core[x]
                if self.core[a] & ~bound:
                    self._emit("OR", a, ((x, self.core[x]),), self.core[a] & bound)
                    changed = True
        return changed

    def _mon(self) -> bool:
        changed = False
        for a in self.pool:
            for b in self.pool:
                if a & ~b:
                    continue
                if self.core[a] & ~self.core[b]:
                    self._emit("MON", a, ((b, self.core[b]),), self.core[a] & self.core[b])
                    changed = True
        return changed

    def _contra(self) -> bool:
        changed = False
        for a in self.pool:
            for y in self.pool:
                if y & self.core[a]:
                    continue
                if self.core[y] & a:
                    self._emit("CONTRA", y, ((a, self.full & ~y),), self.core[y] & ~a)
                    changed = True
        return changed

    def _loop(self) -> bool:
        succ = {a: [b for b in self.pool if self.core[a] & ~b == 0 and b != a] for a in self.pool}
        changed = False
        for scc in strongly_connected_components(self.pool, lambda a: succ[a]):
            if len(scc) < 2:
                continue
            members = set(scc)
            inner = lambda a: [b for b in succ[a] if b in members]
            walk = []
            for s, t in zip(scc, scc[1:] + scc[:1]):
                path = shortest_path(s, t, inner)
                walk.extend(zip(path, path[1:]))
            meet = self.full
            for a in scc:
                meet &= self.core[a]
            for a in scc:
                if self.core[a] != meet:
                    self._emit("LOOP", a, walk, self.core[a] & meet)
                    changed = True
        return changed


def bounded_proof(kb: KnowledgeBase, q: Assertion, system: System,
                  depth: Optional[int] = None) -> Optional[ProofCertificate]:
    """
    在深度 depth 的公式池上做前向闭包；成功时返回经独立回放校验的轨迹
    """
    depth = default_depth() if depth is None else depth
    if depth < 0:
        raise PreconditionError("proof depth must be non-negative")
    u = kb.universe
    max_pool = int(get_config().get("search.max_pool", 256))
    pool = build_pool(kb, q, depth, max_pool)
    seeds = tuple(kb.pairs())
    target = semantic_pair(q, u)

    closure = _PoolClosure(u, pool, seeds, system)
    if not closure.run(target):
        logger.debug(f"[Search] 深度 {depth} 的公式池（{len(pool)} 个）内未找到证明")
        return None

    replay = replay_events(seeded_table(u.full, seeds), closure.events, system)
    if not replay.ok or replay.table[target.antecedent] & ~target.consequent:
        logger.error(f"[Search] 证明轨迹回放失败: {replay.problems}")
        return None
    rules = tuple(sorted({e.rule for e in closure.events})) or direct_justification(target, seeds)
    logger.info(f"[Search] 找到证明：{len(closure.events)} 步，规则 {rules}")
    return ProofCertificate(closure.events, seeds, len(pool), depth, rules)


# ============================================================
# 单射标签等价模型与理性公设反例
# ============================================================

def find_injective_equivalent(model: Model, max_states: Optional[int] = None) -> Optional[Model]:
    """
    标签两两不同、至多 max_states（默认 |U|）个状态、且定义同一关系的优先模型

    返回 None 表示界内不存在。
    """
    u = model.universe
    target = relation_of_model(model)
    limit = u.size if max_states is None else min(max_states, u.size)
    checked = 0
    for k in range(0, limit + 1):
        for worlds in itertools.combinations(range(u.size), k):
            for order in strict_partial_orders(k):
                checked += 1
                candidate = Model(u, tuple(f"s{i}" for i in range(k)),
                                  tuple(1 << w for w in worlds), np.array(order, dtype=bool),
                                  Flavor.PREFERENTIAL)
                if relation_of_model(candidate) == target:
                    logger.info(f"[Search] 单射等价模型：{k} 个状态（第 {checked} 个候选）")
                    return candidate
    logger.info(f"[Search] {checked} 个候选中没有单射等价模型")
    return None


def find_rationality_violation(which: Rationality, universe: Optional[Universe] = None,
                               max_states: int = 4) -> Optional[Tuple[Model, CheckResult]]:
    """定义的关系违反指定理性公设的优先模型（状态数递增枚举）"""
    u = universe or make_universe(["b", "c"])
    for k in range(1, max_states + 1):
        for worlds in itertools.combinations(range(u.size), k):
            for order in strict_partial_orders(k):
                model = Model(u, tuple(f"s{i}" for i in range(k)), tuple(1 << w for w in worlds),
                              np.array(order, dtype=bool), Flavor.PREFERENTIAL)
                result = rationality_check(relation_of_model(model), which)
                if not result.ok:
                    logger.info(f"[Search] {which.value} 反例：{k} 个状态")
                    return model, result
    return None
