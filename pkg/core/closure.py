#!/usr/bin/env python3
"""
Closure Engine ⚙️ - 五个证明系统的不动点闭包

后件核表示：关系 R 由映射 A ↦ C(A) 表示，(A, B) ∈ R 当且仅当 C(A) ⊆ B。
每个系统都包含 And 与 Right Weakening，所以每个前件的后件集合是主滤子。

收紧规则（全部是规则实例，只会缩小核）：
- CUT/CM   当 C(A) ⊆ D ⊆ A 时，C(A) 与 C(D) 都取 C(A) ∩ C(D)
- LOOP     图 A→B (C(A) ⊆ B) 的强连通分量内取核的交
- OR       以 S 形式实现：C(A) ∩= (A∖X) ∪ C(X)，X ⊆ A
- MON      C(A) ∩= C(B)，B ⊇ A
- CONTRA   X ∩ C(A) = ∅ 时 C(X) ∖= A
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .config import get_config
from .errors import ScaleLimitError
from .formula import Universe, WorldSet, truth_vector
from .graphs import shortest_path, strongly_connected_components, transitive_matrix
from .knowledge_base import Assertion, KnowledgeBase, SemanticPair, semantic_pair

logger = logging.getLogger(__name__)

HARD_LATTICE_CAP = 16


class Rule(Enum):
    """基本规则"""
    REFLEXIVITY = "Reflexivity"
    LLE = "LeftLogicalEquivalence"
    RW = "RightWeakening"
    CUT = "Cut"
    CAUTIOUS_MONOTONICITY = "CautiousMonotonicity"
    LOOP = "Loop"
    OR = "Or"
    MONOTONICITY = "Monotonicity"
    CONTRAPOSITION = "Contraposition"


_C_RULES = (Rule.REFLEXIVITY, Rule.LLE, Rule.RW, Rule.CUT, Rule.CAUTIOUS_MONOTONICITY)


class System(Enum):
    """证明系统"""
    C = "C"
    CL = "CL"
    P = "P"
    CM = "CM"
    M = "M"

    @property
    def rules(self) -> Tuple[Rule, ...]:
        extra = {
            System.C: (),
            System.CL: (Rule.LOOP,),
            System.P: (Rule.OR,),
            System.CM: (Rule.MONOTONICITY,),
            System.M: (Rule.CONTRAPOSITION,),
        }[self]
        return _C_RULES + extra

    @property
    def tightenings(self) -> Tuple[str, ...]:
        """闭包时运行的收紧（含派生规则），也是轨迹中允许出现的规则名"""
        return {
            System.C: ("CUT", "CM"),
            System.CL: ("CUT", "CM", "LOOP"),
            System.P: ("CUT", "CM", "OR"),
            System.CM: ("CUT", "CM", "MON"),
            System.M: ("CUT", "CM", "OR", "MON", "CONTRA"),
        }[self]

    @property
    def conditions(self) -> Tuple[str, ...]:
        """satisfies_system 检查的映射级条件"""
        return {
            System.C: ("REF", "CUT", "CM"),
            System.CL: ("REF", "CUT", "CM", "LOOP"),
            System.P: ("REF", "CUT", "CM", "OR"),
            System.CM: ("REF", "CUT", "CM", "MON"),
            System.M: ("REF", "CUT", "CM", "CONTRA"),
        }[self]

    @classmethod
    def parse(cls, name: str) -> "System":
        try:
            return cls(name.upper())
        except ValueError:
            raise ValueError(f"unknown system {name!r} (expected one of C, CL, P, CM, M)") from None


# ============================================================
# 后件核映射
# ============================================================

def lattice_cap() -> int:
    return min(HARD_LATTICE_CAP, int(get_config().get("limits.max_lattice_worlds", HARD_LATTICE_CAP)))


def require_lattice(u: Universe, what: str = "universe size"):
    """格算法要求 |U| 不超过上限"""
    cap = lattice_cap()
    if u.size > cap:
        raise ScaleLimitError(what, u.size, cap)


def hex_width(u: Universe) -> int:
    return max(1, (u.size + 3) // 4)


def hex_mask(value: int, u: Universe) -> str:
    return f"{value:0{hex_width(u)}x}"


@dataclass(eq=False)
class ConsequenceMap:
    """A ↦ C(A)，C(A) ⊆ A"""
    universe: Universe
    core: np.ndarray

    @property
    def count(self) -> int:
        return int(len(self.core))

    @property
    def full(self) -> int:
        return self.universe.full

    def __getitem__(self, a: int) -> int:
        return int(self.core[a])

    def holds(self, a: WorldSet, b: WorldSet) -> bool:
        return (int(self.core[a]) & ~b) == 0

    def holds_pair(self, pair: SemanticPair) -> bool:
        return self.holds(pair.antecedent, pair.consequent)

    def copy(self) -> "ConsequenceMap":
        return ConsequenceMap(self.universe, self.core.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConsequenceMap):
            return NotImplemented
        return self.universe == other.universe and np.array_equal(self.core, other.core)

    def pairs(self) -> FrozenSet[Tuple[int, int]]:
        """显式二元组集合（仅用于小宇宙）"""
        n = self.count
        bs = np.arange(n, dtype=np.int64)
        out = set()
        for a in range(n):
            for b in bs[(int(self.core[a]) & ~bs) == 0]:
                out.add((a, int(b)))
        return frozenset(out)

    def dump(self) -> str:
        """A=<hex> C=<hex>，按 A 升序"""
        return "".join(
            f"A={hex_mask(a, self.universe)} C={hex_mask(int(c), self.universe)}\n"
            for a, c in enumerate(self.core)
        )

    @classmethod
    def identity(cls, u: Universe) -> "ConsequenceMap":
        require_lattice(u)
        return cls(u, np.arange(1 << u.size, dtype=np.int64))


def dump_map(cmap: ConsequenceMap) -> str:
    return cmap.dump()


def parse_dump(text: str, u: Universe) -> ConsequenceMap:
    """读取闭包转储格式"""
    core = np.arange(1 << u.size, dtype=np.int64)
    for line in text.splitlines():
        if not line.strip():
            continue
        a_part, c_part = line.split()
        core[int(a_part[2:], 16)] = int(c_part[2:], 16)
    return ConsequenceMap(u, core)


@dataclass(frozen=True)
class TraceEvent:
    """一次收紧：规则名、被收紧的前件、前提二元组、新核"""
    rule: str
    antecedent: int
    premises: Tuple[Tuple[int, int], ...]
    core: int

    def render(self, u: Universe) -> str:
        prem = ", ".join(f"({hex_mask(a, u)},{hex_mask(b, u)})" for a, b in self.premises)
        return f"{self.rule:<6} A={hex_mask(self.antecedent, u)} C:={hex_mask(self.core, u)} from [{prem}]"

    def to_dict(self) -> Dict:
        return {
            "rule": self.rule,
            "antecedent": self.antecedent,
            "premises": [list(p) for p in self.premises],
            "core": self.core,
        }


def initial_map(kb: KnowledgeBase) -> ConsequenceMap:
    """C(A) = A ∩ ⋂{worlds(β) : α|~β ∈ K, worlds(α) = A}"""
    u = kb.universe
    cmap = ConsequenceMap.identity(u)
    for pair in kb.pairs():
        cmap.core[pair.antecedent] &= pair.consequent
    return cmap


# ============================================================
# 格扫描工具
# ============================================================

@lru_cache(maxsize=4096)
def _submasks(free: int) -> np.ndarray:
    """free 的全部子掩码（只读缓存）"""
    out = np.zeros(1, dtype=np.int64)
    bit = 1
    while bit <= free:
        if free & bit:
            out = np.concatenate([out, out | bit])
        bit <<= 1
    out.setflags(write=False)
    return out


def _bit_matrix(values: np.ndarray, n: int) -> np.ndarray:
    """(N, n) 布尔矩阵，第 w 列为各值的第 w 位"""
    return ((values[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)


def _propagate_to_supersets(witness: np.ndarray, n: int):
    """原地：W[A, w] 取某个 X ⊆ A 的见证（-1 表示无）"""
    for i in range(n):
        view = witness.reshape(1 << (n - i - 1), 2, 1 << i, n)
        lo, hi = view[:, 0], view[:, 1]
        np.copyto(hi, lo, where=(hi == -1))


def _propagate_to_subsets(witness: np.ndarray, n: int):
    """原地：W[A, w] 取某个 B ⊇ A 的见证"""
    for i in range(n):
        view = witness.reshape(1 << (n - i - 1), 2, 1 << i, n)
        lo, hi = view[:, 0], view[:, 1]
        np.copyto(lo, hi, where=(lo == -1))


def _mask_rows(flags: np.ndarray) -> np.ndarray:
    """(N, n) 布尔 -> 每行的位掩码"""
    n = flags.shape[1]
    if n == 0:
        return np.zeros(flags.shape[0], dtype=np.int64)
    return (flags.astype(np.int64) << np.arange(n, dtype=np.int64)).sum(axis=1)


# ============================================================
# 闭包引擎
# ============================================================

@dataclass
class ClosureStats:
    rounds: int = 0
    tightenings: Dict[str, int] = field(default_factory=dict)
    stopped_early: bool = False


class ClosureEngine:
    """
    不动点闭包

    每轮依次运行系统的各项收紧，直到一轮内没有核变化。
    stop_when(core) 为真时提前停止（任何前缀都是可靠的）。
    pass_order 改变每轮内收紧的次序，不动点与次序无关。
    """

    def __init__(self, cmap: ConsequenceMap, system: System,
                 stop_when: Optional[Callable[[np.ndarray], bool]] = None,
                 max_rounds: Optional[int] = None,
                 pass_order: Optional[Sequence[str]] = None):
        require_lattice(cmap.universe)
        self.universe = cmap.universe
        self.system = system
        self.n = cmap.universe.size
        self.count = 1 << self.n
        self.full = cmap.universe.full
        self.core = cmap.core.copy()
        self.all = np.arange(self.count, dtype=np.int64)
        self.events: List[TraceEvent] = []
        self.stop_when = stop_when
        self.max_rounds = max_rounds or int(get_config().get("closure.max_rounds", 10000))
        self.pass_order = tuple(pass_order) if pass_order else ("CUT", "LOOP", "OR", "MON", "CONTRA")
        self.stats = ClosureStats()

    # ---------- 主循环 ----------

    def run(self) -> ConsequenceMap:
        passes = {
            "CUT": self._cut_cm_pass,
            "LOOP": self._loop_pass,
            "OR": self._or_pass,
            "MON": self._mon_pass,
            "CONTRA": self._contra_pass,
        }
        order = [name for name in self.pass_order if name in self.system.tightenings]

        if self._should_stop():
            self.stats.stopped_early = True
            return self.result()

        changed = True
        while changed:
            if self.stats.rounds >= self.max_rounds:
                logger.warning(f"[Closure] 达到最大轮数 {self.max_rounds}，结果是可靠前缀")
                break
            self.stats.rounds += 1
            changed = False
            for name in order:
                if passes[name]():
                    changed = True
                if self._should_stop():
                    self.stats.stopped_early = True
                    logger.debug(f"[Closure] 查询在第 {self.stats.rounds} 轮 {name} 后成立，提前结束")
                    return self.result()

        logger.debug(
            f"[Closure] {self.system.value} 收敛：{self.stats.rounds} 轮，"
            f"{len(self.events)} 次收紧 {self.stats.tightenings}"
        )
        return self.result()

    def result(self) -> ConsequenceMap:
        return ConsequenceMap(self.universe, self.core.copy())

    def _should_stop(self) -> bool:
        return self.stop_when is not None and bool(self.stop_when(self.core))

    def _emit(self, rule: str, antecedent: int, premises, new_core: int):
        self.events.append(TraceEvent(rule, int(antecedent), tuple(premises), int(new_core)))
        self.core[antecedent] = new_core
        self.stats.tightenings[rule] = self.stats.tightenings.get(rule, 0) + 1

    # ---------- CUT + CM ----------

    def _cut_cm_pass(self) -> bool:
        changed = False
        core = self.core
        for a in range(self.count):
            ca = int(core[a])
            free = a & ~ca
            if free == 0:
                continue
            idx = ca | _submasks(free)
            vals = core[idx]
            meet = int(np.bitwise_and.reduce(vals)) & ca

            if meet != ca:
                removed = ca & ~meet
                premises = []
                for d, cd in zip(idx.tolist(), vals.tolist()):
                    if removed & ~cd:
                        premises.append((a, d))
                        premises.append((d, cd))
                        removed &= cd
                    if not removed:
                        break
                self._emit("CUT", a, premises, meet)
                changed = True

            vals = core[idx]
            stale = np.flatnonzero((vals & ~meet) != 0)
            for k in stale.tolist():
                d = int(idx[k])
                self._emit("CM", d, ((a, meet), (a, d)), int(core[d]) & meet)
                changed = True
        return changed

    # ---------- LOOP ----------

    def core_graph(self) -> Tuple[List[int], Dict[int, List[Tuple[int, int]]]]:
        """
        以不同核值为结点的图：K → K'' 当且仅当存在 X ⊇ C(K) 且 C(X) = K''（经由 X）

        每个前件 A 与 C(A) 互相可达，所以原图的强连通分量就是这些结点分量的并。
        """
        core = self.core
        nodes = np.unique(core).tolist()
        edges: Dict[int, List[Tuple[int, int]]] = {}
        for k in nodes:
            ck = int(core[k])
            sup = self.all[(ck & ~self.all) == 0]
            targets, first = np.unique(core[sup], return_index=True)
            edges[k] = [(int(t), int(sup[f])) for t, f in zip(targets, first)]
        return nodes, edges

    def _loop_pass(self) -> bool:
        nodes, edges = self.core_graph()
        succ = {k: [t for t, _ in edges[k]] for k in nodes}
        via = {(k, t): x for k in nodes for t, x in edges[k]}
        changed = False

        for scc in strongly_connected_components(nodes, lambda k: succ[k]):
            if len(scc) < 2:
                continue
            members_set = set(scc)
            ordered = sorted(scc)
            new = self.full
            for k in ordered:
                new &= k

            # 经过全部结点的闭合路径作为 Loop 的前提
            walk: List[Tuple[int, int]] = []
            inner = lambda k: [t for t in succ[k] if t in members_set]
            for s, t in zip(ordered, ordered[1:] + ordered[:1]):
                path = shortest_path(s, t, inner)
                for u, v in zip(path, path[1:]):
                    x = via[(u, v)]
                    walk.append((u, x))
                    walk.append((x, v))
            premises = tuple(walk)

            members = np.flatnonzero(np.isin(self.core, ordered))
            for m in members.tolist():
                if int(self.core[m]) != new:
                    self._emit("LOOP", m, premises, int(self.core[m]) & new)
                    changed = True
        return changed

    # ---------- OR（S 形式）----------

    def _or_pass(self) -> bool:
        n = self.n
        if n == 0:
            return False
        core = self.core
        in_x = _bit_matrix(self.all, n)
        in_core = _bit_matrix(core, n)
        witness = np.where(in_x & ~in_core, self.all[:, None], -1)
        _propagate_to_supersets(witness, n)
        return self._apply_witnesses("OR", witness, in_core,
                                     lambda a, x: (x, int(core[x])))

    # ---------- MON ----------

    def _mon_pass(self) -> bool:
        n = self.n
        if n == 0:
            return False
        core = self.core
        in_core = _bit_matrix(core, n)
        witness = np.where(~in_core, self.all[:, None], -1)
        _propagate_to_subsets(witness, n)
        return self._apply_witnesses("MON", witness, in_core,
                                     lambda a, b: (b, int(core[b])))

    # ---------- CONTRA ----------

    def _contra_pass(self) -> bool:
        n = self.n
        if n == 0:
            return False
        core = self.core
        full = self.full
        outside = full & ~core
        witness = np.full((self.count, n), -1, dtype=np.int64)
        for w in range(n):
            has_w = ((self.all >> w) & 1).astype(bool)
            witness[outside[has_w], w] = self.all[has_w]
        _propagate_to_subsets(witness, n)
        in_core = _bit_matrix(core, n)
        return self._apply_witnesses("CONTRA", witness, in_core,
                                     lambda y, a: (a, full & ~y))

    def _apply_witnesses(self, rule: str, witness: np.ndarray, in_core: np.ndarray,
                         premise_of: Callable[[int, int], Tuple[int, int]]) -> bool:
        removable = in_core & (witness != -1)
        rows = np.flatnonzero(removable.any(axis=1))
        if len(rows) == 0:
            return False
        premises_by_row = {}
        for a in rows.tolist():
            seen = []
            for x in witness[a][removable[a]].tolist():
                p = premise_of(a, int(x))
                if p not in seen:
                    seen.append(p)
            premises_by_row[a] = seen
        new_cores = self.core[rows] & ~_mask_rows(removable[rows])
        for a, new in zip(rows.tolist(), new_cores.tolist()):
            self._emit(rule, a, premises_by_row[a], new)
        return True


def close(cmap: ConsequenceMap, system: System,
          stop_when: Optional[Callable[[np.ndarray], bool]] = None
          ) -> Tuple[ConsequenceMap, List[TraceEvent]]:
    """系统 system 下的最小闭包（stop_when 可提前结束）"""
    engine = ClosureEngine(cmap, system, stop_when=stop_when)
    result = engine.run()
    return result, engine.events


def close_kb(kb: KnowledgeBase, system: System) -> ConsequenceMap:
    return close(initial_map(kb), system)[0]


# ============================================================
# 轨迹回放与独立校验
# ============================================================

class CoreTable:
    """稀疏核表：未被事件触及的前件取 default(A)"""

    def __init__(self, full: int, default: Callable[[int], int]):
        self.full = full
        self.default = default
        self.values: Dict[int, int] = {}

    def __getitem__(self, a: int) -> int:
        if a in self.values:
            return self.values[a]
        return self.default(a)

    def __setitem__(self, a: int, value: int):
        self.values[a] = value

    def holds(self, a: int, b: int) -> bool:
        return (self[a] & ~b) == 0


def seeded_table(full: int, pairs: Sequence[SemanticPair]) -> CoreTable:
    """由知识库种子构造的初始核表"""
    seeds: Dict[int, int] = {}
    for p in pairs:
        seeds[p.antecedent] = seeds.get(p.antecedent, full) & p.consequent
    return CoreTable(full, lambda a: a & seeds.get(a, full))


def direct_justification(target: SemanticPair, seeds: Sequence[SemanticPair]) -> Tuple[str, ...]:
    """无事件证书的依据：Reflexivity、单个假设（含 RW），或若干假设的 And"""
    a, b = target.antecedent, target.consequent
    if a & ~b == 0:
        return ("Reflexivity",)
    if any(a & p.consequent & ~b == 0 for p in seeds if p.antecedent == a):
        return ("Assumption",)
    return ("Assumption", "And")


def check_event(table: CoreTable, ev: TraceEvent) -> Optional[str]:
    """事件是否是当前状态下某条规则的实例；返回问题描述或 None"""
    full = table.full
    a = ev.antecedent
    old = table[a]
    if ev.core & ~old:
        return "core grows"
    for x, y in ev.premises:
        if not table.holds(x, y):
            return f"premise ({x:x},{y:x}) does not hold"
    prem = ev.premises

    if ev.rule == "CUT":
        if len(prem) % 2:
            return "CUT premises must come in pairs"
        bound = old
        for (a1, d), (d2, xd) in zip(prem[0::2], prem[1::2]):
            if a1 != a or d != d2 or d & ~a:
                return "CUT premise shape"
            bound &= xd
    elif ev.rule == "CM":
        if len(prem) != 2:
            return "CM premise shape"
        (src, xs), (src2, d) = prem
        if src != src2 or d != a or a & ~src:
            return "CM premise shape"
        bound = old & xs
    elif ev.rule == "OR":
        bound = old
        for x, y in prem:
            if x & ~a:
                return "OR premise antecedent not below target"
            bound &= (a & ~x) | y
    elif ev.rule == "MON":
        bound = old
        for b, y in prem:
            if a & ~b:
                return "MON premise antecedent not above target"
            bound &= y
    elif ev.rule == "CONTRA":
        bound = old
        for src, x in prem:
            if x != full & ~a:
                return "CONTRA premise consequent is not the complement"
            bound &= full & ~src
    elif ev.rule == "LOOP":
        if not prem:
            return "LOOP without cycle"
        for (_, y), (x2, _) in zip(prem, prem[1:] + prem[:1]):
            if y != x2:
                return "LOOP premises do not form a closed walk"
        cycle = [x for x, _ in prem]
        if not any(table.holds(a, n) and table.holds(n, a) for n in cycle):
            return "LOOP target not equivalent to a cycle member"
        bound = old
        for node in cycle:
            bound &= table[node]
    else:
        return f"unknown rule {ev.rule}"

    if bound & ~ev.core:
        return f"{ev.rule} tightening not justified"
    return None


@dataclass
class ReplayReport:
    ok: bool
    problems: List[str]
    table: CoreTable
    final: Optional[ConsequenceMap] = None


def replay_events(table: CoreTable, events: Sequence[TraceEvent], system: System) -> ReplayReport:
    """逐个校验并应用事件"""
    allowed = system.tightenings
    problems = []
    for i, ev in enumerate(events):
        if ev.rule not in allowed:
            problems.append(f"event {i}: rule {ev.rule} not in system {system.value}")
            break
        problem = check_event(table, ev)
        if problem:
            problems.append(f"event {i}: {problem}")
            break
        table[ev.antecedent] = ev.core
    return ReplayReport(ok=not problems, problems=problems, table=table)


def replay_trace(initial: ConsequenceMap, events: Sequence[TraceEvent], system: System) -> ReplayReport:
    """从初始映射回放轨迹，重建最终映射"""
    base = initial.core
    table = CoreTable(initial.full, lambda a: int(base[a]))
    report = replay_events(table, events, system)
    final = initial.copy()
    for a, c in table.values.items():
        final.core[a] = c
    report.final = final
    return report


# ============================================================
# 蕴含
# ============================================================

class VerdictStatus(Enum):
    ENTAILED = "ENTAILED"
    NOT_ENTAILED = "NOT ENTAILED"
    UNKNOWN = "UNKNOWN"


@dataclass
class Verdict:
    """蕴含判定及其证书（trace / countermodel / fixpoint 三者之一，UNKNOWN 时无证书）"""
    status: VerdictStatus
    system: System
    query: Assertion
    certificate_kind: str = "none"
    trace: Optional[List[TraceEvent]] = None
    seed_pairs: Tuple[SemanticPair, ...] = ()
    countermodel: Optional[object] = None
    fixpoint_core: Optional[int] = None

    @property
    def entailed(self) -> Optional[bool]:
        if self.status == VerdictStatus.UNKNOWN:
            return None
        return self.status == VerdictStatus.ENTAILED

    def to_dict(self) -> Dict:
        return {
            "verdict": self.status.value,
            "certificate_kind": self.certificate_kind,
            "system": self.system.value,
            "query": self.query.render(),
        }


def entails(kb: KnowledgeBase, q: Assertion, system: System, budget=None) -> Verdict:
    """
    K 在 system 下是否蕴含 q

    |U| 在格上限内：完整闭包（查询成立即提前结束）；
    否则交给搜索模块，结论可能为 UNKNOWN。
    """
    from . import search

    u = kb.universe
    pair = semantic_pair(q, u)

    if u.size > lattice_cap():
        logger.info(f"[Closure] |U|={u.size} 超出格上限，改用搜索")
        model = search.find_countermodel(kb, q, search.FLAVOR_OF_SYSTEM[system], budget)
        if model is not None:
            return Verdict(VerdictStatus.NOT_ENTAILED, system, q, "countermodel", countermodel=model)
        proof = search.bounded_proof(kb, q, system, search.default_depth())
        if proof is not None:
            return Verdict(VerdictStatus.ENTAILED, system, q, "trace",
                           trace=proof.events, seed_pairs=proof.seed_pairs)
        return Verdict(VerdictStatus.UNKNOWN, system, q)

    if u.size > int(get_config().get("closure.countermodel_first_above_worlds", 8)):
        quick = search.quick_budget(budget)
        model = search.find_countermodel(kb, q, search.FLAVOR_OF_SYSTEM[system], quick)
        if model is not None:
            return Verdict(VerdictStatus.NOT_ENTAILED, system, q, "countermodel", countermodel=model)

    a, b = pair.antecedent, pair.consequent
    cmap, events = close(initial_map(kb), system, stop_when=lambda core: (int(core[a]) & ~b) == 0)
    if cmap.holds(a, b):
        return Verdict(VerdictStatus.ENTAILED, system, q, "trace",
                       trace=events, seed_pairs=tuple(kb.pairs()))
    return Verdict(VerdictStatus.NOT_ENTAILED, system, q, "fixpoint", fixpoint_core=cmap[a])


def material_entails(kb: KnowledgeBase, q: Assertion) -> bool:
    """{γ→δ} ⊨ α→β（相对于宇宙），纯公式层操作"""
    u = kb.universe
    allowed = np.ones(u.size, dtype=bool)
    for a in kb.assertions:
        allowed &= ~truth_vector(a.antecedent, u) | truth_vector(a.consequent, u)
    bad = truth_vector(q.antecedent, u) & ~truth_vector(q.consequent, u)
    return not bool(np.any(allowed & bad))


# ============================================================
# 映射级条件检查
# ============================================================

@dataclass
class Violation:
    rule: str
    sets: Tuple[int, ...]
    detail: str = ""


@dataclass
class CheckResult:
    ok: bool
    rule: str
    violation: Optional[Violation] = None
    sampled: bool = False

    def __bool__(self) -> bool:
        return self.ok


class _Checker:
    """成对检查：外层前件（大宇宙时抽样），内层向量化"""

    def __init__(self, cmap: ConsequenceMap):
        require_lattice(cmap.universe)
        self.cmap = cmap
        self.core = cmap.core
        self.n = cmap.universe.size
        self.full = cmap.full
        self.all = np.arange(cmap.count, dtype=np.int64)
        limit = int(get_config().get("limits.exhaustive_check_worlds", 8))
        self.sampled = self.n > limit
        if self.sampled:
            rng = np.random.default_rng(int(get_config().get("checks.seed", 0)))
            size = min(cmap.count, int(get_config().get("checks.sample_antecedents", 256)))
            self.outer = np.sort(rng.choice(cmap.count, size=size, replace=False)).tolist()
        else:
            self.outer = list(range(cmap.count))

    def pairwise(self, rule: str, test: Callable[[int, int, np.ndarray], np.ndarray],
                 detail: str = "") -> CheckResult:
        """test(a, ka, Bs) 返回违例布尔向量"""
        for a in self.outer:
            bad = np.flatnonzero(test(a, int(self.core[a]), self.all))
            if len(bad):
                return CheckResult(False, rule, Violation(rule, (a, int(bad[0])), detail), self.sampled)
        return CheckResult(True, rule, sampled=self.sampled)


def _check_ref(ch: _Checker) -> CheckResult:
    bad = np.flatnonzero(ch.core & ~ch.all)
    if len(bad):
        return CheckResult(False, "REF", Violation("REF", (int(bad[0]),), "C(A) not inside A"))
    return CheckResult(True, "REF")


def _check_interval(ch: _Checker, rule: str) -> CheckResult:
    core = ch.core
    for a in ch.outer:
        ca = int(core[a])
        free = a & ~ca
        if ca & ~a:
            continue
        idx = ca | _submasks(free)
        vals = core[idx]
        if rule == "CUT":
            bad = np.flatnonzero((ca & ~vals) != 0)
            detail = "C(A) ⊆ D but C(A) ⊄ C(D)"
        else:
            bad = np.flatnonzero((vals & ~ca) != 0)
            detail = "C(A) ⊆ D ⊆ A but C(D) ⊄ C(A)"
        if len(bad):
            return CheckResult(False, rule, Violation(rule, (a, int(idx[bad[0]])), detail), ch.sampled)
    return CheckResult(True, rule, sampled=ch.sampled)


def loop_components(cmap: ConsequenceMap) -> List[List[int]]:
    """图 A→B (C(A) ⊆ B) 的非平凡强连通分量（按核值结点给出）"""
    engine = ClosureEngine(cmap, System.CL)
    nodes, edges = engine.core_graph()
    succ = {k: [t for t, _ in edges[k]] for k in nodes}
    return [sorted(s) for s in strongly_connected_components(nodes, lambda k: succ[k]) if len(s) > 1]


def _check_loop(ch: _Checker) -> CheckResult:
    core = ch.core
    for scc in loop_components(ch.cmap):
        members = np.flatnonzero(np.isin(core, scc))
        union = int(np.bitwise_or.reduce(core[members]))
        meet = int(np.bitwise_and.reduce(members.astype(np.int64)))
        if union & ~meet:
            for a in members.tolist():
                bad = members[(int(core[a]) & ~members) != 0]
                if len(bad):
                    return CheckResult(False, "LOOP", Violation(
                        "LOOP", (a, int(bad[0])), "A and B in one loop component but C(A) ⊄ B"))
    return CheckResult(True, "LOOP")


def _check_mon(ch: _Checker) -> CheckResult:
    n = ch.n
    if n == 0:
        return CheckResult(True, "MON")
    in_core = _bit_matrix(ch.core, n)
    witness = np.where(~in_core, ch.all[:, None], -1)
    _propagate_to_subsets(witness, n)
    bad = in_core & (witness != -1)
    rows = np.flatnonzero(bad.any(axis=1))
    if len(rows):
        a = int(rows[0])
        b = int(witness[a][bad[a]][0])
        return CheckResult(False, "MON", Violation("MON", (a, b), "A ⊆ B but C(A) ⊄ C(B)"))
    return CheckResult(True, "MON")


def _or_test(ch):
    core = ch.core
    return lambda a, ka, bs: (core[a | bs] & ~(ka | core[bs])) != 0


def _contra_test(ch):
    core = ch.core
    return lambda a, ka, xs: ((xs & ka) == 0) & ((core[xs] & a) != 0)


def satisfies_system(cmap: ConsequenceMap, system: System) -> CheckResult:
    """映射是否满足系统的全部条件；失败时给出见证"""
    ch = _Checker(cmap)
    for cond in system.conditions:
        result = check_condition(ch, cond)
        if not result.ok:
            return result
    return CheckResult(True, system.value, sampled=ch.sampled)


def check_condition(ch: "_Checker", cond: str) -> CheckResult:
    if isinstance(ch, ConsequenceMap):
        ch = _Checker(ch)
    if cond == "REF":
        return _check_ref(ch)
    if cond in ("CUT", "CM"):
        return _check_interval(ch, cond)
    if cond == "LOOP":
        return _check_loop(ch)
    if cond == "OR":
        return ch.pairwise("OR", _or_test(ch), "C(A∪B) ⊄ C(A) ∪ C(B)")
    if cond == "MON":
        return _check_mon(ch)
    if cond == "CONTRA":
        return ch.pairwise("CONTRA", _contra_test(ch), "X ∩ C(A) = ∅ but C(X) ∩ A ≠ ∅")
    raise ValueError(f"unknown condition {cond}")


# ============================================================
# 派生规则
# ============================================================

class DerivedRule(Enum):
    AND = "And"
    EQUIVALENCE = "Equivalence"
    MPC = "MPC"
    OR_TRANS = "OrTrans"
    S = "S"
    D = "D"
    OR_BOTH = "OrBoth"                          # α|~γ, β|~δ ⇒ α∨β |~ γ∨δ
    OR_IMPLIES = "OrImplies"                    # α∨γ|~γ, α|~β ⇒ γ |~ α→β
    PREFERENCE_TRANSITIVITY = "PrefTrans"       # α∨β|~α, β∨γ|~β ⇒ α∨γ |~ α
    PREFERENCE_IMPLICATION = "PrefImplication"  # α∨β|~α, β∨γ|~β ⇒ α |~ γ→β
    EHD = "EHD"
    TRANSITIVITY = "Transitivity"
    LOOP = "Loop"
    OR = "Or"
    MONOTONICITY = "Monotonicity"
    CONTRAPOSITION = "Contraposition"


_C_DERIVED = (DerivedRule.AND, DerivedRule.EQUIVALENCE, DerivedRule.MPC, DerivedRule.OR_TRANS)

DERIVED_RULES = {
    System.C: _C_DERIVED,
    System.CL: _C_DERIVED,
    System.P: _C_DERIVED + (
        DerivedRule.S, DerivedRule.D, DerivedRule.OR_BOTH, DerivedRule.OR_IMPLIES,
        DerivedRule.PREFERENCE_TRANSITIVITY, DerivedRule.PREFERENCE_IMPLICATION, DerivedRule.LOOP,
    ),
    System.CM: _C_DERIVED + (DerivedRule.EHD, DerivedRule.TRANSITIVITY, DerivedRule.LOOP),
    System.M: _C_DERIVED + (
        DerivedRule.OR, DerivedRule.MONOTONICITY, DerivedRule.EHD, DerivedRule.TRANSITIVITY,
        DerivedRule.LOOP,
    ),
}


def _preference_rule(ch: _Checker, rule: DerivedRule) -> CheckResult:
    """前提 R(A∪B, A) 与 R(B∪G, B) 的三元规则"""
    core, full, bs_all = ch.core, ch.full, ch.all
    inner = ch.outer
    for a in ch.outer:
        ka = int(core[a])
        valid_b = bs_all[(core[a | bs_all] & ~a) == 0]
        for b in valid_b.tolist():
            if ch.sampled and b not in inner:
                continue
            gs = bs_all
            cond = (core[b | gs] & ~b) == 0
            if rule == DerivedRule.PREFERENCE_TRANSITIVITY:
                bad = cond & ((core[a | gs] & ~a) != 0)
            else:
                bad = cond & ((ka & ~((full & ~gs) | b)) != 0)
            hit = np.flatnonzero(bad)
            if len(hit):
                return CheckResult(False, rule.value, Violation(rule.value, (a, b, int(hit[0]))), ch.sampled)
    return CheckResult(True, rule.value, sampled=ch.sampled)


def derived_rule_check(cmap: ConsequenceMap, rule: DerivedRule) -> CheckResult:
    """
    派生规则在映射上的最强实例检查

    And 与 MPC 在核映射上按构造成立（每个前件的后件集合是主滤子），
    对任意二元组集合用 pairset_rule_check。
    """
    ch = _Checker(cmap)
    core, full = ch.core, ch.full

    if rule == DerivedRule.AND:
        def test(a, ka, bs):
            sup = bs[(ka & ~bs) == 0]
            meet = int(np.bitwise_and.reduce(sup)) if len(sup) else full
            return np.array([(ka & ~meet) != 0])
        return ch.pairwise(rule.value, test)
    if rule == DerivedRule.EQUIVALENCE:
        return ch.pairwise(rule.value, lambda a, ka, bs:
                           ((ka & ~bs) == 0) & ((core & ~a) == 0) & ((core & ~ka) != 0))
    if rule == DerivedRule.MPC:
        def test(a, ka, bs):
            rel = (ka & ~bs) == 0
            g = ka & bs
            premise = (ka & ~((full & ~bs) | g)) == 0
            return rel & premise & ((ka & ~g) != 0)
        return ch.pairwise(rule.value, test)
    if rule == DerivedRule.OR_TRANS:
        def test(a, ka, bs):
            u = core[a | bs]
            return ((u & ~a) == 0) & ((u & ~ka) != 0)
        return ch.pairwise(rule.value, test)
    if rule == DerivedRule.S:
        return ch.pairwise(rule.value, lambda a, ka, bs:
                           (ka & ~((full & ~bs) | core[a & bs])) != 0)
    if rule == DerivedRule.D:
        return ch.pairwise(rule.value, lambda a, ka, bs:
                           (ka & ~(core[a & ~bs] | core[a & bs])) != 0)
    if rule in (DerivedRule.OR_BOTH, DerivedRule.OR):
        result = ch.pairwise(rule.value, _or_test(ch))
        return result
    if rule == DerivedRule.OR_IMPLIES:
        def test(a, ka, gs):
            cond = (core[a | gs] & ~gs) == 0
            return cond & ((core[gs] & ~((full & ~a) | ka)) != 0)
        return ch.pairwise(rule.value, test)
    if rule in (DerivedRule.PREFERENCE_TRANSITIVITY, DerivedRule.PREFERENCE_IMPLICATION):
        return _preference_rule(ch, rule)
    if rule == DerivedRule.EHD:
        return ch.pairwise(rule.value, lambda a, ka, bs: (core[a & bs] & ~(ka & bs)) != 0)
    if rule == DerivedRule.TRANSITIVITY:
        return ch.pairwise(rule.value, lambda a, ka, bs:
                           ((ka & ~bs) == 0) & ((ka & ~core) != 0))
    if rule == DerivedRule.LOOP:
        return _check_loop(ch)
    if rule == DerivedRule.MONOTONICITY:
        return _check_mon(ch)
    if rule == DerivedRule.CONTRAPOSITION:
        return ch.pairwise(rule.value, _contra_test(ch))
    raise ValueError(f"unknown derived rule {rule}")


def pairset_rule_check(pairs: FrozenSet[Tuple[int, int]], full: int, rule: DerivedRule) -> CheckResult:
    """And / MPC 在显式二元组集合上的检查"""
    if rule not in (DerivedRule.AND, DerivedRule.MPC):
        raise ValueError(f"pair-set check supports And and MPC, not {rule.value}")
    by_antecedent: Dict[int, set] = {}
    for a, b in pairs:
        by_antecedent.setdefault(a, set()).add(b)

    for a in sorted(by_antecedent):
        bs = by_antecedent[a]
        for b in sorted(bs):
            for c in sorted(bs):
                if rule == DerivedRule.AND:
                    need = b & c
                elif (full & ~b) & ~c == 0:
                    # c = ¬B ∪ C 时结论为 C = c ∩ B
                    need = c & b
                else:
                    continue
                if need not in bs:
                    return CheckResult(False, rule.value,
                                       Violation(rule.value, (a, b, c), f"missing ({a}, {need})"))
    return CheckResult(True, rule.value)


# ============================================================
# 理性公设
# ============================================================

class Rationality(Enum):
    NEGATION = "NegationRationality"
    DISJUNCTIVE = "DisjunctiveRationality"
    RATIONAL_MONOTONICITY = "RationalMonotonicity"


def rationality_check(cmap: ConsequenceMap, which: Rationality) -> CheckResult:
    """
    逆否形式检查，违例见证 (A, B)：

    NR  R(A, C(A)) 但 C(A∩B) ⊄ C(A) 且 C(A∖B) ⊄ C(A)
    DR  R(A∪B, C(A∪B)) 但 C(A) ⊄ C(A∪B) 且 C(B) ⊄ C(A∪B)
    RM  R(A, C(A)) 但 C(A∩B) ⊄ C(A) 且 C(A) ∩ B ≠ ∅
    """
    ch = _Checker(cmap)
    core = ch.core
    if which == Rationality.NEGATION:
        test = lambda a, ka, bs: ((core[a & bs] & ~ka) != 0) & ((core[a & ~bs] & ~ka) != 0)
    elif which == Rationality.DISJUNCTIVE:
        def test(a, ka, bs):
            u = core[a | bs]
            return ((ka & ~u) != 0) & ((core[bs] & ~u) != 0)
    else:
        test = lambda a, ka, bs: ((core[a & bs] & ~ka) != 0) & ((ka & bs) != 0)
    return ch.pairwise(which.value, test)


# ============================================================
# 朴素二元组饱和（独立预言机）
# ============================================================

def pairset_closure_oracle(kb: KnowledgeBase, system: System) -> FrozenSet[Tuple[int, int]]:
    """
    在 2^U × 2^U 上按字面规则朴素饱和

    与 close() 完全独立：不使用核表示，Loop 为单结论形式。
    """
    u = kb.universe
    limit = int(get_config().get("limits.oracle_max_worlds", 4))
    if u.size > limit:
        raise ScaleLimitError("oracle universe size", u.size, limit)

    n = 1 << u.size
    full = u.full
    sets = np.arange(n, dtype=np.int64)
    subset = (sets[:, None] & ~sets[None, :]) == 0        # subset[B, B'] : B ⊆ B'
    meet = sets[:, None] & sets[None, :]
    comp = full & ~sets

    r = np.zeros((n, n), dtype=bool)
    r[sets, sets] = True
    for pair in kb.pairs():
        r[pair.antecedent, pair.consequent] = True

    rules = set(system.rules)
    while True:
        before = r.copy()
        # RW
        r = (r.astype(np.int32) @ subset.astype(np.int32)) > 0
        # And
        for a in range(n):
            bs = np.flatnonzero(r[a])
            r[a, meet[np.ix_(bs, bs)].ravel()] = True
        # Cut: R(A∩B, X), R(A, B) ⇒ R(A, X)
        for a in range(n):
            for b in np.flatnonzero(r[a]).tolist():
                r[a] |= r[a & b]
        # CM: R(A, B), R(A, X) ⇒ R(A∩B, X)
        for a in range(n):
            for b in np.flatnonzero(r[a]).tolist():
                r[a & b] |= r[a]
        if Rule.LOOP in rules:
            # R(X, Y) 且 Y 经路径到达 X ⇒ R(Y, X)
            r |= r.T & transitive_matrix(r)
        if Rule.OR in rules:
            for a in range(n):
                for b in range(n):
                    r[a | b] |= r[a] & r[b]
        if Rule.MONOTONICITY in rules:
            for a in range(n):
                for b in sets[subset[a]].tolist():
                    r[a] |= r[b]
        if Rule.CONTRAPOSITION in rules:
            r |= r[np.ix_(comp, comp)].T
        if np.array_equal(r, before):
            break

    rows, cols = np.nonzero(r)
    return frozenset(zip(rows.tolist(), cols.tolist()))
