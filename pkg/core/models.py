#!/usr/bin/env python3
"""
Models 🧩 - 五种模型及其定义的后件关系

模型 = 状态集合 + 标签（每个状态一个世界集）+ 偏好关系 ≺。
α̂ 是所有标签都满足 α 的状态；α |~ β 当且仅当 α̂ 的每个极小状态都满足 β。

核心功能:
1. hat / minimal_states / minimum_of
2. 光滑性检查与风味校验（含强累积报告）
3. 模型定义的后件核映射（numpy 向量化）
4. Horn 投影、固定样例、随机模型
5. 模型文本格式读写
"""

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .closure import ConsequenceMap, System, lattice_cap, require_lattice
from .errors import (
    FormulaSyntaxError, ModelSyntaxError, PreconditionError, UnknownAtomError,
)
from .formula import (
    FALSE, TRUE, Universe, WorldSet, check_atoms, dnf_formula, make_universe,
    mask_from_bools, parse_formula, popcount, render_formula, worlds_of,
)
from .graphs import transitive_closure

logger = logging.getLogger(__name__)

STATE_NAME_RE = re.compile(r"[A-Za-z0-9_@\-]+")

# 按前件分块计算，限制 (块 × 状态数) 矩阵的内存
_CHUNK = 4096


class Flavor(Enum):
    CUMULATIVE = "Cumulative"
    CUMULATIVE_ORDERED = "CumulativeOrdered"
    PREFERENTIAL = "Preferential"
    SIMPLE_CUMULATIVE = "SimpleCumulative"
    SIMPLE_PREFERENTIAL = "SimplePreferential"

    @property
    def ordered(self) -> bool:
        """≺ 必须是严格偏序"""
        return self in (Flavor.CUMULATIVE_ORDERED, Flavor.PREFERENTIAL)

    @property
    def singleton_labels(self) -> bool:
        return self in (Flavor.PREFERENTIAL, Flavor.SIMPLE_PREFERENTIAL)

    @property
    def simple(self) -> bool:
        return self in (Flavor.SIMPLE_CUMULATIVE, Flavor.SIMPLE_PREFERENTIAL)

    @classmethod
    def parse(cls, name: str) -> "Flavor":
        for flavor in cls:
            if flavor.value.lower() == name.strip().lower():
                return flavor
        raise ValueError(f"unknown flavor {name!r}")


FLAVOR_OF_SYSTEM = {
    System.C: Flavor.CUMULATIVE,
    System.CL: Flavor.CUMULATIVE_ORDERED,
    System.P: Flavor.PREFERENTIAL,
    System.CM: Flavor.SIMPLE_CUMULATIVE,
    System.M: Flavor.SIMPLE_PREFERENTIAL,
}


@dataclass(frozen=True, eq=False)
class Model:
    """
    有限模型（构造后不可变）

    order[i, j] 为真表示 states[i] ≺ states[j]；pref 是同一关系的名字对形式。
    lax=True 时允许空标签，空标签的状态空虚地满足任何公式，因此属于每个 hat。
    """
    universe: Universe
    states: Tuple[str, ...]
    labels: Tuple[WorldSet, ...]
    order: np.ndarray = field(repr=False)
    flavor: Flavor = Flavor.CUMULATIVE
    lax: bool = False

    def __eq__(self, other) -> bool:
        if not isinstance(other, Model):
            return NotImplemented
        return (
            self.universe == other.universe
            and self.states == other.states
            and self.labels == other.labels
            and np.array_equal(self.order, other.order)
            and self.flavor == other.flavor
            and self.lax == other.lax
        )

    def __hash__(self) -> int:
        return hash((self.states, self.labels, self.flavor))

    @cached_property
    def index(self) -> Dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def label_array(self) -> np.ndarray:
        return np.array(self.labels, dtype=np.int64)

    @property
    def pref_matrix(self) -> np.ndarray:
        return self.order

    @cached_property
    def pref(self) -> FrozenSet[Tuple[str, str]]:
        """{(s, t) : s ≺ t}"""
        return frozenset((self.states[i], self.states[j]) for i, j in np.argwhere(self.order).tolist())

    def precedes(self, s: str, t: str) -> bool:
        return bool(self.order[self.index[s], self.index[t]])

    def label(self, state: str) -> WorldSet:
        return self.labels[self.index[state]]

    def with_flavor(self, flavor: Flavor) -> "Model":
        return Model(self.universe, self.states, self.labels, self.order, flavor, self.lax)

    def __len__(self) -> int:
        return len(self.states)


def order_matrix(k: int, pairs: Iterable[Tuple[int, int]]) -> np.ndarray:
    mat = np.zeros((k, k), dtype=bool)
    for i, j in pairs:
        mat[i, j] = True
    return mat


def make_model(universe: Universe, labels: Dict[str, WorldSet], pref: Iterable[Tuple[str, str]],
               flavor: Flavor, lax: bool = False) -> Model:
    """按字典顺序（插入顺序）构造模型"""
    index = {s: i for i, s in enumerate(labels)}
    order = order_matrix(len(labels), ((index[s], index[t]) for s, t in pref))
    return Model(universe, tuple(labels), tuple(labels.values()), order, flavor, lax)


# ============================================================
# hat 与极小状态
# ============================================================

def hat(m: Model, a: WorldSet) -> FrozenSet[str]:
    """{s : l(s) ⊆ A}"""
    return frozenset(s for s, lab in zip(m.states, m.labels) if lab & ~a == 0)


def minimal_states(m: Model, ss: Iterable[str]) -> FrozenSet[str]:
    """{t ∈ ss : 不存在 s ∈ ss 使 s ≺ t}"""
    ss = frozenset(ss)
    idx = [m.index[s] for s in ss]
    below = m.order[np.ix_(idx, idx)].any(axis=0) if idx else np.zeros(0, dtype=bool)
    return frozenset(m.states[i] for i, b in zip(idx, below.tolist()) if not b)


def minimum_of(m: Model, ss: Iterable[str]) -> Optional[str]:
    """ss 的最小元（对其余每个元素都 ≺），不存在时返回 None"""
    ss = frozenset(ss)
    for s in sorted(ss):
        if all(m.precedes(s, t) for t in ss if t != s):
            return s
    return None


def _hat_matrix(m: Model, antecedents: np.ndarray) -> np.ndarray:
    """H[i, j]：状态 j 属于 hat(antecedents[i])"""
    return (m.label_array[None, :] & ~antecedents[:, None]) == 0


def _minimal_matrix(h: np.ndarray, pref: np.ndarray) -> np.ndarray:
    """极小状态：在 hat 中，且 hat 中没有状态 ≺ 它"""
    below = (h.astype(np.float32) @ pref.astype(np.float32)) > 0
    return h & ~below


def _antecedent_chunks(u: Universe):
    total = 1 << u.size
    for start in range(0, total, _CHUNK):
        yield np.arange(start, min(total, start + _CHUNK), dtype=np.int64)


def is_strict_partial_order(m: Model) -> bool:
    p = m.pref_matrix
    if np.any(np.diag(p)):
        return False
    two_step = (p.astype(np.float32) @ p.astype(np.float32)) > 0
    return not bool(np.any(two_step & ~p))


@dataclass
class SmoothnessResult:
    ok: bool
    antecedent: Optional[WorldSet] = None
    state: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


def is_smooth(m: Model) -> SmoothnessResult:
    """
    对每个 A ⊆ U：hat(A) 中每个状态要么极小，要么有极小状态 ≺ 它

    只检查 hat 可定义的状态集。严格偏序在有限集上总是光滑的，此时不必枚举。
    """
    if not m.states or not m.order.any():
        return SmoothnessResult(True)
    if is_strict_partial_order(m):
        return SmoothnessResult(True)
    require_lattice(m.universe)

    pref = m.pref_matrix
    pf = pref.astype(np.float32)
    for chunk in _antecedent_chunks(m.universe):
        h = _hat_matrix(m, chunk)
        minimal = _minimal_matrix(h, pref)
        covered = minimal | ((minimal.astype(np.float32) @ pf) > 0)
        bad = h & ~covered
        rows = np.flatnonzero(bad.any(axis=1))
        if len(rows):
            r = int(rows[0])
            t = m.states[int(np.flatnonzero(bad[r])[0])]
            return SmoothnessResult(False, int(chunk[r]), t)
    return SmoothnessResult(True)


def has_minimum_everywhere(m: Model) -> SmoothnessResult:
    """每个非空的可定义 hat 都有最小元（失败时给出见证）"""
    require_lattice(m.universe)
    if not m.states:
        return SmoothnessResult(True)
    pref = m.pref_matrix.astype(np.float32)
    for chunk in _antecedent_chunks(m.universe):
        h = _hat_matrix(m, chunk)
        size = h.sum(axis=1)
        below_count = h.astype(np.float32) @ pref.T  # [A, s] = |{t ∈ hat : s ≺ t}|
        is_min = h & (below_count == (size - 1)[:, None])
        bad = (size > 0) & ~is_min.any(axis=1)
        rows = np.flatnonzero(bad)
        if len(rows):
            return SmoothnessResult(False, int(chunk[int(rows[0])]))
    return SmoothnessResult(True)


# ============================================================
# 校验
# ============================================================

@dataclass
class ValidationReport:
    """风味校验报告；problems 为空即有效"""
    flavor: Flavor
    problems: List[str] = field(default_factory=list)
    smooth: Optional[SmoothnessResult] = None
    strong_cumulative: Optional[bool] = None

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> Dict:
        return {
            "flavor": self.flavor.value,
            "valid": self.ok,
            "problems": list(self.problems),
            "strong_cumulative": self.strong_cumulative,
        }


def validate(m: Model, flavor: Optional[Flavor] = None) -> ValidationReport:
    """检查模型是否满足 flavor（默认为模型自身风味）的全部约束"""
    flavor = flavor or m.flavor
    report = ValidationReport(flavor)
    problems = report.problems

    if len(set(m.states)) != len(m.states):
        problems.append("duplicate state names")
    if m.order.shape != (len(m.states), len(m.states)):
        problems.append("order matrix does not match the state count")
    if problems:
        return report

    for s, lab in zip(m.states, m.labels):
        if lab & ~m.universe.full:
            problems.append(f"label of {s} outside the universe")
        elif lab == 0 and not m.lax:
            problems.append(f"label of {s} is empty")
        elif flavor.singleton_labels and popcount(lab) != 1:
            problems.append(f"label of {s} is not a single world")

    p = m.pref_matrix
    if flavor.simple and m.order.any():
        problems.append("pref must be empty")
    if flavor.ordered:
        loops = np.flatnonzero(np.diag(p))
        if len(loops):
            problems.append(f"pref not irreflexive at {m.states[int(loops[0])]}")
        elif not is_strict_partial_order(m):
            problems.append("pref not transitive")

    if m.universe.size <= lattice_cap():
        report.smooth = is_smooth(m)
        if not report.smooth:
            problems.append(
                f"not smooth: state {report.smooth.state} in hat of "
                f"{m.universe.describe(report.smooth.antecedent)}"
            )
        asymmetric = not bool(np.any(p & p.T))
        report.strong_cumulative = asymmetric and has_minimum_everywhere(m).ok
    elif is_strict_partial_order(m):
        report.smooth = SmoothnessResult(True)
    else:
        problems.append("smoothness undecided: universe above the lattice limit")

    if problems:
        logger.debug(f"[Models] {flavor.value} 校验失败: {problems}")
    return report


# ============================================================
# 后件关系
# ============================================================

def consequence_core_of_model(m: Model, a: WorldSet) -> WorldSet:
    """hat(A) 极小状态的标签并集"""
    core = 0
    for s in minimal_states(m, hat(m, a)):
        core |= m.label(s)
    return core


def relation_of_model(m: Model) -> ConsequenceMap:
    """模型定义的关系，表示为后件核映射"""
    u = m.universe
    require_lattice(u)
    core = np.zeros(1 << u.size, dtype=np.int64)
    if not m.states:
        return ConsequenceMap(u, core)
    labels = m.label_array
    pref = m.pref_matrix
    for chunk in _antecedent_chunks(u):
        minimal = _minimal_matrix(_hat_matrix(m, chunk), pref)
        core[chunk] = np.bitwise_or.reduce(np.where(minimal, labels[None, :], 0), axis=1)
    return ConsequenceMap(u, core)


def model_satisfies(m: Model, a: WorldSet, b: WorldSet) -> bool:
    return consequence_core_of_model(m, a) & ~b == 0


# ============================================================
# Horn 投影
# ============================================================

def horn_projection(m: Model) -> Model:
    """
    每个状态改标为单个世界：p 为真当且仅当 l(s) 的每个世界都满足 p

    对原子合取 A，hat(A) 保持不变，因此所有 Horn 断言的真假不变。
    """
    if m.flavor not in (Flavor.CUMULATIVE_ORDERED, Flavor.PREFERENTIAL):
        raise PreconditionError(f"horn projection needs an ordered model, got {m.flavor.value}")
    if m.universe.constraints:
        raise PreconditionError("horn projection needs an unconstrained universe")
    report = validate(m)
    if not report:
        raise PreconditionError(f"horn projection of an invalid model: {report.problems[0]}")
    if any(lab == 0 for lab in m.labels):
        raise PreconditionError("horn projection needs non-empty labels")

    u = m.universe
    new_labels = []
    for lab in m.labels:
        world = (1 << len(u.vars)) - 1
        for wid in u.world_ids(lab):
            world &= wid
        new_labels.append(u.mask_of([world]))
    return Model(u, m.states, tuple(new_labels), m.order, Flavor.PREFERENTIAL)


# ============================================================
# 固定样例
# ============================================================

def _loop_counterexample() -> Model:
    u = make_universe(["p0", "p1", "p2"])
    p = [parse_formula(v) for v in u.vars]
    labels = {"s-1": worlds_of(parse_formula("(p0 & p1) | (p1 & p2) | (p2 & p0)"), u)}
    for i in range(3):
        labels[f"s{i}"] = worlds_of(p[i], u) & worlds_of(p[(i + 1) % 3], u)
    pref = [("s-1", f"s{i}") for i in range(3)]
    pref += [(f"s{(i + 1) % 3}", f"s{i}") for i in range(3)]
    return make_model(u, labels, pref, Flavor.CUMULATIVE)


def _shoham_counterexample() -> Model:
    u = make_universe(["p", "q"])

    def world(p: bool, q: bool) -> WorldSet:
        return u.mask_of([u.world_of({"p": p, "q": q})])

    labels = {
        "s0": world(True, False),
        "s1": world(False, False),
        "s2": world(True, True),
        "s3": world(True, True),
    }
    return make_model(u, labels, [("s0", "s2"), ("s1", "s3")], Flavor.PREFERENTIAL)


def _single_chain() -> Model:
    u = make_universe(["p"])
    w = u.mask_of([1])
    return make_model(u, {"a": w, "b": w}, [("a", "b")], Flavor.PREFERENTIAL)


FIXTURES = {
    "loop_counterexample": _loop_counterexample,
    "shoham_counterexample": _shoham_counterexample,
    "single_chain": _single_chain,
}


def fixture(name: str) -> Model:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise ValueError(f"unknown fixture {name!r} (expected one of {sorted(FIXTURES)})") from None


# ============================================================
# 随机模型
# ============================================================

def _random_order(k: int, density: float, rng: np.random.Generator) -> List[Tuple[int, int]]:
    """随机 DAG（按随机排列定向）的传递闭包"""
    perm = rng.permutation(k).tolist()
    edges = [
        (perm[i], perm[j])
        for i in range(k) for j in range(i + 1, k)
        if rng.random() < density
    ]
    return transitive_closure(edges)


def _random_asymmetric(k: int, density: float, rng: np.random.Generator) -> List[Tuple[int, int]]:
    pairs = []
    for i in range(k):
        for j in range(i + 1, k):
            if rng.random() < density:
                pairs.append((i, j) if rng.random() < 0.5 else (j, i))
    return pairs


def random_model(flavor: Flavor, universe: Universe, state_count: int,
                 density: float = 0.3, seed: int = 0, attempts: int = 50) -> Model:
    """
    随机生成满足 flavor 的模型（同一种子结果相同）

    有序风味取随机严格偏序；Cumulative 取随机非对称关系并拒绝不光滑的抽样，
    多次失败后退回严格偏序。
    """
    if state_count < 0:
        raise PreconditionError("state_count must be non-negative")
    if state_count and universe.size == 0:
        raise PreconditionError("cannot label states in an empty universe")

    rng = np.random.default_rng(seed)
    n = universe.size
    names = tuple(f"s{i}" for i in range(state_count))

    labels = []
    for _ in range(state_count):
        if flavor.singleton_labels:
            labels.append(1 << int(rng.integers(n)))
        else:
            lab = 0
            while lab == 0:
                lab = mask_from_bools(rng.random(n) < 0.5)
            labels.append(lab)
    labels = tuple(labels)

    def build(pairs) -> Model:
        return Model(universe, names, labels, order_matrix(state_count, pairs), flavor)

    if flavor.simple or state_count < 2:
        return build([])
    if flavor.ordered:
        return build(_random_order(state_count, density, rng))

    if n <= lattice_cap():
        for attempt in range(attempts):
            candidate = build(_random_asymmetric(state_count, density, rng))
            if is_smooth(candidate):
                return candidate
        logger.debug(f"[Models] {attempts} 次抽样均不光滑，改用严格偏序")
    return build(_random_order(state_count, density, rng))


# ============================================================
# 文本格式
# ============================================================

def _label_text(lab: WorldSet, u: Universe) -> str:
    if lab == 0:
        return render_formula(FALSE)
    if lab == u.full:
        return render_formula(TRUE)
    return render_formula(dnf_formula(lab, u))


def render_model(m: Model) -> str:
    """模型 -> 文本；parse_model(render_model(m)) == m"""
    u = m.universe
    lines = [f"flavor: {m.flavor.value}"]
    if m.lax:
        lines.append("mode: lax")
    lines.append(f"vars: {' '.join(u.vars)}")
    lines += [f"constraint: {render_formula(c)}" for c in u.constraints]
    lines += [f"state {s} : {_label_text(lab, u)}" for s, lab in zip(m.states, m.labels)]
    for i, j in np.argwhere(m.order).tolist():
        lines.append(f"pref {m.states[i]} < {m.states[j]}")
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> Model:
    """解析模型文本（flavor / mode / vars / constraint / state / pref）"""
    flavor: Optional[Flavor] = None
    lax = False
    vars_line: Optional[Tuple[int, List[str]]] = None
    constraint_lines: List[Tuple[int, str]] = []
    state_lines: List[Tuple[int, str, str]] = []
    pref_lines: List[Tuple[int, str, str]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split(None, 1)[0]
        if head == "state":
            body = line[len("state"):]
            if ":" not in body:
                raise ModelSyntaxError("expected 'state NAME : FORMULA'", lineno)
            name, formula = (part.strip() for part in body.split(":", 1))
            if not STATE_NAME_RE.fullmatch(name):
                raise ModelSyntaxError(f"invalid state name {name!r}", lineno)
            state_lines.append((lineno, name, formula))
        elif head == "pref":
            parts = line[len("pref"):].split("<")
            if len(parts) != 2 or not all(p.strip() for p in parts):
                raise ModelSyntaxError("expected 'pref NAME < NAME'", lineno)
            pref_lines.append((lineno, parts[0].strip(), parts[1].strip()))
        elif ":" in line:
            key, value = (part.strip() for part in line.split(":", 1))
            if key == "flavor":
                try:
                    flavor = Flavor.parse(value)
                except ValueError as e:
                    raise ModelSyntaxError(str(e), lineno) from e
            elif key == "mode":
                if value not in ("lax", "strict"):
                    raise ModelSyntaxError(f"unknown mode {value!r}", lineno)
                lax = value == "lax"
            elif key == "vars":
                if vars_line is not None:
                    raise ModelSyntaxError("duplicate 'vars:' line", lineno)
                vars_line = (lineno, value.split())
            elif key == "constraint":
                constraint_lines.append((lineno, value))
            else:
                raise ModelSyntaxError(f"unknown key {key!r}", lineno)
        else:
            raise ModelSyntaxError(f"cannot parse {line!r}", lineno)

    if flavor is None:
        raise ModelSyntaxError("missing 'flavor:' line", 1)
    if vars_line is None:
        raise ModelSyntaxError("missing 'vars:' line", 1)
    names = vars_line[1]

    constraints = []
    for lineno, value in constraint_lines:
        constraints.append(_parse_checked(value, names, lineno))
    try:
        u = make_universe(names, constraints)
    except ValueError as e:
        raise ModelSyntaxError(str(e), vars_line[0]) from e

    labels: Dict[str, WorldSet] = {}
    for lineno, name, formula in state_lines:
        if name in labels:
            raise ModelSyntaxError(f"duplicate state {name!r}", lineno)
        lab = worlds_of(_parse_checked(formula, names, lineno), u)
        if lab == 0 and not lax:
            raise ModelSyntaxError(f"state {name} has an empty label (use 'mode: lax')", lineno)
        if flavor.singleton_labels and popcount(lab) != 1:
            raise ModelSyntaxError(f"state {name} must be labeled by a single world", lineno)
        labels[name] = lab

    pref = []
    for lineno, s, t in pref_lines:
        for name in (s, t):
            if name not in labels:
                raise ModelSyntaxError(f"unknown state {name!r}", lineno)
        pref.append((s, t))

    model = make_model(u, labels, pref, flavor, lax)
    logger.debug(f"[Models] 读取 {flavor.value} 模型：{len(labels)} 个状态，{len(pref)} 条偏好")
    return model


def _parse_checked(text: str, names: Sequence[str], lineno: int):
    try:
        f = parse_formula(text)
        check_atoms(f, names)
        return f
    except (FormulaSyntaxError, UnknownAtomError) as e:
        raise ModelSyntaxError(e.message, lineno) from e


def load_model(path) -> Model:
    return parse_model(Path(path).read_text(encoding="utf-8"))
