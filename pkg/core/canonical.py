#!/usr/bin/env python3
"""
Canonical Models 🏛️ - 由闭包映射构造规范模型并验证表示

五种构造：
- 累积     状态 = 等价类 [A]，标签 = 正常世界 C(A)，[A] ≺ [B] 当且仅当 [A] ≤ [B] 且不同
- 有序累积 同上，≺ 取传递闭包（出现自反即映射不满足 Loop）
- 优先     状态 = (w, A)，w ∈ C(A)；(w,A) ≺ (v,B) 当且仅当 A ⊑ B 且 w ∉ B
- 简单累积 状态 = C(A) ≠ ∅ 的前件 A，标签 C(A)，≺ 为空
- 简单优先 状态 = 对所有 A ∋ w 都有 w ∈ C(A) 的世界 w，≺ 为空

对 C 闭合的映射，A ~ A' 当且仅当 C(A) = C(A')，所以等价类按核值分组，
代表元取核本身（它是类中的最小前件）。
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .closure import (
    CheckResult, ConsequenceMap, System, Violation, hex_mask, satisfies_system,
)
from .config import get_config
from .errors import NotClosedError, ScaleLimitError
from .formula import WorldSet
from .graphs import shortest_path, transitive_matrix
from .models import (
    FLAVOR_OF_SYSTEM, Flavor, Model, relation_of_model, render_model, validate,
)

logger = logging.getLogger(__name__)


@dataclass
class EquivClass:
    """~ 等价类：core 为共同的核，也是代表元"""
    core: WorldSet
    members: np.ndarray = field(repr=False)

    @property
    def representative(self) -> WorldSet:
        return self.core


def normal_worlds(cmap: ConsequenceMap, a: WorldSet) -> WorldSet:
    """满足 A 的全部后件的世界；有限宇宙中恰为 C(A)"""
    return cmap[a]


def _require(cmap: ConsequenceMap, system: System):
    result = satisfies_system(cmap, system)
    if not result.ok:
        raise NotClosedError(system.value, result.violation)


def _full_verify_limit() -> int:
    return int(get_config().get("limits.full_verify_max_worlds", 8))


def _require_small(cmap: ConsequenceMap, what: str):
    limit = _full_verify_limit()
    if cmap.universe.size > limit:
        raise ScaleLimitError(what, cmap.universe.size, limit)


# ============================================================
# 等价类、类序与普通性
# ============================================================

def equivalence_classes(cmap: ConsequenceMap) -> List[EquivClass]:
    """按核值分组（按核升序）"""
    values, inverse = np.unique(cmap.core, return_inverse=True)
    return [
        EquivClass(int(v), np.flatnonzero(inverse == i))
        for i, v in enumerate(values.tolist())
    ]


def class_order(cmap: ConsequenceMap) -> np.ndarray:
    """L[a, b] 为真当且仅当 [a] ≤ [b]，即 [a] 中某个成员包含 C(b)"""
    values, inverse = np.unique(cmap.core, return_inverse=True)
    k = len(values)
    everything = np.arange(cmap.count, dtype=np.int64)
    order = np.zeros((k, k), dtype=bool)
    for b, kb in enumerate(values.tolist()):
        containing = (kb & ~everything) == 0
        order[np.unique(inverse[containing]), b] = True
    return order


def class_order_is_antisymmetric(cmap: ConsequenceMap) -> CheckResult:
    values = np.unique(cmap.core)
    order = class_order(cmap)
    both = order & order.T
    np.fill_diagonal(both, False)
    hits = np.argwhere(both)
    if len(hits):
        a, b = hits[0].tolist()
        return CheckResult(False, "ClassOrderAntisymmetry",
                           Violation("ClassOrderAntisymmetry", (int(values[a]), int(values[b]))))
    return CheckResult(True, "ClassOrderAntisymmetry")


def ordinarity(cmap: ConsequenceMap, a: WorldSet, b: WorldSet) -> bool:
    """A ⊑ B：C(A ∪ B) ⊆ A"""
    return cmap.holds(a | b, a)


def ordinarity_matrix(cmap: ConsequenceMap) -> np.ndarray:
    """O[A, B] = C(A ∪ B) ⊆ A（仅限小宇宙）"""
    _require_small(cmap, "ordinarity matrix")
    sets = np.arange(cmap.count, dtype=np.int64)
    joined = cmap.core[sets[:, None] | sets[None, :]]
    return (joined & ~sets[:, None]) == 0


def ordinarity_is_transitive(cmap: ConsequenceMap) -> CheckResult:
    o = ordinarity_matrix(cmap)
    of = o.astype(np.float32)
    broken = ((of @ of) > 0) & ~o
    hits = np.argwhere(broken)
    if len(hits):
        a, c = hits[0].tolist()
        b = int(np.flatnonzero(o[a] & o[:, c])[0])
        return CheckResult(False, "OrdinarityTransitivity",
                           Violation("OrdinarityTransitivity", (a, b, c), "A ⊑ B ⊑ C but not A ⊑ C"))
    return CheckResult(True, "OrdinarityTransitivity")


def normal_world_upgrade_holds(cmap: ConsequenceMap) -> CheckResult:
    """A ⊑ B 且 w ∈ C(A) ∩ B 时 w ∈ C(B)"""
    o = ordinarity_matrix(cmap)
    sets = np.arange(cmap.count, dtype=np.int64)
    core = cmap.core
    lost = (core[:, None] & sets[None, :] & ~core[None, :]) != 0
    hits = np.argwhere(o & lost)
    if len(hits):
        a, b = hits[0].tolist()
        return CheckResult(False, "NormalWorldUpgrade",
                           Violation("NormalWorldUpgrade", (a, b), "w ∈ C(A) ∩ B but w ∉ C(B)"))
    return CheckResult(True, "NormalWorldUpgrade")


# ============================================================
# 构造
# ============================================================

def _class_model(cmap: ConsequenceMap, order: np.ndarray, flavor: Flavor) -> Model:
    values = np.unique(cmap.core).tolist()
    names = tuple(hex_mask(v, cmap.universe) for v in values)
    return Model(cmap.universe, names, tuple(values), order, flavor, lax=True)


def canonical_cumulative(cmap: ConsequenceMap) -> Model:
    """等价类上的强累积模型"""
    _require(cmap, System.C)
    order = class_order(cmap)
    np.fill_diagonal(order, False)
    model = _class_model(cmap, order, Flavor.CUMULATIVE)
    logger.debug(f"[Canonical] 累积模型：{len(model)} 个类")
    return model


def canonical_ordered(cmap: ConsequenceMap) -> Model:
    """≺ 取传递闭包；闭包自反时报告环"""
    _require(cmap, System.CL)
    strict = class_order(cmap)
    np.fill_diagonal(strict, False)
    closed = transitive_matrix(strict)
    looped = np.flatnonzero(np.diag(closed))
    if len(looped):
        values = np.unique(cmap.core).tolist()
        start = int(looped[0])
        succ = lambda i: np.flatnonzero(strict[i]).tolist()
        back = next(j for j in succ(start) if closed[j, start] or j == start)
        cycle = [start] + (shortest_path(back, start, succ) or [back])
        raise NotClosedError("CL", "class order cycle " + " < ".join(
            hex_mask(values[i], cmap.universe) for i in cycle))
    return _class_model(cmap, closed, Flavor.CUMULATIVE_ORDERED)


def preferential_state_name(w: int, a: WorldSet, cmap: ConsequenceMap) -> str:
    return f"w{w:02d}@{hex_mask(a, cmap.universe)}"


def canonical_preferential(cmap: ConsequenceMap) -> Model:
    """状态 (w, A)，w ∈ C(A)；标签 {w}"""
    _require(cmap, System.P)
    _require_small(cmap, "preferential canonical model")
    n = cmap.universe.size
    normal = ((cmap.core[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)
    sa, sw = np.nonzero(normal)
    sa = sa.astype(np.int64)
    sw = sw.astype(np.int64)

    o = ordinarity_matrix(cmap)
    outside = ((sa[None, :] >> sw[:, None]) & 1) == 0
    order = o[np.ix_(sa, sa)] & outside

    names = tuple(preferential_state_name(int(w), int(a), cmap) for a, w in zip(sa.tolist(), sw.tolist()))
    labels = tuple((1 << int(w)) for w in sw.tolist())
    logger.debug(f"[Canonical] 优先模型：{len(names)} 个状态，{int(order.sum())} 条偏好")
    return Model(cmap.universe, names, labels, order, Flavor.PREFERENTIAL)


def canonical_simple_cumulative(cmap: ConsequenceMap) -> Model:
    _require(cmap, System.CM)
    _require_small(cmap, "simple cumulative canonical model")
    keep = np.flatnonzero(cmap.core != 0)
    names = tuple(hex_mask(int(a), cmap.universe) for a in keep.tolist())
    labels = tuple(int(c) for c in cmap.core[keep].tolist())
    empty = np.zeros((len(names), len(names)), dtype=bool)
    return Model(cmap.universe, names, labels, empty, Flavor.SIMPLE_CUMULATIVE)


def simple_preferential_worlds(cmap: ConsequenceMap) -> WorldSet:
    """对每个 A ∋ w 都有 w ∈ C(A) 的世界"""
    sets = np.arange(cmap.count, dtype=np.int64)
    abnormal = int(np.bitwise_or.reduce(sets & ~cmap.core)) if cmap.count else 0
    return cmap.full & ~abnormal


def canonical_simple_preferential(cmap: ConsequenceMap) -> Model:
    _require(cmap, System.M)
    worlds = simple_preferential_worlds(cmap)
    ks = [k for k in range(cmap.universe.size) if (worlds >> k) & 1]
    empty = np.zeros((len(ks), len(ks)), dtype=bool)
    return Model(cmap.universe, tuple(f"w{k:02d}" for k in ks), tuple(1 << k for k in ks),
                 empty, Flavor.SIMPLE_PREFERENTIAL)


CANONICAL_BUILDERS: Dict[System, Callable[[ConsequenceMap], Model]] = {
    System.C: canonical_cumulative,
    System.CL: canonical_ordered,
    System.P: canonical_preferential,
    System.CM: canonical_simple_cumulative,
    System.M: canonical_simple_preferential,
}


def canonical_model(cmap: ConsequenceMap, system: System) -> Model:
    return CANONICAL_BUILDERS[system](cmap)


def render_canonical(model: Model, cmap: ConsequenceMap) -> str:
    """模型文本 + 类成员注释块（仅按类构造的模型）"""
    text = render_model(model)
    if model.flavor not in (Flavor.CUMULATIVE, Flavor.CUMULATIVE_ORDERED):
        return text
    lines = ["# class members:"]
    for cls in equivalence_classes(cmap):
        members = " ".join(hex_mask(int(a), cmap.universe) for a in cls.members.tolist())
        lines.append(f"#   {hex_mask(cls.core, cmap.universe)}: {members}")
    return text + "\n".join(lines) + "\n"


# ============================================================
# 表示验证
# ============================================================

@dataclass
class RepresentationReport:
    system: System
    problems: List[str] = field(default_factory=list)
    sampled: bool = False
    checked: int = 0
    model: Optional[Model] = None

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> Dict:
        return {
            "system": self.system.value,
            "ok": self.ok,
            "sampled": self.sampled,
            "checked_antecedents": self.checked,
            "states": len(self.model) if self.model is not None else None,
            "problems": list(self.problems),
        }


def _class_minimum_holds(cmap: ConsequenceMap, a: int, inverse: np.ndarray,
                         values: np.ndarray, sets: np.ndarray) -> bool:
    """[A] 是 hat(A) 的最小元：[A] ≤ hat 中每个类，且没有其他 hat 类 ≤ [A]"""
    ka = int(cmap.core[a])
    own = int(inverse[a])
    hat_idx = np.flatnonzero((values & ~a) == 0)
    below = np.intersect1d(np.unique(inverse[(ka & ~sets) == 0]), hat_idx)
    if np.any(below != own):
        return False
    members = sets[inverse == own]
    hat_values = values[hat_idx]
    for start in range(0, len(hat_values), 512):
        block = hat_values[start:start + 512]
        if not ((block[:, None] & ~members[None, :]) == 0).any(axis=1).all():
            return False
    return True


def _model_core(cmap: ConsequenceMap, system: System, a: int, simple_worlds: int) -> int:
    """规范模型在前件 A 处定义的核（不显式构造模型；C/CL 由最小元性质给出）"""
    core = cmap.core
    sets = np.arange(cmap.count, dtype=np.int64)
    if system == System.P:
        ordinary = (core[a | sets] & ~sets) == 0
        return int(np.bitwise_or.reduce(core[ordinary] & a)) if ordinary.any() else 0
    if system == System.CM:
        inside = core[(core & ~a) == 0]
        return int(np.bitwise_or.reduce(inside)) if len(inside) else 0
    return a & simple_worlds


def _spot_check(cmap: ConsequenceMap, system: System, report: RepresentationReport):
    cfg = get_config()
    rng = np.random.default_rng(int(cfg.get("checks.seed", 0)))
    size = min(cmap.count, int(cfg.get("checks.sample_antecedents", 256)))
    antecedents = np.sort(rng.choice(cmap.count, size=size, replace=False)).tolist()
    values, inverse = np.unique(cmap.core, return_inverse=True)
    sets = np.arange(cmap.count, dtype=np.int64)
    simple_worlds = simple_preferential_worlds(cmap) if system == System.M else 0
    u = cmap.universe

    report.sampled = True
    for a in antecedents:
        report.checked += 1
        if system in (System.C, System.CL):
            if not _class_minimum_holds(cmap, a, inverse, values, sets):
                report.problems.append(f"antecedent {hex_mask(a, u)}: its class is not the minimum of its hat")
                return
            continue
        got = _model_core(cmap, system, a, simple_worlds)
        if got != cmap[a]:
            report.problems.append(
                f"antecedent {hex_mask(a, u)}: model core {hex_mask(got, u)} != {hex_mask(cmap[a], u)}"
            )
            return


def verify_representation(cmap: ConsequenceMap, system: System) -> RepresentationReport:
    """
    构造 system 对应的规范模型，校验其风味，并确认它定义的关系就是输入映射

    小宇宙完整验证；超出 limits.full_verify_max_worlds 时对抽样前件做抽查。
    """
    report = RepresentationReport(system)
    closed = satisfies_system(cmap, system)
    if not closed.ok:
        report.problems.append(f"map is not {system.value}-closed: {closed.violation}")
        return report

    if cmap.universe.size > _full_verify_limit():
        _spot_check(cmap, system, report)
        logger.info(f"[Canonical] {system.value} 抽查 {report.checked} 个前件："
                    f"{'通过' if report.ok else '失败'}")
        return report

    try:
        model = canonical_model(cmap, system)
    except NotClosedError as e:
        report.problems.append(e.message)
        return report
    report.model = model

    flavor = FLAVOR_OF_SYSTEM[system]
    validation = validate(model, flavor)
    report.problems.extend(f"{flavor.value}: {p}" for p in validation.problems)
    if system == System.C and validation.strong_cumulative is False:
        report.problems.append("canonical cumulative model is not strong cumulative")

    defined = relation_of_model(model)
    report.checked = cmap.count
    diff = np.flatnonzero(defined.core != cmap.core)
    if len(diff):
        a = int(diff[0])
        report.problems.append(
            f"antecedent {hex_mask(a, cmap.universe)}: model core "
            f"{hex_mask(defined[a], cmap.universe)} != {hex_mask(cmap[a], cmap.universe)}"
        )
    return report
