#!/usr/bin/env python3
"""
Knowledge Base - 条件断言与知识库

.klm 文件格式（按行，# 注释）:
    vars: p b f
    constraint: p -> b
    assume: p |~ ~f

公式内部的析取与否定请写成 "| ~"（中间留空格），"|~" 总是被当作断言分隔符。
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import FormulaSyntaxError, KBSyntaxError, UnknownAtomError
from .formula import (
    FALSE, TRUE, And, Atom, Formula, Universe, WorldSet, check_atoms,
    make_universe, parse_formula, random_formula, render_formula, worlds_of,
)

logger = logging.getLogger(__name__)

SEPARATOR = "|~"


@dataclass(frozen=True)
class Assertion:
    """条件断言 α |~ β"""
    antecedent: Formula
    consequent: Formula
    line: Optional[int] = field(default=None, compare=False)

    def render(self) -> str:
        return f"{render_formula(self.antecedent)} {SEPARATOR} {render_formula(self.consequent)}"

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class SemanticPair:
    """断言在宇宙中的语义：(worlds(α), worlds(β))"""
    antecedent: WorldSet
    consequent: WorldSet


@dataclass(frozen=True)
class KnowledgeBase:
    """知识库：宇宙 + 按文件顺序保存的断言"""
    universe: Universe
    assertions: Tuple[Assertion, ...] = ()

    def __len__(self) -> int:
        return len(self.assertions)

    def pairs(self) -> List[SemanticPair]:
        return [semantic_pair(a, self.universe) for a in self.assertions]

    def with_assertions(self, extra: Sequence[Assertion]) -> "KnowledgeBase":
        return KnowledgeBase(self.universe, self.assertions + tuple(extra))


def parse_assertion(text: str, vars: Optional[Sequence[str]] = None) -> Assertion:
    """解析 'F |~ F'"""
    if SEPARATOR not in text:
        raise FormulaSyntaxError(f"missing '{SEPARATOR}'", len(text))
    cut = text.index(SEPARATOR)
    second = text.find(SEPARATOR, cut + len(SEPARATOR))
    if second >= 0:
        raise FormulaSyntaxError(f"second '{SEPARATOR}' (write a disjunction with a negation as '| ~')",
                                 second)
    left, right = text[:cut], text[cut + len(SEPARATOR):]
    if not left.strip():
        raise FormulaSyntaxError("missing antecedent", 0)
    if not right.strip():
        raise FormulaSyntaxError("missing consequent", len(text))
    try:
        antecedent = parse_formula(left)
    except FormulaSyntaxError as e:
        raise FormulaSyntaxError("bad antecedent", e.offset) from e
    try:
        consequent = parse_formula(right)
    except FormulaSyntaxError as e:
        raise FormulaSyntaxError("bad consequent", cut + len(SEPARATOR) + e.offset) from e
    if vars is not None:
        check_atoms(antecedent, vars)
        check_atoms(consequent, vars)
    return Assertion(antecedent, consequent)


def parse_kb(text: str) -> KnowledgeBase:
    """解析 .klm 文本"""
    vars_line: Optional[Tuple[int, List[str]]] = None
    constraints: List[Tuple[int, str]] = []
    assumes: List[Tuple[int, str]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise KBSyntaxError(f"expected 'key: value', got {line!r}", lineno)
        key, value = (part.strip() for part in line.split(":", 1))
        if key == "vars":
            if vars_line is not None:
                raise KBSyntaxError("duplicate 'vars:' line", lineno)
            vars_line = (lineno, value.split())
        elif key == "constraint":
            constraints.append((lineno, value))
        elif key == "assume":
            assumes.append((lineno, value))
        else:
            raise KBSyntaxError(f"unknown key {key!r}", lineno)

    if vars_line is None:
        raise KBSyntaxError("missing 'vars:' line", 1)
    names = vars_line[1]
    if len(set(names)) != len(names):
        raise KBSyntaxError("duplicate variable name", vars_line[0])

    parsed_constraints = []
    for lineno, value in constraints:
        try:
            f = parse_formula(value)
            check_atoms(f, names)
        except (FormulaSyntaxError, UnknownAtomError) as e:
            raise KBSyntaxError(e.message, lineno) from e
        parsed_constraints.append(f)

    try:
        universe = make_universe(names, parsed_constraints)
    except ValueError as e:
        raise KBSyntaxError(str(e), vars_line[0]) from e

    assertions = []
    for lineno, value in assumes:
        try:
            a = parse_assertion(value, names)
        except (FormulaSyntaxError, UnknownAtomError) as e:
            raise KBSyntaxError(e.message, lineno) from e
        assertions.append(Assertion(a.antecedent, a.consequent, line=lineno))

    logger.debug(f"[KB] {len(names)} vars, {len(parsed_constraints)} constraints, {len(assertions)} assertions")
    return KnowledgeBase(universe, tuple(assertions))


def serialize_kb(kb: KnowledgeBase) -> str:
    """知识库 -> .klm 文本；parse_kb(serialize_kb(kb)) == kb"""
    lines = [f"vars: {' '.join(kb.universe.vars)}"]
    lines += [f"constraint: {render_formula(c)}" for c in kb.universe.constraints]
    lines += [f"assume: {a.render()}" for a in kb.assertions]
    return "\n".join(lines) + "\n"


def load_kb(path) -> KnowledgeBase:
    """读取 .klm 文件（UTF-8，LF 或 CRLF）"""
    return parse_kb(Path(path).read_text(encoding="utf-8"))


def _is_atom_conjunction(f: Formula) -> bool:
    if isinstance(f, Atom):
        return True
    if isinstance(f, And):
        return _is_atom_conjunction(f.left) and _is_atom_conjunction(f.right)
    return False


def is_horn_assertion(a: Assertion) -> bool:
    """前件为原子合取（true 为零个合取项），后件为单个原子或 false"""
    antecedent_ok = a.antecedent == TRUE or _is_atom_conjunction(a.antecedent)
    consequent_ok = isinstance(a.consequent, Atom) or a.consequent == FALSE
    return antecedent_ok and consequent_ok


def semantic_pair(a: Assertion, u: Universe) -> SemanticPair:
    return SemanticPair(worlds_of(a.antecedent, u), worlds_of(a.consequent, u))


# ============================================================
# 随机生成（测试使用）
# ============================================================

def random_assertion(vars: Sequence[str], rng: np.random.Generator, depth: int = 2) -> Assertion:
    return Assertion(random_formula(vars, depth, rng), random_formula(vars, depth, rng))


def random_horn_assertion(vars: Sequence[str], rng: np.random.Generator) -> Assertion:
    k = int(rng.integers(0, len(vars) + 1))
    chosen = sorted(rng.choice(len(vars), size=k, replace=False).tolist()) if k else []
    antecedent: Formula = TRUE
    for i in chosen:
        atom = Atom(vars[i])
        antecedent = atom if antecedent == TRUE else And(antecedent, atom)
    if rng.random() < 0.15:
        consequent: Formula = FALSE
    else:
        consequent = Atom(vars[int(rng.integers(len(vars)))])
    return Assertion(antecedent, consequent)


def random_kb(universe: Universe, count: int, rng: np.random.Generator,
              horn: bool = False, depth: int = 2) -> KnowledgeBase:
    """随机知识库"""
    make = (lambda: random_horn_assertion(universe.vars, rng)) if horn else \
        (lambda: random_assertion(universe.vars, rng, depth))
    return KnowledgeBase(universe, tuple(make() for _ in range(count)))


PENGUIN_KLM = """\
# penguin triangle
vars: p b f
assume: p |~ b
assume: p |~ ~f
assume: b |~ f
"""

NIXON_KLM = """\
# Nixon diamond
vars: t p s e
assume: t |~ p
assume: t |~ s
assume: p |~ e
assume: s |~ ~e
"""
