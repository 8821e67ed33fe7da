#!/usr/bin/env python3
"""
Formula Core - 命题语言

解析、打印、世界语义、宇宙构造与经典蕴含。

世界编码：world id 的第 i 位是 vars[i] 的真值。
WorldSet 是宇宙内位置的位掩码：第 k 位表示 universe.worlds[k]。
无约束宇宙中位置 k 恰好就是 world id k。
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from .config import get_config
from .errors import FormulaSyntaxError, ScaleLimitError, UnknownAtomError

logger = logging.getLogger(__name__)

WorldSet = int

MAX_FORMULA_VARS = 24
KEYWORDS = ("true", "false")


# ============================================================
# AST
# ============================================================

class Formula:
    """命题公式基类"""

    precedence = 6

    def atoms(self) -> set:
        raise NotImplementedError

    def subformulas(self) -> Iterator["Formula"]:
        """先序遍历全部子公式（含自身）"""
        yield self

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def atoms(self) -> set:
        return {self.name}


@dataclass(frozen=True)
class Const(Formula):
    value: bool

    def atoms(self) -> set:
        return set()


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula

    precedence = 5

    def atoms(self) -> set:
        return self.operand.atoms()

    def subformulas(self) -> Iterator[Formula]:
        yield self
        yield from self.operand.subformulas()


@dataclass(frozen=True)
class _Binary(Formula):
    left: Formula
    right: Formula

    symbol = "?"
    right_assoc = False

    def atoms(self) -> set:
        return self.left.atoms() | self.right.atoms()

    def subformulas(self) -> Iterator[Formula]:
        yield self
        yield from self.left.subformulas()
        yield from self.right.subformulas()


@dataclass(frozen=True)
class And(_Binary):
    precedence = 4
    symbol = "&"


@dataclass(frozen=True)
class Or(_Binary):
    precedence = 3
    symbol = "|"


@dataclass(frozen=True)
class Implies(_Binary):
    precedence = 2
    symbol = "->"
    right_assoc = True


@dataclass(frozen=True)
class Iff(_Binary):
    precedence = 1
    symbol = "<->"
    right_assoc = True


TRUE = Const(True)
FALSE = Const(False)


def conjoin(parts: Sequence[Formula]) -> Formula:
    """左结合合取；空序列为 true"""
    if not parts:
        return TRUE
    result = parts[0]
    for p in parts[1:]:
        result = And(result, p)
    return result


def disjoin(parts: Sequence[Formula]) -> Formula:
    """左结合析取；空序列为 false"""
    if not parts:
        return FALSE
    result = parts[0]
    for p in parts[1:]:
        result = Or(result, p)
    return result


# ============================================================
# 解析
# ============================================================

_TOKEN_RE = re.compile(r"<->|->|[~&|()]|[A-Za-z_][A-Za-z0-9_]*")


@dataclass
class Token:
    text: str
    offset: int


def tokenize(text: str) -> List[Token]:
    """切分词法单元，末尾附加 EOF（文本为空串）"""
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise FormulaSyntaxError(f"unknown token {text[i]!r}", i)
        tokens.append(Token(m.group(0), i))
        i = m.end()
    tokens.append(Token("", n))
    return tokens


class FormulaParser:
    """
    递归下降解析器

    优先级从高到低: ~  &  |  ->  <->
    & 与 | 左结合，-> 与 <-> 右结合。
    """

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def parse(self) -> Formula:
        f = self._iff()
        tok = self._peek()
        if tok.text:
            raise FormulaSyntaxError(f"unexpected {tok.text!r}", tok.offset)
        return f

    def _peek(self) -> Token:
        return self.tokens[self.pos]

    def _next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def _iff(self) -> Formula:
        left = self._implies()
        if self._peek().text == "<->":
            self._next()
            return Iff(left, self._iff())
        return left

    def _implies(self) -> Formula:
        left = self._or()
        if self._peek().text == "->":
            self._next()
            return Implies(left, self._implies())
        return left

    def _or(self) -> Formula:
        left = self._and()
        while self._peek().text == "|":
            self._next()
            left = Or(left, self._and())
        return left

    def _and(self) -> Formula:
        left = self._unary()
        while self._peek().text == "&":
            self._next()
            left = And(left, self._unary())
        return left

    def _unary(self) -> Formula:
        tok = self._next()
        if tok.text == "~":
            return Not(self._unary())
        if tok.text == "(":
            inner = self._iff()
            close = self._next()
            if close.text != ")":
                raise FormulaSyntaxError("expected ')'", close.offset)
            return inner
        if tok.text == "true":
            return TRUE
        if tok.text == "false":
            return FALSE
        if tok.text and (tok.text[0].isalpha() or tok.text[0] == "_"):
            return Atom(tok.text)
        if not tok.text:
            raise FormulaSyntaxError("unexpected end of input", tok.offset)
        raise FormulaSyntaxError(f"unexpected {tok.text!r}", tok.offset)


def parse_formula(text: str) -> Formula:
    """解析公式文本"""
    return FormulaParser(text).parse()


# ============================================================
# 打印
# ============================================================

def render_formula(f: Formula) -> str:
    """以最少括号打印公式，parse_formula 可还原同一结构"""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Not):
        inner = render_formula(f.operand)
        if f.operand.precedence < Not.precedence:
            inner = f"({inner})"
        return f"~{inner}"
    if isinstance(f, _Binary):
        p = f.precedence
        left = render_formula(f.left)
        right = render_formula(f.right)
        if f.left.precedence < p or (f.left.precedence == p and f.right_assoc):
            left = f"({left})"
        if f.right.precedence < p or (f.right.precedence == p and not f.right_assoc):
            right = f"({right})"
        return f"{left} {f.symbol} {right}"
    raise TypeError(f"not a formula: {f!r}")


# ============================================================
# 宇宙与世界语义
# ============================================================

def mask_from_bools(flags: np.ndarray) -> WorldSet:
    """布尔向量 -> 位掩码（第 k 位 = flags[k]）"""
    if len(flags) == 0:
        return 0
    packed = np.packbits(np.asarray(flags, dtype=bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def bools_from_mask(mask: WorldSet, size: int) -> np.ndarray:
    """位掩码 -> 长度为 size 的布尔向量"""
    if size == 0:
        return np.zeros(0, dtype=bool)
    nbytes = (size + 7) // 8
    raw = np.frombuffer(mask.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:size].astype(bool)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True, eq=False)
class Universe:
    """有序变量表 + 可容许世界集（受背景约束限制）"""
    vars: Tuple[str, ...]
    constraints: Tuple[Formula, ...]
    worlds: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return int(len(self.worlds))

    @property
    def full(self) -> WorldSet:
        return (1 << self.size) - 1

    @property
    def var_index(self) -> Dict[str, int]:
        return {v: i for i, v in enumerate(self.vars)}

    def __eq__(self, other) -> bool:
        if not isinstance(other, Universe):
            return NotImplemented
        return (
            self.vars == other.vars
            and self.constraints == other.constraints
            and np.array_equal(self.worlds, other.worlds)
        )

    def __hash__(self) -> int:
        return hash((self.vars, self.constraints, self.size))

    def world_ids(self, mask: WorldSet) -> List[int]:
        """位掩码 -> world id 列表"""
        return [int(w) for w in self.worlds[bools_from_mask(mask, self.size)]]

    def index_of(self, world_id: int) -> int:
        k = int(np.searchsorted(self.worlds, world_id))
        if k >= self.size or int(self.worlds[k]) != world_id:
            raise KeyError(f"world {world_id} not in universe")
        return k

    def mask_of(self, world_ids: Iterable[int]) -> WorldSet:
        mask = 0
        for w in world_ids:
            mask |= 1 << self.index_of(w)
        return mask

    def world_of(self, assignment: Dict[str, bool]) -> int:
        """真值赋值 -> world id"""
        wid = 0
        for i, v in enumerate(self.vars):
            if assignment.get(v, False):
                wid |= 1 << i
        return wid

    def assignment(self, world_id: int) -> Dict[str, bool]:
        return {v: bool((world_id >> i) & 1) for i, v in enumerate(self.vars)}

    def world_formula(self, world_id: int) -> Formula:
        """刻画单个世界的文字合取"""
        lits = [Atom(v) if (world_id >> i) & 1 else Not(Atom(v)) for i, v in enumerate(self.vars)]
        return conjoin(lits)

    def describe(self, mask: WorldSet) -> str:
        """可读形式，例如 {p=1 q=0, p=1 q=1}"""
        parts = []
        for wid in self.world_ids(mask):
            parts.append(" ".join(f"{v}={(wid >> i) & 1}" for i, v in enumerate(self.vars)))
        return "{" + ", ".join(parts) + "}"


def check_atoms(f: Formula, vars: Sequence[str]):
    """公式原子必须出现在变量表中"""
    known = set(vars)
    for name in sorted(f.atoms()):
        if name not in known:
            raise UnknownAtomError(name)


def _evaluate(f: Formula, ids: np.ndarray, index: Dict[str, int]) -> np.ndarray:
    """在一组 world id 上向量化求值"""
    if isinstance(f, Atom):
        if f.name not in index:
            raise UnknownAtomError(f.name)
        return ((ids >> index[f.name]) & 1).astype(bool)
    if isinstance(f, Const):
        return np.full(ids.shape, f.value, dtype=bool)
    if isinstance(f, Not):
        return ~_evaluate(f.operand, ids, index)
    left = _evaluate(f.left, ids, index)
    right = _evaluate(f.right, ids, index)
    if isinstance(f, And):
        return left & right
    if isinstance(f, Or):
        return left | right
    if isinstance(f, Implies):
        return ~left | right
    if isinstance(f, Iff):
        return left == right
    raise TypeError(f"not a formula: {f!r}")


def make_universe(vars: Sequence[str], constraints: Sequence[Formula] = ()) -> Universe:
    """构造宇宙：所有满足全部约束的位模式"""
    vars = tuple(vars)
    if len(set(vars)) != len(vars):
        raise ValueError(f"duplicate variable names in {list(vars)}")
    for v in vars:
        if not v or v in KEYWORDS or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", v):
            raise ValueError(f"invalid variable name {v!r}")
    limit = min(MAX_FORMULA_VARS, int(get_config().get("limits.max_formula_vars", MAX_FORMULA_VARS)))
    if len(vars) > limit:
        raise ScaleLimitError("variable count", len(vars), limit)

    constraints = tuple(constraints)
    for c in constraints:
        check_atoms(c, vars)

    ids = np.arange(1 << len(vars), dtype=np.int64)
    index = {v: i for i, v in enumerate(vars)}
    keep = np.ones(ids.shape, dtype=bool)
    for c in constraints:
        keep &= _evaluate(c, ids, index)
    worlds = ids[keep]
    if len(worlds) == 0:
        logger.warning(f"[Universe] 约束不可满足，宇宙为空: vars={list(vars)}")
    return Universe(vars=vars, constraints=constraints, worlds=worlds)


def truth_vector(f: Formula, u: Universe) -> np.ndarray:
    """公式在宇宙各世界上的真值向量"""
    return _evaluate(f, u.worlds, u.var_index)


def worlds_of(f: Formula, u: Universe) -> WorldSet:
    """worlds(f)：宇宙中满足 f 的世界"""
    return mask_from_bools(truth_vector(f, u))


def classical_entails(a: Formula, b: Formula, u: Universe) -> bool:
    """a |= b（相对于宇宙 u）"""
    return not bool(np.any(truth_vector(a, u) & ~truth_vector(b, u)))


def dnf_formula(mask: WorldSet, u: Universe) -> Formula:
    """由世界集构造规范析取范式，worlds_of(dnf_formula(S)) == S"""
    return disjoin([u.world_formula(w) for w in u.world_ids(mask)])


def random_formula(vars: Sequence[str], depth: int, rng: np.random.Generator) -> Formula:
    """随机公式生成（测试与随机知识库使用）"""
    if depth <= 0 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.06:
            return TRUE
        if r < 0.1:
            return FALSE
        return Atom(vars[int(rng.integers(len(vars)))])
    kind = int(rng.integers(6))
    if kind == 0:
        return Not(random_formula(vars, depth - 1, rng))
    left = random_formula(vars, depth - 1, rng)
    right = random_formula(vars, depth - 1, rng)
    return (And, And, Or, Implies, Iff)[kind - 1](left, right)
