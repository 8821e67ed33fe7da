#!/usr/bin/env python3
"""知识库测试：.klm 解析、序列化、Horn 判定"""

import unittest
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from core.errors import FormulaSyntaxError, KBSyntaxError, UnknownAtomError
from core.formula import Atom, make_universe, parse_formula, worlds_of
from core.knowledge_base import (
    NIXON_KLM, PENGUIN_KLM, is_horn_assertion, load_kb, parse_assertion, parse_kb,
    random_kb, semantic_pair, serialize_kb,
)


@pytest.mark.unit
class TestAssertion(unittest.TestCase):
    """断言解析"""

    def test_split_on_separator(self):
        a = parse_assertion("b | p |~ ~p")
        self.assertEqual(a.antecedent, parse_formula("b | p"))
        self.assertEqual(a.consequent, parse_formula("~p"))
        self.assertEqual(a.render(), "b | p |~ ~p")

    def test_missing_separator(self):
        with self.assertRaises(FormulaSyntaxError):
            parse_assertion("p -> q")

    def test_consequent_offset_is_absolute(self):
        with self.assertRaises(FormulaSyntaxError) as ctx:
            parse_assertion("p |~ q &")
        self.assertEqual(ctx.exception.offset, 8)

    def test_second_separator(self):
        with self.assertRaises(FormulaSyntaxError) as ctx:
            parse_assertion("a |~b |~ c")
        self.assertEqual(ctx.exception.offset, 6)
        self.assertIn("'| ~'", ctx.exception.message)
        self.assertEqual(parse_assertion("a | ~b |~ c").consequent, Atom("c"))

    def test_unknown_atom(self):
        with self.assertRaises(UnknownAtomError):
            parse_assertion("p |~ z", ["p", "q"])

    def test_semantic_pair(self):
        u = make_universe(["p", "q"])
        pair = semantic_pair(parse_assertion("p |~ q"), u)
        self.assertEqual(pair.antecedent, worlds_of(Atom("p"), u))
        self.assertEqual(pair.consequent, worlds_of(Atom("q"), u))

    def test_horn_shape(self):
        self.assertTrue(is_horn_assertion(parse_assertion("a & b |~ c")))
        self.assertTrue(is_horn_assertion(parse_assertion("true |~ false")))
        self.assertFalse(is_horn_assertion(parse_assertion("a |~ ~c")))
        self.assertFalse(is_horn_assertion(parse_assertion("a | b |~ c")))


@pytest.mark.unit
class TestKBFile(unittest.TestCase):
    """.klm 文件"""

    def test_penguin(self):
        kb = parse_kb(PENGUIN_KLM)
        self.assertEqual(kb.universe.vars, ("p", "b", "f"))
        self.assertEqual(len(kb), 3)
        self.assertEqual([a.line for a in kb.assertions], [3, 4, 5])

    def test_constraints_and_comments(self):
        kb = parse_kb("vars: p b   # birds\nconstraint: p -> b\n\nassume: b |~ p\n")
        self.assertEqual(kb.universe.size, 3)
        self.assertEqual(len(kb), 1)

    def test_crlf(self):
        kb = parse_kb("vars: p q\r\nassume: p |~ q\r\n")
        self.assertEqual(len(kb), 1)

    def test_errors_carry_line(self):
        cases = {
            "assume: p |~ q\n": 1,
            "vars: p\nassume: p |~ q\n": 2,
            "vars: p\nvars: q\n": 2,
            "vars: p\nbogus line\n": 2,
            "vars: p\nfoo: p\n": 2,
            "vars: p\nconstraint: p &\n": 2,
            "vars: p\n\nassume: p |~\n": 3,
        }
        for text, line in cases.items():
            with self.subTest(text=text):
                with self.assertRaises(KBSyntaxError) as ctx:
                    parse_kb(text)
                self.assertEqual(ctx.exception.line, line)
                self.assertTrue(ctx.exception.message.startswith(f"line {line}:"))

    def test_serialize_round_trip(self):
        rng = np.random.default_rng(7)
        u = make_universe(["a", "b", "c"], [parse_formula("a -> b")])
        for _ in range(20):
            kb = random_kb(u, 4, rng)
            self.assertEqual(parse_kb(serialize_kb(kb)), kb)

    def test_load_from_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "nixon.klm"
            path.write_text(NIXON_KLM, encoding="utf-8")
            kb = load_kb(path)
        self.assertEqual(kb.universe.size, 16)

    def test_random_horn_kb_is_horn(self):
        rng = np.random.default_rng(3)
        kb = random_kb(make_universe(["a", "b", "c"]), 10, rng, horn=True)
        self.assertTrue(all(is_horn_assertion(a) for a in kb.assertions))


if __name__ == "__main__":
    unittest.main()
