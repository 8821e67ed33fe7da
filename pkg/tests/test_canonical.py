#!/usr/bin/env python3
"""规范模型测试：等价类、普通性、五种构造与表示验证"""

import unittest
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from core.canonical import (
    canonical_model, canonical_ordered, class_order_is_antisymmetric, equivalence_classes,
    normal_world_upgrade_holds, ordinarity, ordinarity_is_transitive, render_canonical,
    simple_preferential_worlds, verify_representation,
)
from core.closure import ConsequenceMap, System, close_kb, initial_map
from core.errors import NotClosedError, ScaleLimitError
from core.formula import make_universe, parse_formula, worlds_of
from core.knowledge_base import NIXON_KLM, PENGUIN_KLM, parse_kb, random_kb
from core.models import FLAVOR_OF_SYSTEM, validate

LOOP_KLM = "vars: p0 p1 p2\nassume: p0 |~ p1\nassume: p1 |~ p2\nassume: p2 |~ p0\n"


@pytest.mark.unit
class TestClasses(unittest.TestCase):
    """等价类与类序"""

    def test_identity_map_has_singleton_classes(self):
        cmap = ConsequenceMap.identity(make_universe(["p"]))
        classes = equivalence_classes(cmap)
        self.assertEqual([c.core for c in classes], [0, 1, 2, 3])
        self.assertTrue(all(len(c.members) == 1 for c in classes))

    def test_classes_group_equal_cores(self):
        cmap = close_kb(parse_kb(PENGUIN_KLM), System.C)
        for cls in equivalence_classes(cmap):
            self.assertIn(cls.representative, cls.members.tolist())
            for a in cls.members.tolist():
                self.assertEqual(cmap[a], cls.core)

    def test_cl_class_order_antisymmetric(self):
        cmap = close_kb(parse_kb(LOOP_KLM), System.CL)
        self.assertTrue(class_order_is_antisymmetric(cmap).ok)


@pytest.mark.unit
class TestOrdinarity(unittest.TestCase):
    """普通性关系"""

    def test_p_closed_properties(self):
        kb = parse_kb(PENGUIN_KLM)
        cmap = close_kb(kb, System.P)
        self.assertTrue(ordinarity_is_transitive(cmap).ok)
        self.assertTrue(normal_world_upgrade_holds(cmap).ok)
        # 企鹅比鸟更不正常：b ⊑ p
        b = worlds_of(parse_formula("b"), kb.universe)
        p = worlds_of(parse_formula("p"), kb.universe)
        self.assertTrue(ordinarity(cmap, b, p))
        self.assertFalse(ordinarity(cmap, p, b))

    def test_c_closed_ordinarity_can_fail_transitivity(self):
        rng = np.random.default_rng(21)
        u = make_universe(["a", "b"])
        witnesses = []
        for _ in range(50):
            cmap = close_kb(random_kb(u, int(rng.integers(1, 5)), rng), System.C)
            result = ordinarity_is_transitive(cmap)
            if not result.ok:
                witnesses.append((cmap, result.violation.sets))
        self.assertTrue(witnesses)
        cmap, (a, b, c) = witnesses[0]
        self.assertTrue(ordinarity(cmap, a, b))
        self.assertTrue(ordinarity(cmap, b, c))
        self.assertFalse(ordinarity(cmap, a, c))


@pytest.mark.unit
class TestConstructions(unittest.TestCase):
    """各系统的规范模型"""

    def test_penguin_representation_all_systems(self):
        kb = parse_kb(PENGUIN_KLM)
        for system in System:
            with self.subTest(system=system):
                report = verify_representation(close_kb(kb, system), system)
                self.assertTrue(report.ok, report.problems)
                self.assertFalse(report.sampled)
                self.assertEqual(report.model.flavor, FLAVOR_OF_SYSTEM[system])
                self.assertTrue(validate(report.model).ok)

    def test_loop_kb_representations(self):
        kb = parse_kb(LOOP_KLM)
        for system in (System.C, System.CL):
            with self.subTest(system=system):
                self.assertTrue(verify_representation(close_kb(kb, system), system).ok)

    def test_not_closed_map_rejected(self):
        cmap = initial_map(parse_kb(PENGUIN_KLM))
        report = verify_representation(cmap, System.P)
        self.assertFalse(report.ok)
        self.assertIn("not P-closed", report.problems[0])
        with self.assertRaises(NotClosedError):
            canonical_model(cmap, System.P)

    def test_c_closed_map_is_not_ordered(self):
        # 只在 C 下闭合的环：类序出现环，或不满足 Loop 条件
        cmap = close_kb(parse_kb(LOOP_KLM), System.C)
        with self.assertRaises(NotClosedError):
            canonical_ordered(cmap)

    def test_render_lists_class_members(self):
        cmap = close_kb(parse_kb(PENGUIN_KLM), System.C)
        text = render_canonical(canonical_model(cmap, System.C), cmap)
        self.assertIn("mode: lax", text)
        self.assertIn("# class members:", text)

    def test_simple_preferential_worlds(self):
        kb = parse_kb(PENGUIN_KLM)
        cmap = close_kb(kb, System.M)
        # M 下只剩满足 p -> b, p -> ~f, b -> f 的世界
        expected = worlds_of(parse_formula("(p -> b) & (p -> ~f) & (b -> f)"), kb.universe)
        self.assertEqual(simple_preferential_worlds(cmap), expected)

    def test_preferential_needs_small_universe(self):
        cmap = ConsequenceMap.identity(make_universe(["a", "b", "c", "d"]))
        with self.assertRaises(ScaleLimitError):
            canonical_model(cmap, System.P)


@pytest.mark.slow
class TestSpotCheck(unittest.TestCase):
    """超出完整验证上限时的抽查"""

    def test_nixon_spot_check(self):
        cmap = close_kb(parse_kb(NIXON_KLM), System.P)
        report = verify_representation(cmap, System.P)
        self.assertTrue(report.sampled)
        self.assertTrue(report.ok, report.problems)
        self.assertIsNone(report.model)


if __name__ == "__main__":
    unittest.main()
