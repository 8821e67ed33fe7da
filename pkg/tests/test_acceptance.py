#!/usr/bin/env python3
"""
端到端验收：经典例子、预言机等价、可靠性与表示实验

随机化实验使用固定种子，标记为 slow。
"""

import unittest
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from core.canonical import verify_representation
from core.closure import (
    DERIVED_RULES, Rationality, System, VerdictStatus, close_kb, derived_rule_check, entails,
    material_entails, pairset_closure_oracle, rationality_check, satisfies_system,
)
from core.formula import make_universe, parse_formula, worlds_of
from core.knowledge_base import (
    NIXON_KLM, PENGUIN_KLM, KnowledgeBase, parse_assertion, parse_kb, random_kb,
)
from core.knowledge_base import random_horn_assertion
from core.models import (
    FLAVOR_OF_SYSTEM, Flavor, fixture, horn_projection, model_satisfies, random_model,
    relation_of_model, validate,
)
from core.search import SearchBudget, bounded_proof, find_rationality_violation

LOOP_KLM = "vars: p0 p1 p2\nassume: p0 |~ p1\nassume: p1 |~ p2\nassume: p2 |~ p0\n"


def _verdicts(kb_text, queries, system=System.P, budget=None):
    kb = parse_kb(kb_text)
    return {q: entails(kb, parse_assertion(q, kb.universe.vars), system, budget).status for q in queries}


@pytest.mark.integration
class TestPenguin(unittest.TestCase):
    """企鹅三角"""

    def test_verdicts(self):
        got = _verdicts(PENGUIN_KLM, [
            "p & b |~ ~f", "f |~ ~p", "b |~ ~p", "b | p |~ f", "b | p |~ ~p", "p |~ f",
        ])
        for q in ("p & b |~ ~f", "f |~ ~p", "b |~ ~p", "b | p |~ f", "b | p |~ ~p"):
            self.assertEqual(got[q], VerdictStatus.ENTAILED, q)
        self.assertEqual(got["p |~ f"], VerdictStatus.NOT_ENTAILED)


@pytest.mark.slow
class TestNixon(unittest.TestCase):
    """Nixon 菱形（16 个世界）"""

    def test_verdicts(self):
        entailed = ["true |~ ~t", "true |~ ~(p & s)"]
        refuted = ["t |~ e", "t |~ ~e", "s |~ ~p", "p |~ ~s"]
        got = _verdicts(NIXON_KLM, entailed + refuted)
        for q in entailed:
            self.assertEqual(got[q], VerdictStatus.ENTAILED, q)
        for q in refuted:
            self.assertEqual(got[q], VerdictStatus.NOT_ENTAILED, q)


@pytest.mark.integration
class TestFiveVariables(unittest.TestCase):
    """超出格上限：反模型驳斥"""

    def test_countermodel(self):
        kb = parse_kb(NIXON_KLM.replace("vars: t p s e", "vars: t p s e a"))
        q = parse_assertion("a & p |~ e", kb.universe.vars)
        verdict = entails(kb, q, System.P, SearchBudget(max_candidates=20000))
        self.assertEqual(verdict.status, VerdictStatus.NOT_ENTAILED)
        self.assertEqual(verdict.certificate_kind, "countermodel")
        self.assertTrue(validate(verdict.countermodel, Flavor.PREFERENTIAL).ok)
        self.assertIsNone(verdict.trace)

    @pytest.mark.slow
    def test_no_bounded_proof(self):
        kb = parse_kb(NIXON_KLM.replace("vars: t p s e", "vars: t p s e a"))
        q = parse_assertion("a & p |~ e", kb.universe.vars)
        for depth in (0, 1, 2):
            self.assertIsNone(bounded_proof(kb, q, System.P, depth=depth), depth)


@pytest.mark.integration
class TestLoopSeparation(unittest.TestCase):
    """Loop 区分 C 与 CL"""

    def test_loop_fixture(self):
        m = fixture("loop_counterexample")
        u = m.universe
        p = [worlds_of(parse_formula(v), u) for v in u.vars]
        self.assertTrue(validate(m, Flavor.CUMULATIVE).ok)
        self.assertFalse(validate(m, Flavor.CUMULATIVE_ORDERED).ok)
        rel = relation_of_model(m)
        for i in range(3):
            self.assertTrue(rel.holds(p[i], p[(i + 1) % 3]))
        self.assertFalse(rel.holds(p[0], p[2]))
        self.assertTrue(close_kb(parse_kb(LOOP_KLM), System.CL).holds(p[0], p[2]))


@pytest.mark.slow
class TestOracleEquivalence(unittest.TestCase):
    """核闭包与朴素二元组饱和在两变量宇宙上一致"""

    def test_random_kbs(self):
        rng = np.random.default_rng(2024)
        universes = [make_universe(["a", "b"]), make_universe(["a", "b"], [parse_formula("a | b")])]
        for i in range(200):
            u = universes[i % 2]
            kb = random_kb(u, int(rng.integers(1, 5)), rng)
            for system in System:
                with self.subTest(kb=i, system=system):
                    self.assertEqual(close_kb(kb, system).pairs(), pairset_closure_oracle(kb, system))


@pytest.mark.slow
class TestSoundness(unittest.TestCase):
    """随机模型定义的关系满足对应系统（|U| = 8）"""

    def test_random_models(self):
        u = make_universe(["a", "b", "c"])
        rng = np.random.default_rng(8)
        for system, flavor in FLAVOR_OF_SYSTEM.items():
            for seed in range(500):
                m = random_model(flavor, u, int(rng.integers(1, 6)), density=0.4, seed=seed)
                result = satisfies_system(relation_of_model(m), system)
                self.assertTrue(result.ok, (flavor, seed, result.violation))


@pytest.mark.slow
class TestRepresentation(unittest.TestCase):
    """闭包 -> 规范模型 -> 关系 回到原映射"""

    def test_round_trips(self):
        rng = np.random.default_rng(77)
        vars_by_size = {1: ["a"], 2: ["a", "b"], 3: ["a", "b", "c"]}
        for system in System:
            for i in range(100):
                u = make_universe(vars_by_size[1 + i % 3])
                kb = random_kb(u, int(rng.integers(0, 4)), rng)
                report = verify_representation(close_kb(kb, system), system)
                self.assertTrue(report.ok, (system, i, report.problems))


@pytest.mark.slow
class TestHorn(unittest.TestCase):
    """Horn 知识库上 P 与 CL 一致；Horn 投影保持 Horn 判定"""

    def test_p_and_cl_agree(self):
        rng = np.random.default_rng(5)
        u = make_universe(["a", "b", "c"])
        for i in range(200):
            kb = random_kb(u, int(rng.integers(1, 5)), rng, horn=True)
            for _ in range(5):
                q = random_horn_assertion(u.vars, rng)
                p = entails(kb, q, System.P).status
                cl = entails(kb, q, System.CL).status
                self.assertEqual(p, cl, (i, q.render()))

    def test_projection(self):
        u = make_universe(["a", "b", "c"])
        rng = np.random.default_rng(6)
        queries = [random_horn_assertion(u.vars, rng) for _ in range(40)]
        pairs = [(worlds_of(q.antecedent, u), worlds_of(q.consequent, u)) for q in queries]
        for seed in range(200):
            m = random_model(Flavor.CUMULATIVE_ORDERED, u, 5, density=0.4, seed=seed)
            proj = horn_projection(m)
            for a, b in pairs:
                self.assertEqual(model_satisfies(m, a, b), model_satisfies(proj, a, b))


@pytest.mark.slow
class TestMaterialCollapse(unittest.TestCase):
    """M 等同于实质蕴含"""

    def test_random(self):
        rng = np.random.default_rng(9)
        u = make_universe(["a", "b", "c"])
        for i in range(200):
            kb = random_kb(u, int(rng.integers(0, 4)), rng)
            q = random_kb(u, 1, rng).assertions[0]
            self.assertEqual(entails(kb, q, System.M).entailed, material_entails(kb, q), i)


@pytest.mark.slow
class TestDerivedRuleSuite(unittest.TestCase):
    """闭包满足各系统的派生规则"""

    def test_random_closures(self):
        rng = np.random.default_rng(10)
        universes = [
            make_universe(["a", "b", "c"]),
            make_universe(["a", "b", "c"], [parse_formula("a -> b")]),
            make_universe(["a", "b"], [parse_formula("a | b")]),
        ]
        for system, rules in DERIVED_RULES.items():
            for i in range(100):
                u = universes[i % len(universes)]
                cmap = close_kb(random_kb(u, int(rng.integers(1, 5)), rng), system)
                for rule in rules:
                    result = derived_rule_check(cmap, rule)
                    self.assertTrue(result.ok, (system, rule, i, result.violation))


@pytest.mark.slow
class TestRationalitySeparation(unittest.TestCase):
    """P 不保证理性公设；CM 闭包满足全部三条"""

    def test_p_relation_violates_negation_rationality(self):
        found = find_rationality_violation(Rationality.NEGATION)
        self.assertIsNotNone(found)
        model, _ = found
        self.assertTrue(satisfies_system(relation_of_model(model), System.P).ok)

    def test_cm_closures_are_rational(self):
        rng = np.random.default_rng(11)
        u = make_universe(["a", "b", "c"])
        for i in range(30):
            cmap = close_kb(random_kb(u, int(rng.integers(1, 5)), rng), System.CM)
            for which in Rationality:
                self.assertTrue(rationality_check(cmap, which).ok, (which, i))

    def test_empty_kb(self):
        cmap = close_kb(KnowledgeBase(make_universe(["a", "b"])), System.P)
        for which in Rationality:
            self.assertTrue(rationality_check(cmap, which).ok)


if __name__ == "__main__":
    unittest.main()
