#!/usr/bin/env python3
"""模型测试：风味校验、光滑性、定义的关系、文本格式、Horn 投影"""

import unittest
import sys
import itertools
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent.parent))

from core.closure import satisfies_system
from core.errors import ModelSyntaxError, PreconditionError
from core.formula import make_universe, parse_formula, worlds_of
from core.models import (
    FLAVOR_OF_SYSTEM, Flavor, Model, fixture, has_minimum_everywhere, hat, horn_projection,
    is_smooth, is_strict_partial_order, make_model,
    minimal_states, minimum_of, model_satisfies, parse_model, random_model, relation_of_model,
    render_model, validate,
)

LOOP_MODEL = """\
flavor: Cumulative
vars: p0 p1 p2
state s-1 : p0 & p1 | p1 & p2 | p2 & p0
state s0 : p0 & p1
state s1 : p1 & p2
state s2 : p2 & p0
pref s-1 < s0
pref s-1 < s1
pref s-1 < s2
pref s1 < s0
pref s2 < s1
pref s0 < s2
"""


def _m(m, text):
    return worlds_of(parse_formula(text), m.universe)


@pytest.mark.unit
class TestHat(unittest.TestCase):
    """hat 与极小状态"""

    def setUp(self):
        self.m = fixture("loop_counterexample")

    def test_hat(self):
        self.assertEqual(hat(self.m, _m(self.m, "p0")), frozenset({"s0", "s2"}))
        self.assertEqual(hat(self.m, _m(self.m, "true")), frozenset(self.m.states))

    def test_hat_union_with_singleton_labels(self):
        u = make_universe(["a", "b"])
        m = random_model(Flavor.PREFERENTIAL, u, 4, density=0.4, seed=3)
        for a, b in itertools.product(range(1 << u.size), repeat=2):
            self.assertEqual(hat(m, a | b), hat(m, a) | hat(m, b))

    def test_hat_union_fails_for_wide_labels(self):
        u = make_universe(["a"])
        m = make_model(u, {"s": u.full}, [], Flavor.CUMULATIVE)
        self.assertEqual(hat(m, 0b01) | hat(m, 0b10), frozenset())
        self.assertEqual(hat(m, 0b11), frozenset({"s"}))

    @settings(max_examples=50, deadline=None)
    @given(st.sampled_from(list(Flavor)), st.integers(min_value=0, max_value=10**6))
    def test_hat_intersection(self, flavor, seed):
        u = make_universe(["a", "b"])
        m = random_model(flavor, u, 4, density=0.4, seed=seed)
        for a, b in itertools.product(range(1 << u.size), repeat=2):
            self.assertEqual(hat(m, a & b), hat(m, a) & hat(m, b))

    def test_minimal_and_minimum(self):
        self.assertEqual(minimal_states(self.m, {"s0", "s2"}), frozenset({"s0"}))
        self.assertEqual(minimum_of(self.m, {"s0", "s2"}), "s0")
        self.assertEqual(minimum_of(self.m, {"s0", "s1", "s2", "s-1"}), "s-1")
        self.assertIsNone(minimum_of(self.m, {"s0", "s1", "s2"}))

    def test_model_satisfies(self):
        self.assertTrue(model_satisfies(self.m, _m(self.m, "p0"), _m(self.m, "p1")))
        self.assertFalse(model_satisfies(self.m, _m(self.m, "p0"), _m(self.m, "p2")))


@pytest.mark.unit
class TestValidate(unittest.TestCase):
    """风味校验"""

    def test_loop_fixture(self):
        m = fixture("loop_counterexample")
        report = validate(m, Flavor.CUMULATIVE)
        self.assertTrue(report.ok, report.problems)
        self.assertTrue(report.strong_cumulative)
        ordered = validate(m, Flavor.CUMULATIVE_ORDERED)
        self.assertFalse(ordered.ok)
        self.assertIn("pref not transitive", ordered.problems)

    def test_not_smooth(self):
        u = make_universe(["p"])
        w = u.mask_of([1])
        m = make_model(u, {"a": w, "b": w}, [("a", "b"), ("b", "a")], Flavor.CUMULATIVE)
        result = is_smooth(m)
        self.assertFalse(result.ok)
        self.assertFalse(validate(m).ok)

    def test_asymmetric_order_with_minimum_is_smooth(self):
        u = make_universe(["p"])
        w = u.mask_of([1])
        pref = [("x", "y"), ("x", "z"), ("x", "v"), ("y", "z"), ("z", "v")]
        m = make_model(u, {s: w for s in ("x", "y", "z", "v")}, pref, Flavor.CUMULATIVE)
        self.assertFalse(is_strict_partial_order(m))
        self.assertTrue(has_minimum_everywhere(m).ok)
        self.assertTrue(is_smooth(m).ok)
        self.assertTrue(validate(m).ok)

    def test_simple_needs_empty_pref(self):
        m = fixture("single_chain").with_flavor(Flavor.SIMPLE_CUMULATIVE)
        self.assertIn("pref must be empty", validate(m).problems)

    def test_singleton_labels(self):
        u = make_universe(["p"])
        m = make_model(u, {"a": u.full}, [], Flavor.PREFERENTIAL)
        self.assertIn("label of a is not a single world", validate(m).problems)

    def test_empty_label_needs_lax(self):
        u = make_universe(["p"])
        strict = make_model(u, {"a": 0}, [], Flavor.CUMULATIVE)
        lax = make_model(u, {"a": 0}, [], Flavor.CUMULATIVE, lax=True)
        self.assertFalse(validate(strict).ok)
        self.assertTrue(validate(lax).ok)

    def test_duplicate_names(self):
        u = make_universe(["p"])
        m = Model(u, ("a", "a"), (1, 2), np.zeros((2, 2), dtype=bool), Flavor.CUMULATIVE)
        self.assertEqual(validate(m).problems, ["duplicate state names"])


@pytest.mark.unit
class TestRandomModels(unittest.TestCase):
    """随机模型满足其风味，且定义的关系满足对应系统"""

    def test_random_models_are_valid_and_sound(self):
        u = make_universe(["a", "b"])
        for system, flavor in FLAVOR_OF_SYSTEM.items():
            for seed in range(20):
                with self.subTest(flavor=flavor, seed=seed):
                    m = random_model(flavor, u, 4, seed=seed)
                    self.assertTrue(validate(m).ok, validate(m).problems)
                    self.assertTrue(satisfies_system(relation_of_model(m), system).ok)

    def test_deterministic(self):
        u = make_universe(["a", "b", "c"])
        self.assertEqual(random_model(Flavor.PREFERENTIAL, u, 5, seed=11),
                         random_model(Flavor.PREFERENTIAL, u, 5, seed=11))

    def test_negative_state_count(self):
        with self.assertRaises(PreconditionError):
            random_model(Flavor.CUMULATIVE, make_universe(["a"]), -1)


@pytest.mark.unit
class TestModelText(unittest.TestCase):
    """模型文本格式"""

    def test_parse_loop_model_matches_fixture(self):
        self.assertEqual(parse_model(LOOP_MODEL), fixture("loop_counterexample"))

    def test_render_parse_round_trip(self):
        u = make_universe(["a", "b", "c"], [parse_formula("a -> b")])
        for flavor in Flavor:
            for seed in range(5):
                m = random_model(flavor, u, 4, seed=seed)
                with self.subTest(flavor=flavor, seed=seed):
                    self.assertEqual(parse_model(render_model(m)), m)

    def test_lax_round_trip(self):
        u = make_universe(["p"])
        m = make_model(u, {"empty": 0, "all": u.full}, [("all", "empty")], Flavor.CUMULATIVE, lax=True)
        text = render_model(m)
        self.assertIn("mode: lax", text)
        self.assertIn("state empty : false", text)
        self.assertEqual(parse_model(text), m)

    def test_errors(self):
        cases = {
            "vars: p\nstate a : p\n": 1,
            "flavor: Cumulative\nstate a : p\n": 1,
            "flavor: Cumulative\nvars: p\nstate a b : p\n": 3,
            "flavor: Cumulative\nvars: p\nstate a : p\nstate a : ~p\n": 4,
            "flavor: Cumulative\nvars: p\nstate a : p & ~p\n": 3,
            "flavor: Preferential\nvars: p q\nstate a : p\n": 3,
            "flavor: Cumulative\nvars: p\nstate a : p\npref a < b\n": 4,
            "flavor: Cumulative\nvars: p\nstate a : z\n": 3,
            "flavor: Weird\nvars: p\n": 1,
        }
        for text, line in cases.items():
            with self.subTest(text=text):
                with self.assertRaises(ModelSyntaxError) as ctx:
                    parse_model(text)
                self.assertEqual(ctx.exception.line, line)


@pytest.mark.unit
class TestHornProjection(unittest.TestCase):
    """Horn 投影保持所有 Horn 断言的真假"""

    def _horn_sets(self, u):
        conj = []
        for k in range(len(u.vars) + 1):
            for combo in itertools.combinations(u.vars, k):
                text = " & ".join(combo) if combo else "true"
                conj.append(worlds_of(parse_formula(text), u))
        heads = [worlds_of(parse_formula(v), u) for v in u.vars] + [0]
        return conj, heads

    def test_projection_preserves_horn_verdicts(self):
        u = make_universe(["a", "b", "c"])
        conj, heads = self._horn_sets(u)
        for flavor in (Flavor.PREFERENTIAL, Flavor.CUMULATIVE_ORDERED):
            for seed in range(10):
                m = random_model(flavor, u, 4, seed=seed)
                proj = horn_projection(m)
                self.assertEqual(proj.flavor, Flavor.PREFERENTIAL)
                self.assertTrue(validate(proj).ok)
                for a in conj:
                    for b in heads:
                        self.assertEqual(model_satisfies(m, a, b), model_satisfies(proj, a, b),
                                         (flavor, seed, a, b))

    def test_rejects_unordered(self):
        with self.assertRaises(PreconditionError):
            horn_projection(fixture("loop_counterexample"))


if __name__ == "__main__":
    unittest.main()
