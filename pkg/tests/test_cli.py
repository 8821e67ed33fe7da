#!/usr/bin/env python3
"""命令行测试：退出码、输出格式、文件产物"""

import io
import json
import sys
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import pytest

ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT))

import cli
from core.closure import System, close_kb, parse_dump
from core.knowledge_base import load_kb
from core.models import Flavor, load_model, validate

DEMO = ROOT / "demo"
GOLDEN = Path(__file__).parent / "golden"


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.main([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


@pytest.mark.integration
class TestEntailCommand(unittest.TestCase):
    """entail 子命令"""

    def test_entailed(self):
        code, out, _ = run_cli("entail", "--system", "P", "--kb", DEMO / "penguin.klm", "b |~ ~p")
        self.assertEqual(code, 0)
        self.assertEqual(out, "ENTAILED\n")

    def test_not_entailed(self):
        code, out, _ = run_cli("entail", "--system", "P", "--kb", DEMO / "penguin.klm", "p |~ f")
        self.assertEqual(code, 1)
        self.assertEqual(out, "NOT ENTAILED\n")

    def test_json(self):
        code, out, _ = run_cli("entail", "--system", "P", "--kb", DEMO / "penguin.klm", "p |~ f", "--json")
        self.assertEqual(code, 1)
        payload = json.loads(out)
        self.assertEqual(payload["verdict"], "NOT ENTAILED")
        self.assertEqual(payload["certificate_kind"], "fixpoint")
        self.assertIsInstance(payload["elapsed_ms"], int)

    def test_trace(self):
        code, out, _ = run_cli("entail", "--system", "C", "--kb", DEMO / "penguin.klm",
                               "p & b |~ ~f", "--trace")
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertEqual(lines[:2], ["ENTAILED", "certificate: trace"])
        self.assertTrue(any(line.strip().startswith("CM") for line in lines[2:]))

    def test_trace_names_assumptions(self):
        code, out, _ = run_cli("entail", "--system", "C", "--kb", DEMO / "penguin.klm",
                               "p |~ b & ~f", "--trace")
        self.assertEqual(code, 0)
        self.assertEqual(out.splitlines(), ["ENTAILED", "certificate: trace", "  Assumption + And"])
        code, out, _ = run_cli("entail", "--system", "C", "--kb", DEMO / "penguin.klm",
                               "p & b |~ p", "--trace")
        self.assertEqual(out.splitlines()[-1], "  Reflexivity")

    def test_countermodel_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "cm.model"
            code, _, _ = run_cli("entail", "--system", "P", "--kb", DEMO / "penguin.klm", "p |~ f",
                                 "--countermodel", path)
            self.assertEqual(code, 1)
            model = load_model(path)
        self.assertEqual(model.flavor, Flavor.PREFERENTIAL)
        self.assertTrue(validate(model).ok)

    def test_five_variable_countermodel(self):
        code, out, _ = run_cli("entail", "--system", "P", "--kb", DEMO / "nixon_extra.klm",
                               "a & p |~ e", "--json", "--budget", "5000")
        self.assertEqual(code, 1)
        self.assertEqual(json.loads(out)["certificate_kind"], "countermodel")

    def test_syntax_error(self):
        code, out, err = run_cli("entail", "--system", "P", "--kb", DEMO / "penguin.klm", "p |~ (f")
        self.assertEqual(code, 2)
        self.assertEqual(out, "")
        self.assertTrue(err.startswith("error: "))

    def test_unknown_atom(self):
        code, _, err = run_cli("entail", "--system", "P", "--kb", DEMO / "penguin.klm", "p |~ z")
        self.assertEqual(code, 2)
        self.assertIn("unknown atom 'z'", err)

    def test_missing_file(self):
        code, _, _ = run_cli("entail", "--system", "P", "--kb", DEMO / "nope.klm", "p |~ b")
        self.assertEqual(code, 2)

    def test_usage_error(self):
        code, _, _ = run_cli("entail", "--kb", DEMO / "penguin.klm", "p |~ b")
        self.assertEqual(code, 2)


@pytest.mark.integration
class TestOtherCommands(unittest.TestCase):
    """closure / check-model / canonical"""

    def test_closure_dump(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "penguin.dump"
            code, _, _ = run_cli("closure", "--system", "P", "--kb", DEMO / "penguin.klm", "--dump", path)
            text = path.read_text(encoding="utf-8")
        self.assertEqual(code, 0)
        kb = load_kb(DEMO / "penguin.klm")
        self.assertEqual(parse_dump(text, kb.universe), close_kb(kb, System.P))
        self.assertEqual(len(text.splitlines()), 256)

    def test_closure_empty_kb(self):
        with tempfile.TemporaryDirectory() as tmp:
            kb_path = Path(tmp) / "empty.klm"
            kb_path.write_text("vars: a\n", encoding="utf-8")
            code, out, _ = run_cli("closure", "--system", "C", "--kb", kb_path)
        self.assertEqual(code, 0)
        self.assertEqual(out.splitlines(), ["A=0 C=0", "A=1 C=1", "A=2 C=2", "A=3 C=3"])

    def test_closure_scale_limit(self):
        code, out, err = run_cli("closure", "--system", "P", "--kb", DEMO / "nixon_extra.klm")
        self.assertEqual(code, 2)
        self.assertEqual(out, "")
        self.assertIn("exceeds limit 16", err)

    def test_check_model(self):
        code, out, _ = run_cli("check-model", DEMO / "loop.model")
        self.assertEqual(code, 0)
        self.assertIn("valid: yes", out)
        code, out, _ = run_cli("check-model", DEMO / "loop.model", "--flavor", "CumulativeOrdered")
        self.assertEqual(code, 1)
        self.assertIn("pref not transitive", out)

    def test_check_model_json(self):
        code, out, _ = run_cli("check-model", DEMO / "shoham.model", "--json")
        self.assertEqual(code, 0)
        self.assertTrue(json.loads(out)["valid"])

    def test_canonical(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "canonical.model"
            code, out, _ = run_cli("canonical", "--system", "C", "--kb", DEMO / "loop.klm", path)
            text = path.read_text(encoding="utf-8")
            model = load_model(path)
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith("representation C: ok"))
        self.assertIn("# class members:", text)
        self.assertTrue(validate(model, Flavor.CUMULATIVE).ok)

    def test_canonical_flavor_mismatch(self):
        code, _, err = run_cli("canonical", "--system", "P", "--kb", DEMO / "penguin.klm",
                               "--flavor", "Cumulative")
        self.assertEqual(code, 2)
        self.assertIn("Preferential", err)


@pytest.mark.integration
class TestDemo(unittest.TestCase):
    """内置演示"""

    def test_penguin_golden(self):
        code, out, _ = run_cli("demo", "penguin")
        self.assertEqual(code, 0)
        self.assertEqual(out, (GOLDEN / "demo_penguin.txt").read_text(encoding="utf-8"))

    def test_loop(self):
        code, out, _ = run_cli("demo", "loop")
        self.assertEqual(code, 0)
        self.assertTrue(out.rstrip().endswith("7/7 passed"))

    @pytest.mark.slow
    def test_nixon(self):
        code, out, _ = run_cli("demo", "nixon")
        self.assertEqual(code, 0, out)


if __name__ == "__main__":
    unittest.main()
