#!/usr/bin/env python3
"""
KLM CLI - 命令行工具

子命令：entail / closure / check-model / canonical / demo
退出码：0 肯定，1 否定，2 用法或 IO 错误，3 未知
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

# 添加当前目录到路径
sys.path.insert(0, str(Path(__file__).parent))

from core.canonical import canonical_model, render_canonical, verify_representation
from core.closure import System, Verdict, VerdictStatus, close_kb, direct_justification, entails
from core.config import Config, configure_logging, get_config, set_config
from core.errors import (
    EXIT_ERROR, EXIT_NEGATIVE, EXIT_POSITIVE, EXIT_UNKNOWN, PreconditionError, ScaleLimitError, with_error_context,
)
from core.formula import parse_formula, worlds_of
from core.knowledge_base import (
    NIXON_KLM, PENGUIN_KLM, KnowledgeBase, load_kb, parse_assertion, parse_kb, semantic_pair,
)
from core.models import (
    FLAVOR_OF_SYSTEM, Flavor, Model, fixture, load_model, relation_of_model, render_model, validate,
)
from core.monitor import track
from core.search import SearchBudget, find_countermodel

VERDICT_EXIT = {
    VerdictStatus.ENTAILED: EXIT_POSITIVE,
    VerdictStatus.NOT_ENTAILED: EXIT_NEGATIVE,
    VerdictStatus.UNKNOWN: EXIT_UNKNOWN,
}


def _err(message: str):
    print(message, file=sys.stderr)


def _budget(args) -> SearchBudget:
    base = SearchBudget.from_config()
    return SearchBudget(
        max_states=base.max_states,
        max_candidates=args.budget if args.budget else base.max_candidates,
        time_limit=base.time_limit,
        seed=args.seed if args.seed is not None else base.seed,
    )


def _write(path: Optional[str], text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# ============================================================
# entail
# ============================================================

def _fixpoint_countermodel(kb: KnowledgeBase, query, system: System,
                           budget: SearchBudget) -> Optional[Model]:
    """不动点下的反模型：闭包的规范模型；规模超限时退回搜索"""
    try:
        return canonical_model(close_kb(kb, system), system)
    except ScaleLimitError:
        return find_countermodel(kb, query, FLAVOR_OF_SYSTEM[system], budget)


@with_error_context(printer=_err)
def cmd_entail(args) -> int:
    system = System.parse(args.system)
    kb = load_kb(args.kb)
    query = parse_assertion(args.query, kb.universe.vars)
    budget = _budget(args)

    with track("entail") as metrics:
        verdict = entails(kb, query, system, budget)
        metrics.bump("trace_events", len(verdict.trace or ()))

    model = verdict.countermodel
    if args.countermodel and verdict.status == VerdictStatus.NOT_ENTAILED:
        if model is None:
            model = _fixpoint_countermodel(kb, query, system, budget)
        if model is not None:
            _write(args.countermodel, render_model(model))

    if args.json:
        payload = verdict.to_dict()
        payload["elapsed_ms"] = metrics.elapsed_ms
        print(json.dumps(payload, ensure_ascii=False, sort_keys=True))
    else:
        print(verdict.status.value)
        if args.trace:
            _print_certificate(verdict, kb)
    return VERDICT_EXIT[verdict.status]


def _print_certificate(verdict: Verdict, kb: KnowledgeBase):
    u = kb.universe
    print(f"certificate: {verdict.certificate_kind}")
    if verdict.certificate_kind == "trace":
        if not verdict.trace:
            target = semantic_pair(verdict.query, u)
            print(f"  {' + '.join(direct_justification(target, verdict.seed_pairs))}")
        for event in verdict.trace or ():
            print(f"  {event.render(u)}")
    elif verdict.certificate_kind == "fixpoint":
        print(f"  C(antecedent) = {u.describe(verdict.fixpoint_core)}")
    elif verdict.certificate_kind == "countermodel":
        for line in render_model(verdict.countermodel).splitlines():
            print(f"  {line}")


# ============================================================
# closure / check-model / canonical
# ============================================================

@with_error_context(printer=_err)
def cmd_closure(args) -> int:
    system = System.parse(args.system)
    kb = load_kb(args.kb)
    with track("closure"):
        cmap = close_kb(kb, system)
    _write(args.dump, cmap.dump())
    return EXIT_POSITIVE


@with_error_context(printer=_err)
def cmd_check_model(args) -> int:
    model = load_model(args.model)
    flavor = Flavor.parse(args.flavor) if args.flavor else model.flavor
    report = validate(model, flavor)
    if args.json:
        print(json.dumps(report.to_dict(), ensure_ascii=False, sort_keys=True))
    else:
        print(f"flavor: {flavor.value}")
        print(f"states: {len(model)}")
        print(f"valid: {'yes' if report.ok else 'no'}")
        for problem in report.problems:
            print(f"  - {problem}")
        if report.strong_cumulative is not None:
            print(f"strong cumulative: {'yes' if report.strong_cumulative else 'no'}")
    return EXIT_POSITIVE if report.ok else EXIT_NEGATIVE


@with_error_context(printer=_err)
def cmd_canonical(args) -> int:
    system = System.parse(args.system)
    if args.flavor and Flavor.parse(args.flavor) != FLAVOR_OF_SYSTEM[system]:
        raise PreconditionError(f"system {system.value} represents {FLAVOR_OF_SYSTEM[system].value} models")
    kb = load_kb(args.kb)
    with track("canonical"):
        cmap = close_kb(kb, system)
        report = verify_representation(cmap, system)

    if report.model is not None:
        _write(args.out, render_canonical(report.model, cmap))
    if args.json:
        print(json.dumps(report.to_dict(), ensure_ascii=False, sort_keys=True))
    else:
        print(f"representation {system.value}: {'ok' if report.ok else 'FAILED'}"
              f"{' (sampled)' if report.sampled else ''}, {report.checked} antecedents checked")
        for problem in report.problems:
            print(f"  - {problem}")
    return EXIT_POSITIVE if report.ok else EXIT_NEGATIVE


# ============================================================
# demo
# ============================================================

Row = Tuple[str, str, str]

PENGUIN_QUERIES = [
    ("p & b |~ ~f", True),
    ("f |~ ~p", True),
    ("b |~ ~p", True),
    ("b | p |~ f", True),
    ("b | p |~ ~p", True),
    ("p |~ f", False),
]

NIXON_QUERIES = [
    ("true |~ ~t", True),
    ("true |~ ~(p & s)", True),
    ("t |~ e", False),
    ("t |~ ~e", False),
    ("s |~ ~p", False),
    ("p |~ ~s", False),
]


def _verdict_rows(kb_text: str, queries, system: System, budget: SearchBudget) -> List[Row]:
    kb = parse_kb(kb_text)
    rows = []
    for text, expected in queries:
        verdict = entails(kb, parse_assertion(text, kb.universe.vars), system, budget)
        want = VerdictStatus.ENTAILED if expected else VerdictStatus.NOT_ENTAILED
        rows.append((text, want.value, verdict.status.value))
    return rows


def _loop_rows() -> List[Row]:
    m = fixture("loop_counterexample")
    kb = parse_kb("vars: p0 p1 p2\nassume: p0 |~ p1\nassume: p1 |~ p2\nassume: p2 |~ p0\n")
    u = kb.universe
    p = [worlds_of(parse_formula(v), u) for v in u.vars]
    rel = relation_of_model(m)
    closed = close_kb(kb, System.CL)

    def yes(flag: bool) -> str:
        return "yes" if flag else "no"

    rows = [
        ("valid Cumulative", "yes", yes(validate(m, Flavor.CUMULATIVE).ok)),
        ("valid CumulativeOrdered", "no", yes(validate(m, Flavor.CUMULATIVE_ORDERED).ok)),
    ]
    for i in range(3):
        j = (i + 1) % 3
        rows.append((f"model: p{i} |~ p{j}", "yes", yes(rel.holds(p[i], p[j]))))
    rows.append(("model: p0 |~ p2", "no", yes(rel.holds(p[0], p[2]))))
    rows.append(("CL closure: p0 |~ p2", "yes", yes(closed.holds(p[0], p[2]))))
    return rows


def run_demo(name: str, budget: Optional[SearchBudget] = None) -> Tuple[str, bool]:
    """运行演示套件，返回（表格文本，是否全部通过）"""
    budget = budget or SearchBudget.from_config()
    if name == "penguin":
        title, rows = "penguin: system P", _verdict_rows(PENGUIN_KLM, PENGUIN_QUERIES, System.P, budget)
    elif name == "nixon":
        title, rows = "nixon: system P", _verdict_rows(NIXON_KLM, NIXON_QUERIES, System.P, budget)
    elif name == "loop":
        title, rows = "loop: cumulative counterexample", _loop_rows()
    else:
        raise ValueError(f"unknown demo {name!r}")

    rule = "-" * 62
    lines = [f"demo {title}", rule, f"{'check':<28}{'expected':<15}{'got':<15}result", rule]
    passed = 0
    for check, expected, got in rows:
        ok = expected == got
        passed += ok
        lines.append(f"{check:<28}{expected:<15}{got:<15}{'PASS' if ok else 'FAIL'}")
    lines += [rule, f"{passed}/{len(rows)} passed"]
    return "\n".join(lines) + "\n", passed == len(rows)


@with_error_context(printer=_err)
def cmd_demo(args) -> int:
    text, ok = run_demo(args.name, _budget(args))
    sys.stdout.write(text)
    return EXIT_POSITIVE if ok else EXIT_NEGATIVE


# ============================================================
# 入口
# ============================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="klm",
        description='KLM - 非单调后件关系判定与模型实验室',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
示例:
  python cli.py entail --system P --kb demo/penguin.klm "b |~ ~p"
  python cli.py closure --system P --kb demo/penguin.klm --dump penguin.dump
  python cli.py check-model demo/loop.model
  python cli.py canonical --system C --kb demo/loop.klm canonical.model
  python cli.py demo penguin

查询是一个位置参数，请用引号包住，避免 shell 解释 | ~ & 等字符。
        '''
    )
    parser.add_argument('--config', '-c', default=None, help='配置文件路径 (默认: config.json 或 $KLM_CONFIG)')
    parser.add_argument('--verbose', '-v', action='store_true', help='输出调试日志')

    sub = parser.add_subparsers(dest='command', required=True)

    def search_flags(p):
        p.add_argument('--seed', type=int, default=None, help='搜索随机种子')
        p.add_argument('--budget', type=int, default=None, help='最多检查的候选模型数')

    p = sub.add_parser('entail', help='判定知识库是否蕴含查询')
    p.add_argument('--system', required=True, help='C | CL | P | CM | M')
    p.add_argument('--kb', required=True, help='.klm 知识库文件')
    p.add_argument('query', help='查询，例如 "p & b |~ ~f"')
    p.add_argument('--trace', action='store_true', help='打印证书（轨迹 / 反模型 / 不动点核）')
    p.add_argument('--countermodel', metavar='PATH', help='不蕴含时写出反模型')
    p.add_argument('--json', action='store_true', help='输出单个 JSON 对象')
    search_flags(p)
    p.set_defaults(func=cmd_entail)

    p = sub.add_parser('closure', help='计算闭包并输出核映射')
    p.add_argument('--system', required=True)
    p.add_argument('--kb', required=True)
    p.add_argument('--dump', metavar='PATH', default=None, help='输出文件（默认标准输出）')
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser('check-model', help='校验模型文件')
    p.add_argument('model', help='模型文件')
    p.add_argument('--flavor', default=None, help='按指定风味校验（默认取文件中的 flavor）')
    p.add_argument('--json', action='store_true')
    p.set_defaults(func=cmd_check_model)

    p = sub.add_parser('canonical', help='构造规范模型并验证表示')
    p.add_argument('--system', required=True)
    p.add_argument('--kb', required=True)
    p.add_argument('--flavor', default=None)
    p.add_argument('out', nargs='?', default=None, help='模型输出文件（默认标准输出）')
    p.add_argument('--json', action='store_true')
    p.set_defaults(func=cmd_canonical)

    p = sub.add_parser('demo', help='运行内置演示')
    p.add_argument('name', choices=['penguin', 'nixon', 'loop'])
    search_flags(p)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_POSITIVE

    if args.config:
        set_config(Config(args.config))
    configure_logging(get_config(), verbose=args.verbose)

    try:
        return args.func(args)
    except KeyboardInterrupt:
        _err("⚠️ 用户中断")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
