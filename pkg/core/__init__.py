"""
KLM Core - 非单调后件关系判定引擎与模型实验室 🧠

五个证明系统（C / CL / P / CM / M）的闭包、模型语义、规范模型构造与反模型搜索
Version: 1.0.0
"""

from .formula import (
    Formula, Atom, Const, Not, And, Or, Implies, Iff, TRUE, FALSE,
    Universe, parse_formula, render_formula, make_universe, worlds_of, truth_vector,
    classical_entails, dnf_formula, random_formula,
)
from .knowledge_base import (
    Assertion, SemanticPair, KnowledgeBase, parse_assertion, parse_kb, serialize_kb, load_kb,
    is_horn_assertion, semantic_pair, random_kb,
)
from .closure import (
    Rule, System, ConsequenceMap, TraceEvent, ClosureEngine, Verdict, VerdictStatus,
    CheckResult, Violation, DerivedRule, DERIVED_RULES, Rationality,
    initial_map, close, close_kb, entails, material_entails, satisfies_system,
    derived_rule_check, pairset_rule_check, rationality_check, pairset_closure_oracle,
    replay_trace, direct_justification,
    dump_map, parse_dump,
)
from .models import (
    Flavor, Model, ValidationReport, FLAVOR_OF_SYSTEM, hat, minimal_states, minimum_of,
    is_smooth, validate, consequence_core_of_model, relation_of_model, horn_projection,
    fixture, random_model, parse_model, render_model, load_model,
)
from .canonical import (
    EquivClass, RepresentationReport, normal_worlds, equivalence_classes, class_order,
    ordinarity, canonical_cumulative, canonical_ordered, canonical_preferential,
    canonical_simple_cumulative, canonical_simple_preferential, canonical_model,
    verify_representation,
)
from .search import (
    SearchBudget, ProofCertificate, find_countermodel, bounded_proof,
    find_injective_equivalent, find_rationality_violation,
)
from .errors import (
    KLMError, FormulaSyntaxError, UnknownAtomError, KBSyntaxError, ModelSyntaxError,
    ScaleLimitError, PreconditionError, NotClosedError, ErrorType, ErrorSeverity,
)
from .config import Config, get_config, configure_logging

__version__ = "1.0.0"
__all__ = [
    # 公式
    "Formula", "Atom", "Const", "Not", "And", "Or", "Implies", "Iff", "TRUE", "FALSE",
    "Universe", "parse_formula", "render_formula", "make_universe", "worlds_of", "truth_vector",
    "classical_entails", "dnf_formula", "random_formula",
    # 知识库
    "Assertion", "SemanticPair", "KnowledgeBase", "parse_assertion", "parse_kb", "serialize_kb",
    "load_kb", "is_horn_assertion", "semantic_pair", "random_kb",
    # 闭包
    "Rule", "System", "ConsequenceMap", "TraceEvent", "ClosureEngine", "Verdict", "VerdictStatus",
    "CheckResult", "Violation", "DerivedRule", "DERIVED_RULES", "Rationality",
    "initial_map", "close", "close_kb", "entails", "material_entails", "satisfies_system",
    "derived_rule_check", "pairset_rule_check", "rationality_check", "pairset_closure_oracle",
    "replay_trace", "direct_justification",
    "dump_map", "parse_dump",
    # 模型
    "Flavor", "Model", "ValidationReport", "FLAVOR_OF_SYSTEM", "hat", "minimal_states",
    "minimum_of", "is_smooth", "validate", "consequence_core_of_model", "relation_of_model",
    "horn_projection", "fixture", "random_model", "parse_model", "render_model", "load_model",
    # 规范模型
    "EquivClass", "RepresentationReport", "normal_worlds", "equivalence_classes", "class_order",
    "ordinarity", "canonical_cumulative", "canonical_ordered", "canonical_preferential",
    "canonical_simple_cumulative", "canonical_simple_preferential", "canonical_model",
    "verify_representation",
    # 搜索
    "SearchBudget", "ProofCertificate", "find_countermodel", "bounded_proof",
    "find_injective_equivalent", "find_rationality_violation",
    # 错误与配置
    "KLMError", "FormulaSyntaxError", "UnknownAtomError", "KBSyntaxError", "ModelSyntaxError",
    "ScaleLimitError", "PreconditionError", "NotClosedError", "ErrorType", "ErrorSeverity",
    "Config", "get_config", "configure_logging",
]
