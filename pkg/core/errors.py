#!/usr/bin/env python3
"""
KLM Errors 🛡️ - 错误分类系统

统一的异常层次结构与错误诊断。

核心功能：
1. 错误分类 - 语法错误 / 未知变量 / 规模超限 / 前置条件
2. 错误上下文 - 记录错误类型、严重程度、位置
3. 退出码映射 - CLI 统一使用 classify_error 决定退出码
4. 装饰器 - with_error_context 把命令中的异常转换为退出码 2
"""

import logging
import traceback
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from functools import wraps
from typing import Callable, Dict, Optional

logger = logging.getLogger(__name__)


class ErrorSeverity(Enum):
    """错误严重程度"""
    WARNING = "warning"         # 警告，可继续
    RECOVERABLE = "recoverable" # 输入问题，修正后可重试
    FATAL = "fatal"             # 内部错误，终止执行


class ErrorType(Enum):
    """错误类型"""
    SYNTAX = "syntax"
    UNKNOWN_ATOM = "unknown_atom"
    SCALE_LIMIT = "scale_limit"
    PRECONDITION = "precondition"
    NOT_CLOSED = "not_closed"
    IO = "io"
    UNKNOWN = "unknown"


# CLI 退出码：0 肯定，1 否定，2 用法/IO 错误，3 未知
EXIT_POSITIVE = 0
EXIT_NEGATIVE = 1
EXIT_ERROR = 2
EXIT_UNKNOWN = 3


class KLMError(Exception):
    """所有领域错误的基类"""

    error_type = ErrorType.UNKNOWN
    severity = ErrorSeverity.RECOVERABLE

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class FormulaSyntaxError(KLMError):
    """公式语法错误，带字节偏移"""

    error_type = ErrorType.SYNTAX

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownAtomError(KLMError):
    """公式中出现了宇宙变量表之外的原子"""

    error_type = ErrorType.UNKNOWN_ATOM

    def __init__(self, name: str):
        super().__init__(f"unknown atom '{name}'")
        self.name = name


class KBSyntaxError(KLMError):
    """.klm 文件语法错误，带行号"""

    error_type = ErrorType.SYNTAX

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ModelSyntaxError(KBSyntaxError):
    """模型文本格式错误"""


class ScaleLimitError(KLMError):
    """宇宙超出算法允许的规模"""

    error_type = ErrorType.SCALE_LIMIT

    def __init__(self, what: str, actual: int, limit: int):
        super().__init__(f"{what}: {actual} exceeds limit {limit}")
        self.actual = actual
        self.limit = limit


class PreconditionError(KLMError):
    """操作的前置条件不成立"""

    error_type = ErrorType.PRECONDITION


class NotClosedError(PreconditionError):
    """映射不满足所要求系统的闭包条件"""

    error_type = ErrorType.NOT_CLOSED

    def __init__(self, system: str, violation: object):
        super().__init__(f"map is not {system}-closed: {violation}")
        self.system = system
        self.violation = violation


@dataclass
class ErrorContext:
    """错误上下文"""
    error_type: ErrorType
    severity: ErrorSeverity
    message: str
    exception: Optional[Exception] = None
    traceback_str: str = ""
    timestamp: str = field(default_factory=lambda: datetime.now().isoformat())
    exit_code: int = EXIT_ERROR

    def to_dict(self) -> Dict:
        return {
            "error_type": self.error_type.value,
            "severity": self.severity.value,
            "message": self.message,
            "exit_code": self.exit_code,
        }


# 错误统计
_stats = {
    "total_errors": 0,
    "by_type": {},
}


def classify_error(error: Exception) -> ErrorContext:
    """把异常归类为 ErrorContext"""
    if isinstance(error, KLMError):
        error_type = error.error_type
        severity = error.severity
        message = error.message
    elif isinstance(error, (OSError, UnicodeDecodeError)):
        error_type = ErrorType.IO
        severity = ErrorSeverity.RECOVERABLE
        message = str(error)
    else:
        error_type = ErrorType.UNKNOWN
        severity = ErrorSeverity.FATAL
        message = f"{type(error).__name__}: {error}"

    _stats["total_errors"] += 1
    _stats["by_type"][error_type.value] = _stats["by_type"].get(error_type.value, 0) + 1

    return ErrorContext(
        error_type=error_type,
        severity=severity,
        message=message,
        exception=error,
        traceback_str=traceback.format_exc() if severity == ErrorSeverity.FATAL else "",
    )


def get_stats() -> Dict:
    """获取错误统计"""
    return {"total_errors": _stats["total_errors"], "by_type": dict(_stats["by_type"])}


def with_error_context(printer: Optional[Callable[[str], None]] = None):
    """
    CLI 命令装饰器

    用法:
        @with_error_context()
        def cmd_entail(args) -> int:
            ...

    被包装函数抛出的任何异常都会被分类、记录，并转换为退出码 2。
    """
    def decorator(func: Callable[..., int]) -> Callable[..., int]:
        @wraps(func)
        def wrapper(*args, **kwargs) -> int:
            try:
                return func(*args, **kwargs)
            except Exception as e:
                ctx = classify_error(e)
                if ctx.severity == ErrorSeverity.FATAL:
                    logger.error(f"[Error] {func.__name__} 内部错误\n{ctx.traceback_str}")
                else:
                    logger.debug(f"[Error] {func.__name__}: {ctx.error_type.value}")
                if printer is not None:
                    printer(f"error: {ctx.message}")
                return ctx.exit_code

        return wrapper
    return decorator
