"""
KLM 测试套件 🧪

运行所有测试:
    python tests/run_all_tests.py

运行单元测试:
    python -m pytest tests/ -v

跳过慢速实验:
    python -m pytest tests/ -m "not slow"
"""

__version__ = "1.0.0"
