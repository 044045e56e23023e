"""
marl-dyn - Simulate coupled multi-agent learners and diagnose their learning dynamics
"""

__version__ = "0.1.0"
