"""Quantum-assisted impossible differential search on toy block ciphers.

Classical simulation of Simon-style linear-structure recovery, the two
miss-in-the-middle searches built on it, exhaustive oracles for ground truth,
and closed-form quantum resource counts.
"""
__version__ = "0.1.0"

from .cipher import CipherSpec, FunctionView, builtin_cipher, component_view, load_cipher
from .errors import ConfigError, FeasibilityError, QidiffError
from .finder import SearchParams, find_impo_diff, find_impo_diff2, find_struct
from .gf2 import BitVec, StructureSpace
from .resources import estimate

__all__ = [
    "BitVec", "CipherSpec", "ConfigError", "FeasibilityError", "FunctionView", "QidiffError",
    "SearchParams", "StructureSpace", "builtin_cipher", "component_view", "estimate",
    "find_impo_diff", "find_impo_diff2", "find_struct", "load_cipher",
]
