"""Block-concatenated VT codes for a deletion channel observed through several traces."""

from .block_code import BlockCode, binary_rate, decode_units, encode, is_valid
from .channel import DeletionPattern, Trace, apply_deletions, generate_traces, sample_pattern
from .decoder import Decoded, DetectedFailure, decode, embed_and_count
from .vt_core import VtClass, class_of, decode_one_deletion, is_member, syn_binary

__version__ = "0.1.0"

__all__ = [
    "BlockCode", "binary_rate", "decode_units", "encode", "is_valid",
    "DeletionPattern", "Trace", "apply_deletions", "generate_traces", "sample_pattern",
    "Decoded", "DetectedFailure", "decode", "embed_and_count",
    "VtClass", "class_of", "decode_one_deletion", "is_member", "syn_binary",
]
