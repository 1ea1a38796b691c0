"""lacodec: encode short sounds as English sentences and render them back.

Pipeline: waveform -> 47 acoustic descriptors -> lexical code -> sentence,
then sentence -> lexical code -> interval targets -> hybrid synthesis with
closed-loop refinement -> waveform. Everything is deterministic; the only
randomness is seeded from a hash of the lexical code.
"""

from .vocab import (
    Vocabulary,
    build_default_vocabulary,
    f0_bin,
)
from .features import Waveform, extract, extract_family
from .textcodec import LexicalCode, canonical_tokens, parse, seed_of, verbalize
from .renderer import ControlVector, RenderSpec, Targets, decode_targets, duration_of, init_controls, render
from .refine import RefineConfig, decode

__all__ = [
    "Vocabulary",
    "build_default_vocabulary",
    "f0_bin",
    "Waveform",
    "extract",
    "extract_family",
    "LexicalCode",
    "canonical_tokens",
    "parse",
    "seed_of",
    "verbalize",
    "ControlVector",
    "RenderSpec",
    "Targets",
    "decode_targets",
    "duration_of",
    "init_controls",
    "render",
    "RefineConfig",
    "decode",
]

__version__ = "0.1.0"
