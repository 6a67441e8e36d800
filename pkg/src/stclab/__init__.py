"""stclab: algebraic space-time codes, MIMO channel simulation, and
reduced-complexity recursive decoding alongside exact ML baselines."""

__version__ = "0.1.0"

from .algebra import CodeSpec, golden_code, perfect_code_4x4  # noqa: F401
from .alphabet import Alphabet, Quantizer, make_qam  # noqa: F401
from .decoders import (  # noqa: F401
    DecodeResult,
    ml_exhaustive,
    recursive_decode,
    sphere_decode,
)
