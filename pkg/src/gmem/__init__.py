"""Store binary patterns one neuron per pattern and recall them by winner-take-all."""

from .corpus import CorpusSpec, PBMError, generate_corpus, load_pbm, occlude, save_pbm
from .network import (
    ConvergenceError,
    HyperParams,
    MemoryNet,
    NormMode,
    RecallResult,
    new_net,
)
from .patterns import (
    BitPattern,
    BottomRight,
    DimensionError,
    MaskedPattern,
    PatternSet,
    Rect,
    apply_mask,
    density,
    make_pattern,
    random_pattern,
)
from .persistence import DType, FormatError, expected_file_size, load_weights, save_weights

__version__ = "0.1.0"
