"""Exact BDD-based quantitative analysis of binarized neural networks."""

from .bdd import Bdd, BddError, BddManager, BudgetExceeded
from .builder import ClassPartition, build
from .encoder import (
    CardinalityConstraint,
    FixedIndices,
    HammingBall,
    Literal,
    VariableLayout,
    cc_to_bdd,
    region_size,
    region_to_bdd,
)
from .model import BnnModel, InputSample, generate_random, load_input, load_model, save_model

__version__ = "0.1.0"
