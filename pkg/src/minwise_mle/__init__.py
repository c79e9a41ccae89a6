"""Minwise and b-bit minwise hashing with maximum-likelihood estimators.

Sketch sets with :class:`HashFamily`, compare sketches into cell counts, and
estimate the intersection size with the simple single-cell estimators or the
maximum-likelihood estimators, whose asymptotic variances are also provided.
"""
from .core import (
    DEFAULT_UNIVERSE,
    ContingencyTable,
    PairCounts3,
    PairGroundTruth,
    SetRecord,
    UniverseConfig,
    ValidationError,
    pair_ground_truth_from_sets,
    validate_ground_truth,
)
from .hashing import (
    BBitSketch,
    HashFamily,
    MinwiseSketch,
    compare_bbit,
    compare_minwise,
    sketch_minwise,
    splitmix64,
    truncate_to_bbit,
)
from .minwise import (
    EstimateResult,
    estimate_mle3,
    estimate_simple,
    three_cell_probs,
    variance_mle3,
    variance_simple,
)
from .bbit import GroupingScheme, RateTriple, cell_matrix, cell_prob, grouped_probs, summary_probs
from .mle import CellModel, MleSolution, bbit_model, fisher_info, minwise_model, solve_mle
from .sketchfile import read_sketch, write_sketch
from .analysis import SimulationSpec, VarianceGridSpec, run_simulation, variance_ratio_grid

__all__ = [name for name in dir() if not name.startswith("_")]
