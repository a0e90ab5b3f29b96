"""Preferential-attachment network evolution with PageRank / max-linear
influence scores and extreme-value analysis of their tails and clusters."""
__version__ = "0.1.0"

from .attachment import EvolutionLog, PaParams, evolve, pa_step
from .community import (CommunityPartition, classify_new_nodes, louvain_directed,
                        mean_excess)
from .errors import DataError, NetExtremesError, NoConvergenceWarning
from .generators import BiDegreeSpec, SeedSpec, build_seed, build_tbt, sample_bidegree
from .graph import DirectedGraph, ingest_snap, write_snap
from .influence import PrParams, ScoreVector, max_linear, pagerank
from .theory import SeriesMatrix, domino_step, predict_indices, synth_matrix, theory_helpers

__all__ = [
    "EvolutionLog", "PaParams", "evolve", "pa_step",
    "CommunityPartition", "classify_new_nodes", "louvain_directed", "mean_excess",
    "DataError", "NetExtremesError", "NoConvergenceWarning",
    "BiDegreeSpec", "SeedSpec", "build_seed", "build_tbt", "sample_bidegree",
    "DirectedGraph", "ingest_snap", "write_snap",
    "PrParams", "ScoreVector", "max_linear", "pagerank",
    "SeriesMatrix", "domino_step", "predict_indices", "synth_matrix", "theory_helpers",
]
