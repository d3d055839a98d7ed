"""Information-content similarity over IS-A taxonomies.

Also provides coordination-ambiguity resolution for noun phrases and sense
confidences for groups of related nouns.
"""

from importlib import resources

from .probmodel import (
    FrequencyTable,
    ProbabilityModel,
    count_corpus,
    count_weighted,
    load_probabilities,
    to_probability,
)
from .similarity import (
    SimilarityResult,
    WeightFunction,
    sim_lin,
    sim_prob,
    sim_resnik,
    sim_wupalmer,
    wsim,
    wsim_edge,
    wsim_lc,
    wsim_weighted,
)
from .taxonomy import VIRTUAL_ROOT, Taxonomy, TaxonomyError, load_taxonomy

__version__ = "0.1.0"


def data_path(name: str):
    """Path-like handle to a bundled fixture file."""
    return resources.files(__name__).joinpath("data", name)


def load_fixture(name: str, virtual_root: bool = False):
    """Load a bundled taxonomy (``name.tax``) with its ``name.ic`` model when present."""
    t = load_taxonomy(data_path(f"{name}.tax").read_text(encoding="utf-8"), virtual_root=virtual_root)
    ic = data_path(f"{name}.ic")
    if not ic.is_file():
        return t, None
    return t, load_probabilities(t, ic.read_text(encoding="utf-8"))


__all__ = [
    "FrequencyTable", "ProbabilityModel", "SimilarityResult", "Taxonomy", "TaxonomyError",
    "VIRTUAL_ROOT", "WeightFunction", "count_corpus", "count_weighted", "data_path", "load_fixture",
    "load_probabilities", "load_taxonomy", "sim_lin", "sim_prob", "sim_resnik", "sim_wupalmer",
    "to_probability", "wsim", "wsim_edge", "wsim_lc", "wsim_weighted",
]
