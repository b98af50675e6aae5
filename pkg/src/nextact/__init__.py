"""Next-activity prediction for patient treatment processes.

Running cases are compared against completed ones through taxonomy-aware,
order-damped bipartite matching of their activity sequences and diagnosis
lists; the next activities of the most similar cases become ranked
predictions. Includes the full leave-one-out evaluation protocol, a CLI
and an HTTP service.
"""

from .errors import NextactError
from .eventlog import END_ACTIVITY, Case, EventLog, TraceQuery, build_logs, stats
from .predictor import PredictionResult, predict
from .similarity import SimilarityConfig, alpha_schedule, sim_cf, sim_list, sim_trace
from .taxonomy import Taxonomy, parse_icd10cm, parse_icd10pcs, sim_boolean

__version__ = "0.1.0"

__all__ = [
    "NextactError",
    "END_ACTIVITY",
    "Case",
    "EventLog",
    "TraceQuery",
    "build_logs",
    "stats",
    "PredictionResult",
    "predict",
    "SimilarityConfig",
    "alpha_schedule",
    "sim_cf",
    "sim_list",
    "sim_trace",
    "Taxonomy",
    "parse_icd10cm",
    "parse_icd10pcs",
    "sim_boolean",
    "__version__",
]
