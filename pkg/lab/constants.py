"""
RunLab Constants

Budgets, thresholds and file-format constants for the laboratory.
Every budget here can be overridden through ``settings.RUNLAB`` (see
``runlab/settings.py``) or per call with an explicit keyword argument.
"""

from typing import Any

# Report schema version, bumped whenever a JSON report changes shape
REPORT_SCHEMA_VERSION = "1.0"

# Graph budgets
VERTEX_BUDGET = 10**6           # largest C(m,k) any graph operation accepts
MATERIALIZE_LIMIT = 10**6       # adjacency lists are cached up to this size
CHROMATIC_VERTEX_BUDGET = 2000  # exact chromatic number only below this

# Enumeration budgets
EXHAUSTIVE_COLORING_LIMIT = 10**7   # r^(edge_count) for exhaustive Chvatal checks
EXHAUSTIVE_FUNCTION_LIMIT = 10**7   # r^(M^k) for exhaustive minimization
EXHAUSTIVE_TUPLE_LIMIT = 10**8      # C(M,3k)*(3k)! for exhaustive impossibility checks
EXACT_STATE_BUDGET = 10**7          # window-states x steps for the exact run engine
NAIVE_ENUMERATION_LIMIT = 10**7     # M^(l+k-1) for the brute-force oracle
BRIDGE_PERMUTATION_LIMIT = 5040     # M! for the permutation identity (M <= 7)

# Tower arithmetic
TOWER_MAX_BITS = 10**6          # materialize only results with at most this many bits
TOWER_PRECISION_BITS = 128      # mantissa for real-valued tower levels

# Parallelism and sampling
DEFAULT_THREADS = 1
MC_CHUNK_SIZE = 65536           # samples per RNG stream; independent of thread count
FUNCTION_BATCH_SIZE = 4096      # function tables evaluated per numpy batch
DEFAULT_SAMPLES = 100000
DEFAULT_LOCAL_SEARCH_STEPS = 200
SEARCH_TIME_BUDGET = 30.0       # seconds
SEARCH_CLOCK_INTERVAL = 1024    # search nodes between clock checks

# Statistical acceptance
MC_ACCEPTANCE_SIGMAS = 5

# Events
EVENT_CONSTANT = "constant"
EVENT_INCREASING = "increasing"
EVENT_DECREASING = "decreasing"
RUN_EVENTS = [EVENT_CONSTANT, EVENT_INCREASING, EVENT_DECREASING]

# Modes
MODE_EXHAUSTIVE = "exhaustive"
MODE_SAMPLED = "sampled"
CHECK_MODES = [MODE_EXHAUSTIVE, MODE_SAMPLED]

# Noise models
NOISE_DISCRETE = "discrete"       # uniform on {1..M}
NOISE_CONTINUOUS = "continuous"   # uniform on [0,1], discretized by ceil(M*U)
NOISE_MODES = [NOISE_DISCRETE, NOISE_CONTINUOUS]

# Output formats
OUTPUT_FORMATS = ["json", "csv", "human"]

# Exit codes
EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_INTERNAL = 4


def budget(name: str, override: Any = None) -> Any:
    """
    Resolve a budget value.

    Args:
        name: The constant name, e.g. "VERTEX_BUDGET"
        override: Explicit per-call value; wins when not None

    Returns:
        The override, else settings.RUNLAB[name], else the module default
    """
    if override is not None:
        return override

    from django.conf import settings

    if settings.configured:
        configured = getattr(settings, "RUNLAB", {}).get(name)
        if configured is not None:
            return configured
    return globals()[name]
