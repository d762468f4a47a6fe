"""Seed-reproducible simulator and verification harness for the
multiplicative coalescent with linear deletion: graphical and event-driven
engines over a shared exponential clock field, truncation sandwich bounds,
and the finite-n frozen percolation pre-limit with its rescaling."""

from .clock_field import ClockField, EventClockView
from .errors import InvalidInput, InvariantViolation
from .events import deleted_mass_up_to, run_clocked, run_gillespie
from .feller import coupled_distance, feller_sweep, ks_two_sample, power_law_reference
from .frozen_percolation import (
    FPConfig,
    fp_mcld_compare,
    run_fp,
    sample_critical_er,
    scale_trajectory,
)
from .graphical import (
    GraphRealization,
    build_graph,
    lightning_recursion,
    realize,
    s2_growth_estimate,
    state_at,
    trajectory,
    truncated_realization,
)
from .mass_state import (
    OrderedMassVector,
    WeightedPartition,
    compare_via_s2,
    dist,
    ordered,
    s2_of_partition,
    truncate,
)
from .multigraph import ComponentMultigraph, classify_bad_bruteforce
from .trajectory import Event, Trajectory
from .truncation import (
    SplitRealization,
    TruncationReport,
    bipartite_bound,
    classify_bad,
    component_multigraph,
    feller_budget,
    good_component_check,
    sandwich_graphs,
    split,
    truncation_bound,
    truncation_report,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
