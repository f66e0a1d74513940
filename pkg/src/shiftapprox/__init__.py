"""Periodic-orbit approximation of shift-invariant measures on sequence
spaces, spliced typical points with certified Birkhoff-average bounds, and a
finite cyclic model of the covering argument behind the ergodic theorem."""

__version__ = "0.1.0"

from .approx import (
    approximate,
    approximation_error,
    longest_allowed_sequence,
    partition_tolerance,
    periodic_point_cyclic,
    periodic_point_paper,
    rationalize,
)
from .birkhoff import average, segment_average, typicality_report
from .cyclic import counting_measure, covering_inequality, factor_map, rotate, stopping_times
from .measures import MarkovSpec, Observable, check_shift_balance, ingest_trajectory, integral, markov_word_measure
from .splice import build_schedule, horizon, modulus_sequence, predicted_bounds, splice
from .symbolic import PeriodicPoint, WordMeasure, classify, empirical_measure, make_alphabet, window
