"""Exact optimal transport on finitely generated groups."""

__version__ = "0.1.0"

from .metric import (EmptySetError, MetricSpace, ValidationReport, Violation, diameter,
                     euclidean_integers, euclidean_line, hausdorff_distance, set_distance,
                     validate_metric)
from .transport import (Assignment, LipschitzWitness, MeanNotZero, MeasureError, Move,
                        SignedMeasure, TransportPlan, arens_eells_norm, kantorovich_dual,
                        optimal_assignment, optimal_coupling, solve, verify_certificate,
                        wasserstein)
from .groups import (CyclicZ, DihedralInf, DirectProduct, FunctionGroup, Group, Integers,
                     RadiusExceeded, SimplexElement, WordMetric, ZPowK, as_signed_measure,
                     convolve, group_from_descriptor, parse_word, translate, uniform_ball,
                     word_metric, word_metric_space)
from .probe import (DefectReport, Failure, ProbeTask, UniformMultiset, concentration_count,
                    defect, dihedral_bound, dihedral_folner, dihedral_min_M, dihedral_target_set,
                    dual_obstruction, matching_defect, sequential_minimize, to_uniform_multiset,
                    word_metric_task)
from .quotient import FiniteAction, QuotientSpace, lift, orbits, pushforward, quotient_metric
