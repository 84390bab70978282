"""Numerical laboratory for strict convexity and strict plurisubharmonicity of normed spaces."""

from .spaces import (INF, NormAxiomReport, NormedSpace, ScalarField, block_space, check_norm_axioms,
                     custom_space, lp_space, make_space, weighted_lp_space)
from .maps import DiscMap, PolySelfMap, SegmentMap, compose_with_poly_map, eval_disc, eval_segment
from .means import (ConvexReshaper, ScalarFunction, ZeroProfile, circle_mean, jensen_extended_check,
                    jensen_formula_residual, jensen_vector_check, midpoint_gap, psh_gap,
                    supporting_affine)
from .certify import (EPS_FLAT, Verdict, equivalence_crosscheck, flat_disc_search,
                      flat_segment_search, flatness, strict_verdict, strong_mmp_check)
from .direct_integral import (MeasurableFamily, MeasureSpace, Section, approximate_simple,
                              build_space, decomposition_check, embed_component, family,
                              section_norm_p)
from .harness import SuiteConfig, day_pipeline, direct_pipeline, run_suite
from .report import emit_report

__version__ = "0.1.0"
