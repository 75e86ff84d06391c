"""Private and secure distributed matrix multiplication over prime fields."""

from .errors import (PSDMMError, ZeroInverse, FieldTooSmall, ModulusMismatch, DimensionMismatch,
                     IndivisibleDimensions, RaggedBlocks, DuplicatePoints, CountMismatch,
                     SingularSystem, NotEnoughResponses, NonMdsExponents, ConfigInvalid)
from .field import (DEFAULT_MODULUS, MERSENNE_61, FieldElement, Modulus, fp_inv, fp_pow,
                    make_rng, sample_distinct_points)
from .linalg import BlockGrid, MatrixF, assemble_blocks, matmul, partition, random_matrix
from .exponents import (ExponentPlan, Variant, baseline_thresholds, make_plan, mds_plan,
                        mds_plan_large_field, replicated_plan, verify_plan)
from .codec import MatrixPoly, eval_matrix_poly, lagrange_interpolate, solve_monomial_system
from .replicated import decode, encode_share, make_queries, server_compute, server_encode_library
from .mds import (encode_storage, make_mds_queries, mds_decode, mds_server_compute,
                  reconstruct_library)
from .simulator import CostReport, ExperimentConfig, ExperimentResult, run_experiment, tradeoff_curve
from .audit import AuditReport, query_indistinguishability_test, share_uniformity_test

__version__ = "0.1.0"
