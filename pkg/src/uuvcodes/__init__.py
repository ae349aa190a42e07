"""Soft-decision decoded (U|U+V) codes over prime-power fields.

Layers: finite-field kernels (galois), q-ary symmetric channel reliability
transforms (channel), algebraic soft-decision RS list decoding (rs_kv), the
recursive generalized (U|U+V) construction and decoder (uuv), channel
expectation analysis and FER experiments (analysis), a McEliece-style
cryptosystem on top (mceliece), and a CLI (cli)."""

from .channel import (ColumnStats, QSCParams, column_stats, qsc_column,
                      qsc_matrix, qsc_sample, reliability_affine_remap,
                      reliability_product, reliability_product_matrix,
                      reliability_remap_matrix, reliability_sum,
                      reliability_sum_matrix, renormalize)
from .errors import (BadMagic, CorruptLength, DecodeFailure, DecryptionFailure,
                     DivisionByZero, DuplicateEvaluationPoint, EmptyList,
                     InfeasibleConstraints, InvalidRatePlan, NotPrimePower,
                     ReducibleModulus, TooLarge, UUVError, VersionMismatch,
                     ZeroDenominator, ZeroScale)
from .galois import FieldContext, field_new
from .rs_kv import (BivariatePoly, RSCode, hard_multiplicity, kv_decode,
                    kv_decode_hard, kv_factorize, kv_interpolate,
                    kv_multiplicity, kv_success_predicate, multiplicity_cost,
                    rs_encode, wdeg_budget)
from .uuv import (DiagonalQuadruple, Leaf, Node, build_matrices,
                  distance_lower_bound, dual_quadruple, identity_quadruple,
                  min_distance_bruteforce, plain_tree, uuv_encode,
                  uuv_soft_decode, uuv_soft_decode_message)
from .analysis import (LABELS, FERResult, RunConfig, ThresholdPoint,
                       expectation_closed_form, expectation_monte_carlo,
                       fer_experiment, gs_threshold, threshold_curve,
                       uv1_gs_crossover, uv1_threshold, uv2_threshold_derived,
                       uv2_threshold_paper, write_fer_csv, write_threshold_csv)
from .mceliece import (PublicKey, SecretKey, calibrate_t, decrypt, encrypt,
                       key_io, keygen, load_key, save_key)

__version__ = "0.1.0"
