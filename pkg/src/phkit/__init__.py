"""Persistent homology of Vietoris-Rips filtrations over GF(2)."""

__version__ = "0.1.0"

from .core import (PivotSet, ReductionResult, SparseBoolMatrix, antitranspose, gf2_add,
                   gf2_multiply, low, matrix_from_triplets, upper_tri_solve)
from .errors import (BenchmarkMismatch, DataError, EmptyFieldError, IndexRangeError, ParseError,
                     PHError, ShapeError, StructureError, UnknownPredicateError,
                     UnsupportedModeError)
from .ingest import (CanonicalFiltration, DistanceMatrix, PointCloud, distance_matrix,
                     latlon2euc, order_canonical_form, read_distance_matrix_csv,
                     read_point_cloud_csv, sanitize_labels)
from .kernels import (SegmentedVector, WeightInput, blockprodsum, column_weights,
                      integers_in_same_order_by_column, segmented_nonzero_compaction, sortperm,
                      sortperm_radix)
from .morse import (MorseField, SchurBlocks, morse_reduce, reorder_rows_cols, schur_complement,
                    select_morse_field)
from .reduce import (PersistenceDiagram, PersistencePair, betti_curve, clear_compress,
                     extract_generators, persist, persist_cohomology, ph_col, ph_row)
from .simplicial import FilteredComplex, Simplex, boundary_operator, build_vr_complex
