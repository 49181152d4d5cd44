"""rankcorrect: turn almost-commuting matrix tuples into exactly commuting ones.

The distance that matters throughout is the rank metric: the size of a matrix
is rank/d, and the distance between two tuples is the largest normalized rank
of a coordinatewise difference.  The package takes a tuple of unitary or
self-adjoint matrices whose pairwise commutators have small rank and produces
a simultaneously diagonalizable tuple nearby, together with the certificates
(commutative subspaces, polynomial models of invariant balls, joint spectra)
that each stage of the construction is built on.
"""

__version__ = "0.1.0"

from .linalg import (  # noqa: F401
    MatrixExact,
    MatrixFloat,
    Scalar,
    Subspace,
    kernel,
    image,
    preimage,
    normalized_rank,
    numerical_rank,
)
from .tuples import MatrixTuple, Word, commutator_defect, rank_distance, star_close  # noqa: F401
from .polyring import Ideal, Poly, groebner_basis, macaulay_check  # noqa: F401
from .ballspace import BallSpace, NotRegular, RegularBall, check_regular, grow_ball  # noqa: F401
from .diagonalize import LocalModel, build_local_model, find_separating_points  # noqa: F401
from .pipeline import CorrectionResult, MultiBallspace, Schedule, correct  # noqa: F401
from .harness import InstanceSpec, Report, run_experiment, verify_suite  # noqa: F401
