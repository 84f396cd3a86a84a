# ============================================
# EXCEPTION HIERARCHY
# ============================================
"""
Every failure the numerical layer can report derives from NullcastError.

The web layer turns these into HTTP 422 responses and the CLI maps
ConfigInvalid / HarnessIOError onto exit codes 2 / 3.
"""


class NullcastError(Exception):
    """Base class for all nullcast errors."""

    code = "nullcast_error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__doc__ or self.code)
        self.message = message or (self.__class__.__doc__ or self.code)


# ============================================
# SUBSPACE ALGEBRA
# ============================================

class RankDeficient(NullcastError):
    """Matrix does not have full column rank."""
    code = "rank_deficient"


class EmptyNullSpace(NullcastError):
    """No singular value falls below the rank threshold."""
    code = "empty_null_space"


class NotUnitary(NullcastError):
    """Rotation matrix is not unitary."""
    code = "not_unitary"


class NotOrthonormal(NullcastError):
    """Basis columns are not orthonormal."""
    code = "not_orthonormal"


class DimensionMismatch(NullcastError):
    """Operands live in different ambient dimensions."""
    code = "dimension_mismatch"


# ============================================
# SCENARIO / GEOMETRY
# ============================================

class BadDimensions(NullcastError):
    """Requested subspace dimensions are out of range."""
    code = "bad_dimensions"


class SpecInfeasible(NullcastError):
    """Uncertainty counts exceed the available subspace dimensions."""
    code = "spec_infeasible"


class Infeasible(NullcastError):
    """Pairwise geometry does not fit in the ambient space."""
    code = "infeasible"


# ============================================
# SIGNALING
# ============================================

class ZeroProjector(NullcastError):
    """Projector has rank zero."""
    code = "zero_projector"


class DegenerateColumn(NullcastError):
    """Selected projector column has a vanishing diagonal entry."""
    code = "degenerate_column"


class BadFftSize(NullcastError):
    """FFT length is shorter than the waveform."""
    code = "bad_fft_size"


class DegeneratePolynomial(NullcastError):
    """All polynomial coefficients vanish."""
    code = "degenerate_polynomial"


class ColumnUndefined(NullcastError):
    """Receiver projector has no energy at the transmitter's column."""
    code = "column_undefined"


class SingularCovariance(NullcastError):
    """Sample covariance is rank deficient and loading is disabled."""
    code = "singular_covariance"


# ============================================
# IDENTIFICATION / CONCURRENCE
# ============================================

class BadProbability(NullcastError):
    """Probability must lie strictly between 0 and 1."""
    code = "bad_probability"


class BlockLengthMismatch(NullcastError):
    """Number of frames differs from the threshold's block length."""
    code = "block_length_mismatch"


class NonConvergence(NullcastError):
    """Iterative solver did not reach the objective tolerance."""
    code = "non_convergence"


class ZeroVector(NullcastError):
    """Vector has zero norm."""
    code = "zero_vector"


class InvalidSelection(NullcastError):
    """Selection vector is malformed."""
    code = "invalid_selection"


# ============================================
# HARNESS
# ============================================

class EmptyInput(NullcastError):
    """No records to aggregate."""
    code = "empty_input"


class ConfigInvalid(NullcastError):
    """Experiment configuration failed validation."""
    code = "config_invalid"


class HarnessIOError(NullcastError):
    """Reading a config or writing results failed."""
    code = "io_error"
