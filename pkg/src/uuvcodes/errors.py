"""Exception types shared across the package.

Class names double as the error codes surfaced by the CLI, so they are kept
short and descriptive rather than suffixed with -Error.
"""


class UUVError(Exception):
    """Base class for everything raised deliberately by this package."""


# --- field construction / arithmetic ---------------------------------------

class NotPrimePower(UUVError, ValueError):
    """Field order is not a prime power in the supported range."""


class ReducibleModulus(UUVError, ValueError):
    """A supplied (or baked-in) extension modulus failed the irreducibility check."""


class DivisionByZero(UUVError, ZeroDivisionError):
    """Multiplicative inverse of zero requested."""


# --- polynomials ------------------------------------------------------------

class DuplicateEvaluationPoint(UUVError, ValueError):
    """Interpolation received repeated x-coordinates."""


# --- reliability transforms -------------------------------------------------

class ZeroDenominator(UUVError, ArithmeticError):
    """A pointwise product column summed to zero and cannot be normalised."""


class ZeroScale(UUVError, ValueError):
    """Affine index remap with scale 0 is not a bijection."""


# --- interpolation / decoding -----------------------------------------------

class InfeasibleConstraints(UUVError, RuntimeError):
    """Interpolation could not produce a nonzero polynomial (should not happen
    when the monomial budget exceeds the constraint count)."""


class EmptyList(UUVError, RuntimeError):
    """List decoding returned no candidate codeword."""


class DecodeFailure(UUVError, RuntimeError):
    """A recursive decoder stage failed; carries the failing stage in args."""


class TooLarge(UUVError, ValueError):
    """An exhaustive computation was requested beyond its guard rail."""


# --- key generation / crypto ------------------------------------------------

class InvalidRatePlan(UUVError, ValueError):
    """Requested component dimensions are out of range for the code length."""


class DecryptionFailure(UUVError, RuntimeError):
    """Decryption produced no codeword within the design error weight."""


# --- key serialisation ------------------------------------------------------

class BadMagic(UUVError, ValueError):
    """Key blob does not start with the expected magic bytes."""


class VersionMismatch(UUVError, ValueError):
    """Key blob has an unsupported format version."""


class CorruptLength(UUVError, ValueError):
    """Key blob is truncated, has trailing garbage, or fails its checksum."""
