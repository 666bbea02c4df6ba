"""LP problem data in dual form (min -b'y s.t. A'y <= c) and standard form."""

from __future__ import annotations

import numpy as np


class ValidationError(ValueError):
    """Problem data violates a structural invariant."""


class DimensionMismatch(ValidationError):
    pass


class NonFiniteEntry(ValidationError):
    pass


def _as_arrays(A, b, c):
    A = np.array(A, dtype=np.float64, ndmin=2, copy=True)
    b = np.array(b, dtype=np.float64, ndmin=1, copy=True)
    c = np.array(c, dtype=np.float64, ndmin=1, copy=True)
    for arr in (A, b, c):
        arr.setflags(write=False)
    return A, b, c


def _check(A: np.ndarray, b: np.ndarray, c: np.ndarray) -> None:
    if A.ndim != 2:
        raise DimensionMismatch(f"A must be 2-D, got shape {A.shape}")
    m, n = A.shape
    if m < 1 or n < 1:
        raise DimensionMismatch(f"A must have m >= 1 and n >= 1, got {A.shape}")
    if b.shape != (m,):
        raise DimensionMismatch(f"b must have shape ({m},), got {b.shape}")
    if c.shape != (n,):
        raise DimensionMismatch(f"c must have shape ({n},), got {c.shape}")
    for name, arr in (("A", A), ("b", b), ("c", c)):
        if not np.all(np.isfinite(arr)):
            raise NonFiniteEntry(f"{name} contains NaN or Inf")


class _LPData:
    __slots__ = ("A", "b", "c")

    def __init__(self, A, b, c, *, check: bool = True):
        A, b, c = _as_arrays(A, b, c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        if check:
            _check(A, b, c)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __repr__(self):
        return f"{type(self).__name__}(m={self.m}, n={self.n})"

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return (
            self.A.shape == other.A.shape
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.c, other.c)
        )

    __hash__ = None


class DualLP(_LPData):
    """``min -b'y  s.t.  A'y <= c`` with ``A`` of shape (m, n).

    Column ``A[:, i]`` is the normal of constraint ``i``. Arrays are copied
    and frozen on construction. Pass ``check=False`` to build a possibly
    malformed instance (only useful to exercise :func:`validate`).
    """

    __slots__ = ()


class StandardLP(_LPData):
    """``min c'x  s.t.  Ax = b, x >= 0``; shares its data with :class:`DualLP`."""

    __slots__ = ()


def validate(p: _LPData) -> None:
    """Raise the first violated invariant of ``p``; return ``None`` if well formed."""
    _check(p.A, p.b, p.c)


def dual_of(p: StandardLP) -> DualLP:
    validate(p)
    return DualLP(p.A, p.b, p.c)


def primal_of(p: DualLP) -> StandardLP:
    validate(p)
    return StandardLP(p.A, p.b, p.c)
