"""JSON encoding helpers for complex numbers and arrays."""

from typing import Any

import numpy as np


def complex_to_pair(value: complex) -> list[float]:
    """Encode a complex number as [re, im]."""
    value = complex(value)
    return [float(value.real), float(value.imag)]


def pair_to_complex(pair: Any) -> complex:
    """Decode [re, im] (or a bare real number) into a complex number."""
    if isinstance(pair, (int, float)):
        return complex(pair)
    if isinstance(pair, (list, tuple)) and len(pair) == 2:
        return complex(float(pair[0]), float(pair[1]))
    raise ValueError(f"Expected [re, im] pair, got {pair!r}")


def encode_array(values: np.ndarray) -> list:
    """Encode a complex array of any shape as nested lists of [re, im] pairs."""
    values = np.asarray(values, dtype=complex)
    if values.ndim == 0:
        return complex_to_pair(complex(values))
    return [encode_array(row) for row in values]


def decode_array(data: Any) -> np.ndarray:
    """Inverse of encode_array."""
    if _is_pair(data) or isinstance(data, (int, float)):
        return np.asarray(pair_to_complex(data), dtype=complex)
    return np.asarray([decode_array(item) for item in data], dtype=complex)


def _is_pair(data: Any) -> bool:
    return (
        isinstance(data, (list, tuple))
        and len(data) == 2
        and all(isinstance(x, (int, float)) for x in data)
    )
