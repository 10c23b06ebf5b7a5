"""Algorithms: root data, Fuchsian series, geometry, transforms and boundary values."""

from poisson_bv.engines import boundary, fuchsian, geometry, rootdata, transforms

__all__ = ["boundary", "fuchsian", "geometry", "rootdata", "transforms"]
