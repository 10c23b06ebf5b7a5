"""Static tables for poisson-bv."""

from poisson_bv.data.root_data import ROOT_DATA, get_root_data_table

__all__ = ["ROOT_DATA", "get_root_data_table"]
