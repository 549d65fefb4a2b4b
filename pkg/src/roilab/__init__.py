"""roilab: ROI video compression testbed.

Pipeline: procedural scene synthesis -> segmentation-driven CTU delta-QP
maps -> lambda-domain rate-controlled block encoding -> per-category
quality reports.
"""

__version__ = "0.1.0"

from .errors import CorruptInputError, DataError

__all__ = ["CorruptInputError", "DataError", "__version__"]
