"""Workbench for budgeted adaptive sampling of 2-D spatial fields.

Generates synthetic ground-truth scenarios, runs autonomous waypoint
agents (random, entropy, entropy+mean) under a fixed reveal budget, serves
the same budgeted protocol over HTTP for human runs, and scores every run
by reconstructing the field and computing RMSE against ground truth.
"""

from .backend import BACKEND

__all__ = ["BACKEND"]
__version__ = "0.1.0"
