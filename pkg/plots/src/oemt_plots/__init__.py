"""Figure rendering for transducer result bundles.

Consumes bundles written by the `oemt` command line (CSV tables plus JSON
sidecars) and produces deterministic PNG or SVG figures. Bundles are strictly
read-only input; no physics is recomputed here.
"""

from .bundle import Bundle, PlotError, Table
from .render import KINDS, PlotJob, render
from . import cli

__version__ = "0.1.0"

__all__ = ["Bundle", "KINDS", "PlotError", "PlotJob", "Table", "cli",
           "render"]
