"""synthkit: simulator-to-KITTI dataset toolkit.

Converts simulator sensor captures into KITTI-format annotated object
detection datasets, curates them by difficulty and source, generates weather
and accident scenario manifests, and evaluates detection traces.
"""

__version__ = "0.1.0"
