"""Model adapter for the shiftlab analytics engine.

Everything the engine must never do itself lives here: turning images
and captions into embedding files, exporting classifier prediction
logs, and executing generation manifests. The two sides share no code,
only file formats.
"""

from .errors import AdapterError

__all__ = ["AdapterError"]
__version__ = "0.1.0"
