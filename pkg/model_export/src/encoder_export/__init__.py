"""Encoder asset export tooling for the ddr package."""

from .errors import ExportError
from .export import ExportManifest, export_encoders
from .stub import make_stub_fixtures

__version__ = "0.1.0"

__all__ = ["ExportError", "ExportManifest", "export_encoders", "make_stub_fixtures", "__version__"]
