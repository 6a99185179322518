"""Grid-encoded document field extraction with a from-scratch segmentation network."""

__version__ = "0.1.0"
