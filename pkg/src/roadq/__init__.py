"""Road segment quality assessment and quality-aware route ranking with Mamdani fuzzy inference."""

__version__ = "0.1.0"
