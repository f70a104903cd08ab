class ExportError(Exception):
    """Export failed: bad source model, signature mismatch, or parity miss."""
