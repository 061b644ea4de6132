class AdapterError(Exception):
    """Raised for bad inputs, malformed files, and unknown model specs."""
