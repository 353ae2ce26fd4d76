class ConfigError(ValueError):
    """Invalid or infeasible run configuration; message names the offending key."""
