"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid oscillator parameters or state moments."""


class StepSizeError(ValueError):
    """Per-step jump probability exceeds the Bernoulli-thinning cap."""


class ResolutionError(ValueError):
    """Quadrature grid too coarse for the requested basis size."""


class ParseError(ValueError):
    """Configuration document rejected; carries the offending line and key."""

    def __init__(self, message, line=None, key=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if key is not None:
            loc.append(f"key '{key}'")
        super().__init__(f"{', '.join(loc)}: {message}" if loc else message)
        self.line = line
        self.key = key
