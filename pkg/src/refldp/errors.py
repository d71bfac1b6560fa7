"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Inputs violate a structural precondition (shape, grid, config)."""


class CoefficientError(ValueError):
    """A coefficient map produced a non-finite value."""


class ConfigError(ValueError):
    """A scenario file, CSV file, or CLI invocation is malformed."""


class BlowUpError(RuntimeError):
    """Time stepping produced a non-finite or exploding state."""

    def __init__(self, step: int, time: float, h_norm: float, v_norm: float):
        self.step = int(step)
        self.time = float(time)
        self.h_norm = float(h_norm)
        self.v_norm = float(v_norm)
        super().__init__(
            f"state blew up at step {self.step} (t={self.time:.6g}, "
            f"|u|={self.h_norm:.3e}, ||u||={self.v_norm:.3e})"
        )
