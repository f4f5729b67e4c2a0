class SimulationError(RuntimeError):
    """Base class for numerical failures (CLI exit code 3)."""


class StepUnstable(SimulationError):
    """Trace drift or loss of positivity beyond tolerance; usually dt is too large."""


class DegenerateNoise(SimulationError):
    """A measurement record was requested but eta * gamma == 0."""


class TailNotConverged(SimulationError):
    """Population outside the final states |G,0,n> is still too large at readout."""


class NoFeasibleTime(SimulationError):
    """No pumping duration on the grid satisfies the multi-photon constraint."""


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key: str, reason: str):
        self.key = key
        self.reason = reason
        super().__init__(f"{key}: {reason}")
