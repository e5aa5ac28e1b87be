"""Exception hierarchy for phase-only adjustment."""


class PhaseAdjustError(Exception):
    """Base class for all errors raised by :mod:`phaseadj`."""


class LengthMismatch(PhaseAdjustError, ValueError):
    pass


class IndexOutOfRange(PhaseAdjustError, IndexError):
    pass


class DegenerateMainBeam(PhaseAdjustError):
    """The response at the main-beam axis is numerically zero."""


class InvalidSpec(PhaseAdjustError, ValueError):
    pass


class Infeasible(PhaseAdjustError):
    """No phase-only solution exists for the requested adjustment."""


class InfeasibleEdges(Infeasible):
    """Edge lengths violate the polygon inequality."""


class TooFewActiveEdges(Infeasible):
    pass


class NoFeasiblePsi(Infeasible):
    pass


class EmptyInterval(PhaseAdjustError):
    """Feasible modulus interval is empty; the chain state drifted."""


class ZeroModulus(PhaseAdjustError):
    pass


class BrokenTriangle(PhaseAdjustError):
    pass


class EmptyArcSet(PhaseAdjustError, ValueError):
    pass
