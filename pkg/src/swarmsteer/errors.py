"""Exception hierarchy for the simulation library."""


class SwarmSteerError(Exception):
    """Base class for all library errors."""


class IntegrationError(SwarmSteerError):
    def __init__(self, message, agent=None, step=None):
        self.agent = agent
        self.step = step
        where = []
        if step is not None:
            where.append(f"step {step}")
        if agent is not None:
            where.append(f"agent {agent}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class FrameDegeneracyError(SwarmSteerError):
    pass


class CollocationError(SwarmSteerError):
    pass


class DomainExitError(SwarmSteerError):
    pass


class ProjectionError(SwarmSteerError):
    pass


class AlignmentError(SwarmSteerError):
    pass


class InsufficientAgentsError(SwarmSteerError):
    pass


class DegenerateNeighborhoodError(SwarmSteerError):
    pass


class ContractViolation(SwarmSteerError):
    pass


class ConfigError(SwarmSteerError):
    """Malformed experiment configuration; ``key`` is a dotted path."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if key is not None:
            prefix += f"{key}: "
        super().__init__(prefix + message)


class SchemaError(SwarmSteerError):
    pass


class SimulationError(IntegrationError):
    """A module error raised inside the run loop, tagged with step and agent."""
