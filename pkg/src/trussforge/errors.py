"""Exception types shared across the package."""


class TrussError(Exception):
    """Base class for all trussforge errors."""


class InvalidTopology(TrussError):
    pass


class DimensionMismatch(TrussError, ValueError):
    pass


class DegenerateMember(TrussError):
    def __init__(self, member, length):
        self.member = member
        self.length = length
        super().__init__(f"member {member} is degenerate (length {length:.3e} m)")


class AnchorNode(TrussError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"node {node} is anchored")


class ForceLimitExceeded(TrussError):
    def __init__(self, member, force, limit):
        self.member = member
        self.force = force
        self.limit = limit
        super().__init__(f"member {member}: |{force:.2f}| N exceeds limit {limit:.1f} N")


class SharedMemberConflict(TrussError):
    def __init__(self, member, nodes):
        self.member = member
        self.nodes = tuple(nodes)
        super().__init__(f"member {member} is claimed by target nodes {self.nodes}")


class NoConvergence(TrussError):
    pass


class UnderConstrained(TrussError):
    pass


class SimDiverged(TrussError):
    pass


class InvalidGeometry(TrussError):
    pass


class Unreachable(TrussError):
    pass


class EmptyWindow(TrussError, ValueError):
    pass


class ConfigError(TrussError):
    """Scenario file is malformed or refers to unknown entities."""
