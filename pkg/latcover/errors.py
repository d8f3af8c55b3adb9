"""Exception hierarchy shared by the library and the command line."""


class LatcoverError(Exception):
    """Base class for every error raised by latcover."""


# ============= GEOMETRY =============

class DegenerateInput(LatcoverError):
    """Points or polytopes that are not full-dimensional where that is required."""


class UnboundedInput(LatcoverError):
    """A halfspace system that does not bound a polytope."""


class DimensionMismatch(LatcoverError):
    """Operands living in different ambient dimensions."""


# ============= COVERINGS =============

class NotACovering(LatcoverError):
    """An audit that needs a certified covering was handed something else."""


class ZeroMultiplicity(LatcoverError):
    """A sampled point of K was not covered by any translate."""


class DepthExhausted(LatcoverError):
    """The covering verifier went Inconclusive before the requested tolerance."""


class AuditFailure(LatcoverError):
    """An inequality that must hold for genuine coverings came out false."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


# ============= SEARCH =============

class NoCoveringFound(LatcoverError):
    """No candidate lattice certified within the search budget."""


# ============= INPUT =============

class MalformedInput(LatcoverError):
    """A polytope, lattice or config file that does not match its schema."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        if location:
            message = f"{message} (at {location})"
        super().__init__(message)


# ============= COMMAND LINE =============

class CommandError(LatcoverError):
    """Stops a subcommand with an exit code; `payload` is still written when present."""

    def __init__(self, exit_code: int, detail: str, payload=None):
        super().__init__(detail)
        self.exit_code = exit_code
        self.detail = detail
        self.payload = payload
