"""Exception hierarchy.

Every error carries a short machine-readable ``code`` naming the violated
condition (``"NyquistViolation"``, ``"ZeroVector"`` ...). The CLI maps the
three top-level families onto exit codes.
"""


class SpecFPError(Exception):
    code = "SpecFPError"

    def __init__(self, message: str = "", code: str | None = None):
        if code is not None:
            self.code = code
        super().__init__(f"{self.code}: {message}" if message else self.code)


class InvariantViolation(SpecFPError, ValueError):
    """A domain value failed validation; ``invariant`` names the rule."""

    code = "InvariantViolation"

    def __init__(self, type_name: str, invariant: str, detail: str = ""):
        self.type_name = type_name
        self.invariant = invariant
        msg = f"{type_name}: {invariant}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class InputError(SpecFPError, ValueError):
    """Bad argument to a numerical routine. ``code`` names the condition."""

    code = "InputError"


class ConfigInvalid(SpecFPError, ValueError):
    code = "ConfigInvalid"

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class InputMissing(SpecFPError, FileNotFoundError):
    code = "InputMissing"


class StageFailed(SpecFPError, RuntimeError):
    code = "StageFailed"

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage} failed: {cause!r}")


class ArtifactMissing(SpecFPError, FileNotFoundError):
    code = "ArtifactMissing"


def fail(code: str, message: str = "") -> InputError:
    """Build an :class:`InputError` tagged with ``code``; use as ``raise fail(...)``."""
    return InputError(message, code=code)
