"""Exception types shared across the package."""


class PointQAError(Exception):
    """Base class for all package-specific errors."""


class InvalidGeometryError(PointQAError, ValueError):
    """A box or point violates its geometric invariants."""


class CorruptInputError(PointQAError, ValueError):
    """An annotation file has too many malformed records to trust."""

    def __init__(self, skipped: int, total: int, path: str = "") -> None:
        self.skipped = skipped
        self.total = total
        self.path = path
        super().__init__(
            f"{skipped}/{total} malformed records in {path or 'input'} "
            f"(more than 10% of the file)"
        )


class CorruptFeatureError(PointQAError, ValueError):
    """A feature file failed header or length validation."""

    def __init__(self, message: str, offset: int | None = None) -> None:
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class ConfigurationError(PointQAError, ValueError):
    """A builder, model, or training configuration is invalid."""


class ContractError(PointQAError, ValueError):
    """An operation was called outside its documented contract."""


class UnmappedClassError(PointQAError, KeyError):
    """An object class is missing from the supercategory map."""


class TrainingDivergedError(PointQAError, RuntimeError):
    """Training loss became non-finite."""
