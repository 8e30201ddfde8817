"""Exception hierarchy shared by all qidiff modules."""


class QidiffError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(QidiffError):
    """Malformed cipher config or run parameters."""


class FeasibilityError(QidiffError):
    """The requested computation exceeds the toy-scale limits."""


class TooLarge(FeasibilityError):
    def __init__(self, what, size, limit):
        self.what, self.size, self.limit = what, size, limit
        super().__init__(f"{what}: size {size} exceeds limit {limit}")


class SpaceTooLarge(FeasibilityError):
    def __init__(self, dim, cap):
        self.dim, self.cap = dim, cap
        super().__init__(f"space of dimension {dim} has more than {cap} elements")


class BadSplit(QidiffError):
    def __init__(self, rounds, total):
        super().__init__(f"split at {rounds} rounds is outside 1..{total - 1}")


class BadIndex(QidiffError):
    def __init__(self, i, width):
        super().__init__(f"component index {i} is outside 1..{width}")


class BadParams(QidiffError):
    pass
