"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: validation problems (bad inputs,
malformed files, out-of-range parameters) exit 2, algorithmic degeneracy
exits 3.
"""


class FluidLabelError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(FluidLabelError):
    """Invalid input data, parameters, or file contents."""


class FormatError(ValidationError):
    """A codec rejected malformed bytes."""


class SeedConflictError(ValidationError):
    """Two different nonzero classes were seeded into one superpixel block."""

    def __init__(self, block: int, classes: tuple[int, int]):
        self.block = block
        self.classes = classes
        super().__init__(
            f"superpixel block {block} contains point annotations of "
            f"conflicting classes {classes[0]} and {classes[1]}"
        )


class DegenerateJointError(FluidLabelError):
    """No pixel cleared any class threshold; the joint distribution is undefined."""
