from typing import Optional


class WorkbenchError(Exception):
    """
    Base error of the workbench. Carries a human readable `detail`,
    a category name and the process exit code used by the CLI.
    """
    category = "error"
    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail

    def __str__(self):
        return f"[{self.category}] {self.detail}"


class InvalidInputError(WorkbenchError):
    category = "invalid-input"
    exit_code = 2


class ConfigurationError(WorkbenchError):
    category = "configuration"
    exit_code = 3


class PhysicalContactError(WorkbenchError):
    """Piston reached the ferrule: displacement >= rest gap."""
    category = "physical-contact"
    exit_code = 4

    def __init__(self, detail: str, scan_index: Optional[int] = None):
        if scan_index is not None:
            detail = f"scan {scan_index}: {detail}"
        super().__init__(detail)
        self.scan_index = scan_index


class UnsupportedLengthError(WorkbenchError):
    category = "unsupported-length"
    exit_code = 5


class NoPeakError(WorkbenchError):
    category = "no-peak"
    exit_code = 6


class DegenerateFitError(WorkbenchError):
    category = "degenerate-fit"
    exit_code = 7


class ShapeError(WorkbenchError):
    category = "shape"
    exit_code = 8


class UninitializedStatsError(WorkbenchError):
    category = "uninitialized-stats"
    exit_code = 9


class NonFiniteError(WorkbenchError):
    category = "non-finite"
    exit_code = 10


class RepresentationMismatchError(WorkbenchError):
    category = "representation-mismatch"
    exit_code = 11


class FormatError(WorkbenchError):
    category = "format"
    exit_code = 12


class MissingDatasetError(WorkbenchError):
    category = "missing-dataset"
    exit_code = 13
