"""Exception types raised across the package."""


class VisComplexityError(Exception):
    """Base class for all errors this package raises on purpose."""


class CorruptImage(VisComplexityError):
    """Image bytes could not be decoded."""


class InvalidDimensions(VisComplexityError):
    """Requested raster dimensions are not positive."""


class ImageTooSmall(VisComplexityError):
    """Image is smaller than the 2x2 window the ordinal analysis needs."""


class InvalidPatchSize(VisComplexityError):
    """Patch size does not evenly divide the working resolution."""


class ParseError(VisComplexityError):
    """Malformed detection record; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownClass(VisComplexityError):
    """Detection class name outside the fixed vocabulary."""


class DuplicateImage(VisComplexityError):
    """Same image id appears twice in one detection stream."""


class SchemaError(VisComplexityError):
    """Metadata file is missing a required column."""


class RowError(VisComplexityError):
    """Malformed metadata row; collected per row, never fatal on its own."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class UnknownSupergenre(VisComplexityError):
    """Genre label outside the canonical supergenre set."""


class UnmappedLabel(VisComplexityError):
    """Raw genre label absent from the genre map."""


class EmptyCorpus(VisComplexityError):
    """No albums available to bin into periods."""


class MissingMetrics(VisComplexityError):
    """Metadata references images that have no cached metric record."""

    def __init__(self, refs: list[str]):
        preview = ", ".join(refs[:5])
        more = f" (+{len(refs) - 5} more)" if len(refs) > 5 else ""
        super().__init__(f"{len(refs)} image(s) without metrics: {preview}{more}")
        self.refs = refs
