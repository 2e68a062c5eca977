from typing import Optional


class WStreamError(Exception):
    """Base class of every error raised by the partitioning toolkit."""


class ConfigurationError(WStreamError, ValueError):
    """Invalid partitioner, plan or command configuration."""


class EdgeListParseError(WStreamError, ValueError):
    def __init__(self, line_number: int, line: str, reason: str) -> None:
        self.line_number = line_number
        self.line = line
        self.reason = reason
        super().__init__(f"Line {line_number}: {reason} ({line!r})")


class EmptyWindowError(WStreamError, IndexError):
    """Operation needs a candidate but the stream window is empty."""


class VertexNotFoundError(WStreamError, KeyError):
    def __init__(self, vertex: int) -> None:
        self.vertex = vertex
        super().__init__(f"Vertex {vertex} is not in the stream window.")


class AlreadyAssignedError(WStreamError, ValueError):
    def __init__(self, vertex: int, partition: int) -> None:
        self.vertex = vertex
        self.partition = partition
        super().__init__(f"Vertex {vertex} is already assigned to partition {partition}.")


class MetadataFormatError(WStreamError, ValueError):
    def __init__(
        self, reason: str, line_number: Optional[int] = None, offset: Optional[int] = None
    ) -> None:
        self.reason = reason
        self.line_number = line_number
        self.offset = offset
        location = (
            f" (line {line_number}, byte offset {offset})"
            if line_number is not None
            else ""
        )
        super().__init__(f"Corrupt metadata file{location}: {reason}")


class CapacityExhaustedError(WStreamError, RuntimeError):
    """Every partition reached the LDG capacity."""


class IncompleteAssignmentError(WStreamError, ValueError):
    def __init__(self, vertex: int) -> None:
        self.vertex = vertex
        super().__init__(f"Vertex {vertex} has not been assigned to any partition.")


class DataError(WStreamError, OSError):
    """Dataset cannot be read, fetched or trusted."""


class DatasetIntegrityError(DataError):
    """Checksum of a downloaded or cached dataset does not match."""


class DatasetUnavailableError(DataError):
    """Dataset is neither cached nor downloadable."""
