"""Exception types shared across the package."""


class DegenerateInputError(ValueError):
    """Input is structurally valid but carries no usable information."""


class UnsupportedSizeError(ValueError):
    """Requested problem size is outside the supported range."""


class UndefinedMetricError(ValueError):
    """Metric is mathematically undefined for the given inputs."""


class CsvFormatError(ValueError):
    """Malformed dataset file; names the offending location when known."""

    def __init__(self, message, line=None, column=None):
        where = [f"line {line}" if line is not None else None,
                 f"column {column}" if column is not None else None]
        where = [w for w in where if w]
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.column = column


class ModelFormatError(ValueError):
    """Model file is unreadable or structurally invalid."""


class ModelVersionError(ModelFormatError):
    """Model file declares an unsupported format version."""


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite during training; carries epoch/batch context."""

    def __init__(self, message, epoch, batch):
        super().__init__(f"{message} (epoch {epoch}, batch {batch})")
        self.epoch = epoch
        self.batch = batch
