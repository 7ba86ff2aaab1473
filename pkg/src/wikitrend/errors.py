"""Exception types shared across the package."""


class WikiTrendError(Exception):
    """Base class for all errors raised by wikitrend."""


class FilenameError(WikiTrendError, ValueError):
    """A dump file name does not follow ``pagecounts-YYYYMMDD-HH0000[.gz]``."""


class IngestError(WikiTrendError):
    """A whole dump file (or directory) could not be read."""

    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}")
        self.path = str(path)
        self.reason = reason


class InvalidKeywordError(WikiTrendError, ValueError):
    pass


class KeywordListError(WikiTrendError):
    pass


class EmptyResultError(WikiTrendError):
    """Resampling left no complete period."""


class AlignmentError(WikiTrendError):
    pass


class MetricInputError(WikiTrendError, ValueError):
    pass


class InternalConsistencyError(WikiTrendError):
    """A computed value is outside its mathematically possible range."""


class SeriesFormatError(WikiTrendError, ValueError):
    pass


class AnalysisError(WikiTrendError):
    pass
