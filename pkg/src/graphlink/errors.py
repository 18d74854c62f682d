"""Exception hierarchy shared across the package."""


class GraphLinkError(Exception):
    """Base class for all graphlink errors."""

    code = "error"


class InvalidId(GraphLinkError):
    """Profile identifier is empty or contains the reserved '-' separator."""

    code = "invalid_id"


class EmptyKey(GraphLinkError):
    """Attribute/relation object with an empty key."""

    code = "empty_key"


class EmptyValue(GraphLinkError):
    """Attribute object with an empty value."""

    code = "empty_value"


class SchemaError(GraphLinkError):
    """Input record does not conform to the expected schema."""

    code = "schema_error"


class MappingError(GraphLinkError):
    """CSV mapping references a column that is not in the file header."""

    code = "mapping_error"


class MalformedQuery(GraphLinkError):
    """Structured query with an empty clause key."""

    code = "malformed_query"


class NotFound(GraphLinkError):
    """Requested profile or edge does not exist."""

    code = "not_found"


class SameId(GraphLinkError):
    """A similarity edge needs two distinct profile ids."""

    code = "same_id"


class BelowThreshold(GraphLinkError):
    """Similarity score is under the store's pruning threshold."""

    code = "below_threshold"


class InvalidN(GraphLinkError):
    """n-gram size must be a positive integer."""

    code = "invalid_n"


class StorageFailure(GraphLinkError):
    """Underlying storage I/O failed."""

    code = "storage_failure"
