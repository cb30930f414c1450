"""
Lab exception hierarchy and consistent error payloads for the CLI.
"""


class LabError(Exception):
    """Base class for every error raised by the lab apps."""
    exit_code = 1

    def __init__(self, message, details=None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ConfigError(LabError):
    """Raised when a configuration or experiment spec is invalid."""
    exit_code = 2


class ParameterError(ConfigError, ValueError):
    """Raised when a numeric parameter is outside its legal range."""
    pass


class DataError(LabError):
    """Raised when input data cannot be used."""
    exit_code = 3


class MalformedRecordError(DataError):
    """Raised when a persisted record cannot be parsed."""

    def __init__(self, line_number, field, message):
        super().__init__(
            f"line {line_number}: field '{field}': {message}",
            details={'line': line_number, 'field': field},
        )
        self.line_number = line_number
        self.field = field


class LabelRangeError(DataError, ValueError):
    """Raised when a label lies outside its legal range."""

    def __init__(self, field, value, message=None):
        super().__init__(
            message or f"{field}={value!r} is outside its legal range",
            details={'field': field, 'value': value},
        )
        self.field = field


class UnrecoverableStreamError(DataError):
    """Raised when an eye stream has no valid record to interpolate from."""
    pass


class EmptyInputError(DataError, ValueError):
    """Raised when an operation receives an empty collection."""
    pass


class DimensionError(LabError, ValueError):
    """Raised when tensor shapes are incompatible."""
    pass


class ContractError(LabError):
    """Raised when an operation is called outside its contract."""
    pass


class UndefinedStatisticError(LabError, ValueError):
    """Raised when a statistic is undefined for the given input."""
    pass


class NonFiniteError(LabError, FloatingPointError):
    """Raised when a tensor operation produces NaN or Inf."""
    pass


class TrainingDivergedError(LabError):
    """Raised when the training loss stops being finite."""
    pass


def error_payload(exc):
    """
    Render an exception into the lab's consistent error envelope.
    """
    if isinstance(exc, LabError):
        code = exc.exit_code
        details = exc.details
        message = exc.message
    else:
        code = 1
        details = {}
        message = str(exc)

    if isinstance(details, (dict, list)) and details and not isinstance(exc, LabError):
        message = get_error_message(details)

    return {
        'success': False,
        'error': {
            'code': code,
            'message': message,
            'details': details,
        }
    }


def get_error_message(data):
    """
    Extract a human-readable error message from serializer error data.

    Nested serializer errors are flattened to a dotted field path so the
    offending field is always named.
    """
    if isinstance(data, dict):
        if 'detail' in data:
            return str(data['detail'])
        # Get first error message
        for key, value in data.items():
            if isinstance(value, dict):
                return f"{key}.{get_error_message(value)}"
            if isinstance(value, list) and value:
                return f"{key}: {value[0]}"
            elif isinstance(value, str):
                return f"{key}: {value}"
    elif isinstance(data, list) and data:
        return str(data[0])
    return "An error occurred"


def first_error_field(data):
    """
    Return the dotted path of the first field named in serializer errors.
    """
    if isinstance(data, dict):
        for key, value in data.items():
            if isinstance(value, dict):
                return f"{key}.{first_error_field(value)}"
            return str(key)
    return 'non_field_errors'
