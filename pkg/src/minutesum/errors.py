"""Exception hierarchy shared by every stage.

The CLI maps the three families to exit codes: ``ConfigError`` -> 2,
``DataError`` -> 3, ``NumericError`` -> 4.
"""


class MinutesumError(Exception):
    pass


class ConfigError(MinutesumError, ValueError):
    pass


class DataError(MinutesumError, ValueError):
    pass


class NumericError(MinutesumError, ArithmeticError):
    pass


class ContractError(MinutesumError, ValueError):
    """A caller violated an operation's precondition."""


class ParseError(DataError):
    def __init__(self, path, line_no, reason):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {reason}")


class IntegrityError(DataError):
    pass


class SchemaError(DataError):
    def __init__(self, field, record_id=None):
        self.field = field
        self.record_id = record_id
        where = f" in record {record_id!r}" if record_id is not None else ""
        super().__init__(f"missing or invalid field {field!r}{where}")


class NoCandidatesError(DataError):
    def __init__(self, task_id, role):
        self.task_id = task_id
        self.role = role
        super().__init__(f"no candidate utterances for task {task_id!r} ({role})")


class LookupMissError(DataError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class DegenerateInputError(DataError):
    pass


class BuildError(DataError):
    pass
