# backend/satlab/errors.py

EXIT_PRECONDITION = 3
EXIT_CONTRACT = 4


class SatlabError(Exception):
    """
    Base error for satlab.
    The CLI turns it into a process exit with `exit_code`.
    """

    exit_code = EXIT_PRECONDITION


class PreconditionError(SatlabError, ValueError):
    """Input outside the domain an operation is defined on."""


class FormulaSyntaxError(PreconditionError):
    def __init__(self, message: str, text: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.text = text
        self.offset = offset


class NeverDistinguishableError(PreconditionError):
    """No finite number of trials separates the two probabilities."""


class ContractViolationError(SatlabError):
    exit_code = EXIT_CONTRACT


class QuadratureError(SatlabError):
    exit_code = EXIT_CONTRACT


class ResultsFormatError(SatlabError):
    exit_code = EXIT_CONTRACT

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number
