# Copyright (c) 2026 The causalicm developers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this software
# and associated documentation files (the "Software"), to deal in the Software without
# restriction, including without limitation the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the Software, and to permit persons to whom the
# Software is furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all copies or
# substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING
# BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND
# NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM,
# DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE.


class CausalIcmError(Exception):
    """Base class for errors the command line turns into exit codes."""

    exit_code = 1

    def __init__(self, message):
        super(CausalIcmError, self).__init__(message)
        self.message = message


class UsageError(CausalIcmError):
    """Arguments that do not fit together, such as mismatched dimensions."""

    exit_code = 2


class ValidationError(CausalIcmError):
    """A value outside its allowed range. The pointer names the offending config field."""

    exit_code = 2

    def __init__(self, message, pointer=None):
        if pointer is not None:
            message = "{0}: {1}".format(pointer, message)
        super(ValidationError, self).__init__(message)
        self.pointer = pointer


class DataShapeError(CausalIcmError):
    """Data that parses but cannot be modelled, e.g. an empty (study, arm) cell."""

    exit_code = 3


class NumericalError(CausalIcmError):
    """A factorization or optimization that failed after every fallback."""

    exit_code = 4

    def __init__(self, message, diagnostics=None):
        super(NumericalError, self).__init__(message)
        self.diagnostics = diagnostics or {}
