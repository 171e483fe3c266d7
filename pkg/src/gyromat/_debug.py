"""Opt-in output validation.

Closed-form results are trusted by default. Inside ``with checked_outputs():``
operations additionally validate what they return (SPD floor, orthogonality of
conjugating matrices). The flag lives in a context variable so concurrent
callers do not affect each other.
"""

import contextlib
import contextvars

_enabled = contextvars.ContextVar("gyromat_checked_outputs", default=False)


def checks_enabled():
    return _enabled.get()


@contextlib.contextmanager
def checked_outputs(enabled=True):
    token = _enabled.set(enabled)
    try:
        yield
    finally:
        _enabled.reset(token)
