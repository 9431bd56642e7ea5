import logging
import os
import tempfile
import time
from contextlib import contextmanager
from typing import Dict, Union

from subspace_sparsify.base_checker import BaseChecker
from subspace_sparsify.errors import SparsifyError

_logger = logging.getLogger(__name__)


def only_required_for_checks(*checks):
    """Decorator to store checks that are handled by a checker method as an
    attribute of the function object.

    This information is used to decide whether to call the decorated
    method or not. If none of the checks is enabled, the method will be skipped.
    """

    def store_checks(func):
        setattr(func, "checks", set(checks))  # noqa: B010
        return func

    return store_checks


def getattr_checks(obj_or_class: BaseChecker, prefix="check_"):
    """Get all the attributes callables (methods)
    that start with word 'def check_*'
    Skip the methods with attribute "checks" defined if
    none of their checks is enabled"""
    for attr in sorted(dir(obj_or_class)):
        if not attr.startswith(prefix) or not callable(getattr(obj_or_class, attr)):
            continue
        meth = getattr(obj_or_class, attr)
        meth_checks = getattr(meth, "checks", set())
        if meth_checks and not any(obj_or_class.is_message_enabled(meth_check) for meth_check in meth_checks):
            continue
        yield meth


@contextmanager
def stage(name: str, timings: Union[Dict[str, float], None] = None):
    """Label any SparsifyError escaping the block with ``name``
    and add the elapsed wall time to ``timings[name]``
    """
    start = time.perf_counter()
    try:
        yield
    except SparsifyError as err:
        if err.stage is None:
            err.stage = name
        raise
    finally:
        if timings is not None:
            timings[name] = timings.get(name, 0.0) + time.perf_counter() - start


def full_norm_path(path):
    """Expand paths in all possible ways"""
    return os.path.normpath(os.path.realpath(os.path.abspath(os.path.expanduser(os.path.expandvars(path.strip())))))


def _stage_file(path: str, content: Union[str, bytes]) -> str:
    """Write ``content`` to a temporary file next to ``path`` and return its name"""
    data = content.encode("UTF-8") if isinstance(content, str) else content
    try:
        fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", dir=os.path.dirname(path))
    except OSError as tmp_err:
        raise OSError(tmp_err.errno, tmp_err.strerror, path) from tmp_err
    try:
        with os.fdopen(fd, "wb") as tmp_file:
            tmp_file.write(data)
    except BaseException:
        os.remove(tmp_path)
        raise
    _logger.debug("staged %d bytes for %s", len(data), path)
    return tmp_path


def atomic_write_all(contents: Dict[str, Union[str, bytes]]):
    """Write every ``path: content`` pair or none of them

    All files are staged next to their targets before the first one is
    renamed into place, so an unwritable target leaves no output behind.
    Errors name the target path, never the temporary one.
    """
    staged = []
    try:
        for path, content in contents.items():
            path = full_norm_path(path)
            staged.append((_stage_file(path, content), path))
        for tmp_path, path in staged:
            try:
                os.replace(tmp_path, path)
            except OSError as replace_err:
                raise OSError(replace_err.errno, replace_err.strerror, path) from replace_err
    finally:
        for tmp_path, __ in staged:
            if os.path.exists(tmp_path):
                os.remove(tmp_path)


def atomic_write(path: str, content: Union[str, bytes]):
    """Write ``content`` next to ``path`` and rename it into place,
    so a failure never leaves a partial file behind
    """
    atomic_write_all({path: content})
