import csv
import io
import os
import tempfile
import typing
from termcolor import cprint

from ppmmpy.exceptions import PPMMError


__all__ = (
    "json_dumps",
    "json_loads",
    "cprint",
    "atomic_write",
    "write_csv",
    "read_csv",
    "format_float",
)

try:
    import orjson

    def json_dumps(obj: typing.Any, *, indent: bool = False) -> str:
        # this is a wrapper for orjson.dumps to make it compatible with json.dumps
        option = orjson.OPT_INDENT_2 if indent else 0
        return orjson.dumps(obj, option=option).decode("utf-8")

    json_loads = orjson.loads
except ImportError:
    import json

    def json_dumps(obj: typing.Any, *, indent: bool = False) -> str:
        return json.dumps(obj, indent=2 if indent else None)

    json_loads = json.loads


def format_float(value: float) -> str:
    """
    Format a float so that parsing it back gives the same value.

    Parameters
    ----------
    value: float
        The value to format

    Returns
    -------
    str
        The shortest repr of the value
    """
    return repr(float(value))


def atomic_write(path: typing.Union[str, os.PathLike], text: str) -> None:
    """
    Write text to a file atomically. The text is written to a temporary file in the same
    directory which then replaces the target, so readers never see a partial file.

    Parameters
    ----------
    path: Union[str, os.PathLike]
        The file to write
    text: str
        The content of the file
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def write_csv(
    path: typing.Union[str, os.PathLike],
    header: typing.Sequence[str],
    rows: typing.Iterable[typing.Sequence[typing.Any]],
    *,
    preamble: typing.Optional[str] = None,
) -> None:
    """
    Write a header and rows to a CSV file atomically. Floats are written with repr.

    Parameters
    ----------
    path: Union[str, os.PathLike]
        The file to write
    header: Sequence[str]
        The column names
    rows: Iterable[Sequence[Any]]
        The rows to write
    preamble: Optional[str] (default: None)
        A comment line written before the header, without the leading '#'
    """

    buffer = io.StringIO()
    if preamble is not None:
        buffer.write(f"# {preamble}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [format_float(v) if isinstance(v, float) else v for v in row]
        )
    atomic_write(path, buffer.getvalue())


def read_csv(
    path: typing.Union[str, os.PathLike],
) -> typing.Tuple[typing.List[str], typing.List[typing.List[str]], typing.List[str]]:
    """
    Read a CSV file written by write_csv.

    Parameters
    ----------
    path: Union[str, os.PathLike]
        The file to read

    Raises
    ------
    PPMMError
        if the file is not UTF-8 text or not valid CSV

    Returns
    -------
    Tuple[List[str], List[List[str]], List[str]]
        The header, the rows as strings, and the comment lines without their leading '#'
    """
    comments: typing.List[str] = []
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            lines = fh.read().splitlines()
    except UnicodeDecodeError as err:
        raise PPMMError(f"malformed CSV {os.fspath(path)}: not UTF-8 text (byte {err.start})") from err
    while lines and lines[0].startswith("#"):
        comments.append(lines.pop(0)[1:].strip())
    try:
        rows = [row for row in csv.reader(lines) if row]
    except csv.Error as err:
        raise PPMMError(f"malformed CSV {os.fspath(path)}: {err}") from err
    if not rows:
        return [], [], comments
    return rows[0], rows[1:], comments
