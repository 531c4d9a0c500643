"""Text checkpoint format shared by the encoder, the span head, and the
classifiers: one parameter per line, `name TAB dim,dim TAB values`, with
values serialized via shortest round-trip repr so reloads are bit-exact.
"""

import numpy as np

from .errors import ParseError, ValidationError
from .numgrad import Parameter


def save_checkpoint(path: str, params: list[Parameter]) -> None:
    names = [p.name for p in params]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise ValidationError(f"duplicate parameter names: {dupes}")
    with open(path, "w", encoding="utf-8") as fh:
        for p in params:
            shape = ",".join(str(d) for d in p.shape)
            values = " ".join(repr(float(v)) for v in p.data.reshape(-1))
            fh.write(f"{p.name}\t{shape}\t{values}\n")


def load_checkpoint(path: str) -> dict[str, np.ndarray]:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError:
        raise ParseError(f"checkpoint not found: {path}") from None
    out: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected name TAB shape TAB values")
        name, shape_text, values_text = parts
        if name in out:
            raise ParseError(f"{path}:{lineno}: duplicate parameter {name!r}")
        try:
            shape = tuple(int(d) for d in shape_text.split(","))
            values = np.array(values_text.split(), dtype=np.float64)
            out[name] = values.reshape(shape)
        except ValueError:
            raise ParseError(f"{path}:{lineno}: malformed parameter record") from None
    return out


def restore_parameters(params: list[Parameter], state: dict[str, np.ndarray]) -> None:
    """Copy checkpoint arrays into live parameters, validating shapes."""
    for p in params:
        if p.name not in state:
            raise ValidationError(f"checkpoint missing parameter {p.name!r}")
        arr = state[p.name]
        if arr.shape != p.shape:
            raise ValidationError(
                f"checkpoint parameter {p.name!r} has shape {arr.shape}, "
                f"expected {p.shape}"
            )
        p.data[...] = arr
