"""Token-embedding tables: load, synthesize, persist.

On-disk format is word2vec-style text (UTF-8, LF): a ``<count> <dim>``
header line, then one ``<token> <v1> ... <vdim>`` row per token with
single-space separators and floats written with 17 significant digits, which
round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, FormatError, MissingTokenError

DIGITS = tuple("0123456789")

# Token order fixes the RNG consumption order, so synth tables are a pure
# function of (dim, seed).
SYNTH_TOKENS = DIGITS + (".", "[F]", "[/F]", "[PAUSE]")


class EmbeddingTable:
    """Immutable-by-convention map from token strings to float64 vectors."""

    def __init__(self, entries: dict[str, np.ndarray]):
        if not entries:
            raise DomainError("embedding table needs at least one entry")
        vectors = {}
        dim: int | None = None
        for token, values in entries.items():
            vec = np.asarray(values, dtype=np.float64)
            if vec.ndim != 1 or vec.size == 0:
                raise DomainError(f"vector for {token!r} must be 1-D and non-empty")
            if dim is None:
                dim = int(vec.size)
            elif vec.size != dim:
                raise DomainError(
                    f"vector for {token!r} has length {vec.size}, expected {dim}"
                )
            vectors[token] = vec
        self.dim: int = dim  # type: ignore[assignment]
        self._entries = vectors

    def __contains__(self, token: str) -> bool:
        return token in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def tokens(self) -> list[str]:
        return list(self._entries)

    def vector(self, token: str) -> np.ndarray:
        try:
            return self._entries[token]
        except KeyError:
            raise MissingTokenError(token) from None

    def digit_matrix(self) -> np.ndarray:
        """The vectors for "0".."9" stacked as a C-contiguous (10, dim) array.

        This is the layout the range-aggregation kernels index by digit value.
        """
        rows = [self.vector(d) for d in DIGITS]
        return np.ascontiguousarray(np.stack(rows))

    def items(self):
        return self._entries.items()


def synth_table(dim: int, seed: int) -> EmbeddingTable:
    """Deterministic unit-norm random vectors for digits and special tokens.

    Same (dim, seed) always yields a bit-identical table.
    """
    if dim < 2:
        raise DomainError(f"dim must be >= 2, got {dim}")
    if seed < 0:
        raise DomainError(f"seed must be non-negative, got {seed}")
    rng = np.random.default_rng(seed)
    entries = {}
    for token in SYNTH_TOKENS:
        vec = rng.standard_normal(dim)
        entries[token] = vec / np.linalg.norm(vec)
    return EmbeddingTable(entries)


def _format_value(x: float) -> str:
    return format(x, ".17g")


def save_table(table: EmbeddingTable, path: str) -> None:
    """Write *table* in the text format; load_table inverts this exactly."""
    lines = [f"{len(table)} {table.dim}"]
    for token, vec in table.items():
        lines.append(token + " " + " ".join(_format_value(v) for v in vec))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_table(path: str) -> EmbeddingTable:
    """Parse a text-format embedding file.

    Raises FormatError on a bad header, wrong column count, duplicate token,
    or non-finite value; OSError propagates for file-system failures.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError("empty file")
    header = lines[0].split(" ")
    if len(header) != 2:
        raise FormatError(f"bad header line {lines[0]!r}")
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError:
        raise FormatError(f"bad header line {lines[0]!r}") from None
    if count < 1 or dim < 1:
        raise FormatError(f"bad header counts {lines[0]!r}")
    rows = [line for line in lines[1:] if line]
    if len(rows) != count:
        raise FormatError(f"header promises {count} rows, file has {len(rows)}")
    entries: dict[str, np.ndarray] = {}
    for line in rows:
        fields = line.split(" ")
        if len(fields) != dim + 1:
            raise FormatError(
                f"row for {fields[0]!r} has {len(fields) - 1} values, expected {dim}"
            )
        token = fields[0]
        if token in entries:
            raise FormatError(f"duplicate token {token!r}")
        try:
            values = [float(f) for f in fields[1:]]
        except ValueError:
            raise FormatError(f"unparseable value in row for {token!r}") from None
        if not all(math.isfinite(v) for v in values):
            raise FormatError(f"non-finite value in row for {token!r}")
        entries[token] = np.array(values, dtype=np.float64)
    return EmbeddingTable(entries)
