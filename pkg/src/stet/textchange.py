"""Plain text changes and position mapping.

All offsets are UTF-8 byte offsets. Multi-byte code points are never split by
the engine itself; changes arriving over the wire are validated against code
point boundaries by the caller that decoded them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import InvalidChange


@dataclass(frozen=True, slots=True)
class TextChange:
    """Replace [start, end) with `insert`. Pure insertion when start == end."""

    start: int
    end: int
    insert: str

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise InvalidChange(f"bad change range [{self.start}, {self.end})")

    @property
    def growth(self) -> int:
        """Signed byte-length delta caused by this change."""
        return len(self.insert.encode("utf-8")) - (self.end - self.start)

    def apply(self, text: str) -> str:
        data = text.encode("utf-8")
        if self.end > len(data):
            raise InvalidChange(
                f"change [{self.start}, {self.end}) exceeds document length {len(data)}"
            )
        try:
            return (data[: self.start] + self.insert.encode("utf-8")
                    + data[self.end :]).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidChange(
                f"change [{self.start}, {self.end}) splits a code point") from exc

    def inverse(self, text: str) -> TextChange:
        """The change that undoes self, given the text self applies to."""
        data = text.encode("utf-8")
        if self.end > len(data):
            raise InvalidChange(
                f"change [{self.start}, {self.end}) exceeds document length {len(data)}"
            )
        try:
            removed = data[self.start : self.end].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidChange(
                f"change [{self.start}, {self.end}) splits a code point") from exc
        insert_bytes = len(self.insert.encode("utf-8"))
        return TextChange(self.start, self.start + insert_bytes, removed)

    def to_wire(self) -> dict:
        return {"from": self.start, "to": self.end, "insert": self.insert}

    @staticmethod
    def from_wire(obj: dict) -> TextChange:
        try:
            return TextChange(int(obj["from"]), int(obj["to"]), str(obj["insert"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidChange(f"malformed change object: {obj!r}") from exc


def byte_length(text: str) -> int:
    return len(text.encode("utf-8"))


def byte_slice(text: str, start: int, end: int) -> str:
    """Substring addressed by byte offsets; raises on split code points."""
    data = text.encode("utf-8")
    try:
        return data[start:end].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidChange(f"slice [{start}, {end}) splits a code point") from exc


def apply_changes(text: str, changes: Iterable[TextChange]) -> tuple[str, list[TextChange]]:
    """Apply changes sequentially; each applies to the previous result.

    Returns the new text and the inverse changes, ordered so that applying the
    inverses in reverse restores the input text.
    """
    inverses: list[TextChange] = []
    for change in changes:
        inverses.append(change.inverse(text))
        text = change.apply(text)
    return text, inverses


def map_start(pos: int, change: TextChange) -> int:
    """Map a range start through a change. Insertions at `pos` push it right."""
    if pos < change.start:
        return pos
    if pos < change.end:
        return change.start
    return pos + change.growth


def map_end(pos: int, change: TextChange) -> int:
    """Map a range end through a change. Insertions at `pos` extend the range."""
    if pos < change.start:
        return pos
    if pos >= change.end:
        return pos + change.growth
    return change.start + len(change.insert.encode("utf-8"))


def map_range(start: int, end: int, changes: Iterable[TextChange]) -> tuple[int, int]:
    for change in changes:
        start = map_start(start, change)
        end = map_end(end, change)
        if end < start:  # range fully deleted
            end = start
    return start, end
