"""Append-only event log with a SHA-256 hash chain and a line wire format.

Wire format, one event per line, fields pipe-delimited in fixed order:

    seq|timestamp|kind|cert_id|payload|prev_hash|hash

``payload`` is canonical JSON (sorted keys, no whitespace, ASCII only); hashes
are lowercase hex SHA-256.  ``hash`` digests every byte of the line that
precedes it, so changing any byte of a stored record breaks verification.
The first event chains from a prev_hash of 64 zeros.  ``cert_id`` is
restricted to a charset without the field separator, which keeps parsing
unambiguous (the JSON payload is bracketed by fixed-shape fields on both
sides and is recovered with bounded splits).
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import Iterable, Iterator

from .errors import DomainError, LedgerIntegrityError

GENESIS_HASH = "0" * 64

_CERT_ID_RE = re.compile(r"^[A-Za-z0-9_.:-]+$")
_HASH_RE = re.compile(r"^[0-9a-f]{64}$")


class EventKind(str, Enum):
    ISSUE = "ISSUE"
    TRANSFER = "TRANSFER"
    QUOTE = "QUOTE"
    DELIVER = "DELIVER"
    BUYBACK = "BUYBACK"
    EXPIRE = "EXPIRE"


def canonical_payload(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def _digest(seq: int, timestamp: str, kind: str, cert_id: str, payload_json: str, prev_hash: str) -> str:
    body = f"{seq}|{timestamp}|{kind}|{cert_id}|{payload_json}|{prev_hash}"
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class LedgerEvent:
    seq: int
    timestamp: date
    kind: EventKind
    cert_id: str
    payload: dict
    prev_hash: str
    hash: str

    def to_line(self) -> str:
        return (
            f"{self.seq}|{self.timestamp.isoformat()}|{self.kind.value}|{self.cert_id}|"
            f"{canonical_payload(self.payload)}|{self.prev_hash}|{self.hash}"
        )


def validate_cert_id(cert_id: str) -> str:
    if not _CERT_ID_RE.match(cert_id):
        raise DomainError(
            f"cert_id {cert_id!r} must be non-empty and use only [A-Za-z0-9_.:-]"
        )
    return cert_id


class Ledger:
    """In-memory event log; one writer, atomic per-event append."""

    def __init__(self, events: Iterable[LedgerEvent] = ()):
        self._events: list[LedgerEvent] = list(events)

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self) -> Iterator[LedgerEvent]:
        return iter(self._events)

    @property
    def events(self) -> tuple[LedgerEvent, ...]:
        return tuple(self._events)

    @property
    def head_hash(self) -> str:
        return self._events[-1].hash if self._events else GENESIS_HASH

    @property
    def last_seq(self) -> int:
        return self._events[-1].seq if self._events else 0

    def append(self, kind: EventKind, cert_id: str, payload: dict, timestamp: date) -> LedgerEvent:
        """Seal and append one event; returns it.

        The stored payload is the JSON round-trip of the argument, so the
        in-memory event equals what a reader reconstructs from the wire line.
        """
        validate_cert_id(cert_id)
        payload_json = canonical_payload(payload)
        seq = self.last_seq + 1
        prev = self.head_hash
        event = LedgerEvent(
            seq=seq,
            timestamp=timestamp,
            kind=EventKind(kind),
            cert_id=cert_id,
            payload=json.loads(payload_json),
            prev_hash=prev,
            hash=_digest(seq, timestamp.isoformat(), EventKind(kind).value, cert_id, payload_json, prev),
        )
        self._events.append(event)
        return event

    def to_lines(self) -> list[str]:
        return [event.to_line() for event in self._events]


def parse_line(line: str, lineno: int | None = None) -> LedgerEvent:
    """Parse one wire line into an event, recomputing and checking its digest.

    Chain linkage (prev_hash continuity, seq continuity) is checked by
    read_events; this checks everything observable from a single line.
    """
    where = lineno if lineno is not None else "?"
    try:
        head, prev_hash, line_hash = line.rsplit("|", 2)
        seq_text, ts_text, kind_text, rest = head.split("|", 3)
        cert_id, payload_json = rest.split("|", 1)
    except ValueError:
        raise LedgerIntegrityError(f"line {where}: malformed record (wrong field count)") from None
    try:
        seq = int(seq_text)
    except ValueError:
        raise LedgerIntegrityError(f"line {where}: bad sequence number {seq_text!r}") from None
    if not _HASH_RE.match(prev_hash) or not _HASH_RE.match(line_hash):
        raise LedgerIntegrityError("malformed hash field", seq=seq)
    recomputed = _digest(seq, ts_text, kind_text, cert_id, payload_json, prev_hash)
    if recomputed != line_hash:
        raise LedgerIntegrityError("hash mismatch: record bytes do not match their digest", seq=seq)
    try:
        timestamp = date.fromisoformat(ts_text)
    except ValueError:
        raise LedgerIntegrityError(f"bad timestamp {ts_text!r}", seq=seq) from None
    try:
        kind = EventKind(kind_text)
    except ValueError:
        raise LedgerIntegrityError(f"unknown event kind {kind_text!r}", seq=seq) from None
    if not _CERT_ID_RE.match(cert_id):
        raise LedgerIntegrityError(f"bad cert_id {cert_id!r}", seq=seq)
    try:
        payload = json.loads(payload_json)
    except json.JSONDecodeError:
        raise LedgerIntegrityError("unreadable payload", seq=seq) from None
    if not isinstance(payload, dict) or canonical_payload(payload) != payload_json:
        raise LedgerIntegrityError("payload is not in canonical form", seq=seq)
    return LedgerEvent(seq, timestamp, kind, cert_id, payload, prev_hash, line_hash)


def read_events(lines: Iterable[str]) -> Iterator[LedgerEvent]:
    """Parse and verify a whole stream; raises at the first bad record.

    Checks per line: digest over the raw bytes.  Across lines: seq starts at 1
    and increases without gaps, and each prev_hash equals the previous hash.
    """
    prev = GENESIS_HASH
    expected_seq = 1
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            raise LedgerIntegrityError(f"line {lineno}: empty record")
        event = parse_line(line, lineno=lineno)
        if event.seq != expected_seq:
            raise LedgerIntegrityError(
                f"expected seq {expected_seq}, found {event.seq}", seq=event.seq
            )
        if event.prev_hash != prev:
            raise LedgerIntegrityError("chain break: prev_hash mismatch", seq=event.seq)
        yield event
        prev = event.hash
        expected_seq += 1


def load_ledger(lines: Iterable[str]) -> Ledger:
    """Verified ledger from wire lines."""
    return Ledger(read_events(lines))


def verify_lines(lines: Iterable[str]) -> int:
    """Run full verification; returns the number of events."""
    count = 0
    for _ in read_events(lines):
        count += 1
    return count
