import pytest

from binderwatch import (AddrFamily, AppId, BinderTransactionRecord, InvalidEvent,
                         SyscallEvent, SyscallKind, validate_event)
from binderwatch.events import MAX_BUFFER


def unchecked(cls, **fields):
    """Build a value without running its constructor checks."""
    obj = object.__new__(cls)
    for k, v in fields.items():
        object.__setattr__(obj, k, v)
    return obj


def test_open_event_is_ok():
    e = SyscallEvent.open(10050, "/mnt/sdcard/a.txt", 1)
    assert validate_event(e) == []


def test_connect_with_path_is_reported():
    e = unchecked(SyscallEvent, kind=SyscallKind.CONNECT, uid=AppId(10050), timestamp=1,
                  path="/x", addr_family=AddrFamily.INET4, addr="1.2.3.4:80")
    assert "path on Connect" in validate_event(e)


def test_unaligned_binder_buffer_is_reported():
    e = unchecked(BinderTransactionRecord, sender_euid=AppId(10050), code=1,
                  buffer=b"\x00" * 6, timestamp=1)
    assert validate_event(e) == ["alignment"]


def test_constructors_reject_what_validation_reports():
    with pytest.raises(InvalidEvent, match="alignment"):
        BinderTransactionRecord(10050, 1, b"\x00" * 6, 1)
    with pytest.raises(InvalidEvent, match="path on Connect"):
        SyscallEvent(SyscallKind.CONNECT, AppId(1), 1, path="/x",
                     addr_family=AddrFamily.INET4, addr="a")
    with pytest.raises(InvalidEvent, match="empty path"):
        SyscallEvent.open(10050, "")
    with pytest.raises(InvalidEvent, match="exceeds"):
        BinderTransactionRecord(10050, 1, bytes(MAX_BUFFER + 4), 1)


def test_buffer_cap_is_configurable():
    rec = BinderTransactionRecord(10050, 1, bytes(64), 1)
    assert validate_event(rec, max_buffer=32) == ["buffer exceeds 32 bytes"]


def test_system_uid_is_flagged_not_rejected():
    assert AppId(1000).is_system
    assert not AppId(10050).is_system
    assert validate_event(SyscallEvent.open(1000, "/mnt/sdcard/x", 1)) == []


def test_uid_range():
    with pytest.raises(InvalidEvent):
        AppId(-1)
    with pytest.raises(InvalidEvent):
        AppId(1 << 32)


def test_records_are_immutable():
    rec = BinderTransactionRecord(10050, 1, bytearray(4), 1)
    assert isinstance(rec.buffer, bytes)
    with pytest.raises(AttributeError):
        rec.code = 2


def test_non_event_is_reported():
    assert validate_event("nope") == ["not an event: str"]
