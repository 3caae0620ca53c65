import pytest
from hypothesis import given
from hypothesis import strategies as st

from binderwatch import (AddrFamily, BinderSignal, BinderTransactionRecord, Interceptor,
                         ProbePoint, RawTransaction, SyscallEvent)
from binderwatch.interceptor import AlreadyAttached, ParseError, RawOpen, parse_trace


@pytest.fixture
def icpt():
    return Interceptor(monitored=[10050])


def collect(icpt, *points):
    seen = []
    for p in points or tuple(ProbePoint):
        icpt.attach_probe(p, seen.append)
    return seen


def test_attach_then_feed_calls_handler_once(icpt):
    seen = collect(icpt, ProbePoint.SYS_OPEN)
    icpt.on_sys_open(10050, "/mnt/sdcard/x.txt")
    assert len(seen) == 1 and isinstance(seen[0], SyscallEvent)


def test_double_attach(icpt):
    icpt.attach_probe(ProbePoint.SYS_OPEN, print)
    with pytest.raises(AlreadyAttached):
        icpt.attach_probe(ProbePoint.SYS_OPEN, print)


def test_detach_then_feed(icpt):
    seen = collect(icpt, ProbePoint.SYS_OPEN)
    icpt.detach_probe(ProbePoint.SYS_OPEN)
    assert icpt.on_sys_open(10050, "/mnt/sdcard/x.txt") is None
    assert seen == []


@pytest.mark.parametrize("path, emitted", [
    ("/mnt/sdcard/x.txt", True),
    ("/data/app/y", False),
    ("/storage/SDCARD/z", False),
])
def test_sdcard_substring(icpt, path, emitted):
    collect(icpt)
    assert ("sdcard" in path) == emitted  # plain case-sensitive containment
    assert (icpt.on_sys_open(10050, path) is not None) == emitted


@pytest.mark.parametrize("family, emitted", [
    (AddrFamily.INET4, True), (AddrFamily.INET6, True),
    (AddrFamily.UNIX, False), (AddrFamily.OTHER, False),
])
def test_connect_family(icpt, family, emitted):
    collect(icpt)
    ev = icpt.on_sys_connect(10050, family, "93.184.216.34:80")
    assert (ev is not None) == emitted


def test_binder_signal_filter(icpt):
    collect(icpt)
    txn = RawTransaction(10050, 5, bytearray(8))
    assert isinstance(icpt.on_binder_write(BinderSignal.BC_TRANSACTION, txn),
                      BinderTransactionRecord)
    assert icpt.on_binder_write(BinderSignal.BC_REPLY, txn) is None


def test_binder_snapshot_survives_source_mutation(icpt):
    collect(icpt)
    txn = RawTransaction(10050, 5, bytearray(b"\x01\x02\x03\x04"))
    rec = icpt.on_binder_write(BinderSignal.BC_TRANSACTION, txn)
    txn.buffer[0] = 0xFF
    assert rec.buffer == b"\x01\x02\x03\x04"


def test_per_uid_and_global_switches(icpt):
    seen = collect(icpt)
    icpt.set_monitored(10050, False)
    icpt.on_sys_open(10050, "/mnt/sdcard/a")
    assert seen == []
    icpt.set_monitored(10050, True).set_global(False)
    icpt.on_sys_open(10050, "/mnt/sdcard/a")
    assert seen == []
    icpt.set_global(True)
    icpt.on_sys_open(10050, "/mnt/sdcard/a")
    assert len(seen) == 1


def test_default_monitored_set_is_empty():
    icpt = Interceptor()
    seen = collect(icpt)
    icpt.on_sys_open(10050, "/mnt/sdcard/a")
    assert seen == [] and icpt.monitored_uids == frozenset()


TRACE = """\
# three monitored events
open 10050 /mnt/sdcard/a b.txt
connect 10050 inet6 [::1]:443
binder 10050 com.android.internal.telephony.ISms 5 0000000000000000
"""


def test_replay_in_order(icpt):
    collect(icpt)
    events = list(icpt.replay(TRACE))
    assert [type(e).__name__ for e in events] == ["SyscallEvent", "SyscallEvent",
                                                  "BinderTransactionRecord"]
    assert events[0].path == "/mnt/sdcard/a b.txt"
    assert events[1].addr_family is AddrFamily.INET6


def test_replay_filters_unmonitored(icpt):
    collect(icpt)
    events = list(icpt.replay(TRACE.replace("connect 10050", "connect 10099")))
    assert len(events) == 2


def test_replay_parse_error_line(icpt):
    collect(icpt)
    with pytest.raises(ParseError) as info:
        list(icpt.replay("open 10050 /mnt/sdcard/a\nopen notanumber /x\n"))
    assert info.value.line_no == 2


def test_replay_from_file(icpt, tmp_path):
    collect(icpt)
    f = tmp_path / "t.txt"
    f.write_text(TRACE)
    assert len(list(icpt.replay(f))) == 3
    with open(f) as fh:
        assert len(list(icpt.replay(fh))) == 3


@pytest.mark.parametrize("line", [
    "open 10050", "connect 10050 inet4", "connect 10050 carrier x", "binder 1 I 5 zz",
    "binder 1 I 5", "teleport 1 2", "open 99999999999 /sdcard",
])
def test_parse_errors(line):
    with pytest.raises(ParseError):
        parse_trace(line)


@given(st.lists(st.tuples(st.sampled_from([10050, 10051]),
                          st.sampled_from(["/mnt/sdcard/a", "/data/x", "/SDCARD/q", "sdcard"]))),
       st.booleans())
def test_order_and_disable_completeness(opens, on):
    icpt = Interceptor(monitored=[10050], globally_enabled=on)
    seen = []
    icpt.attach_all(seen.append)
    out = list(icpt.feed_all(RawOpen(u, p) for u, p in opens))
    expected = [(u, p) for u, p in opens if on and u == 10050 and "sdcard" in p]
    assert [(e.uid.uid, e.path) for e in out] == expected
    assert out == seen
