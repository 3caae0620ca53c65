import pytest

from binderwatch import (ArgValue, Bridge, DecodedCall, Interceptor, RawUndecoded,
                         SignatureRegistry, Subscription, SyscallEvent, TracerService, marshal)
from binderwatch.bridge import CallbackAlreadySet
from binderwatch.service import DuplicateClient, UnknownClient
from conftest import ISMS


@pytest.fixture
def pipeline(registry):
    icpt = Interceptor(monitored=[10050, 10051])
    bridge = Bridge(icpt)
    icpt.attach_all(bridge.send_event)
    service = TracerService.start(bridge, registry)
    yield icpt, bridge, service
    bridge.close()


def binder_line(registry, uid=10050, dest="0499999999"):
    sig = registry.lookup(ISMS, 5)
    data = marshal(sig, [ArgValue.str_(s) for s in ("pkg", dest, "", "hi")], registry).data
    return f"binder {uid} {ISMS} 5 {data.hex()}"


def test_binder_frame_becomes_decoded_call(pipeline, registry):
    icpt, bridge, service = pipeline
    got = []
    service.subscribe(Subscription("all", got.append))
    list(icpt.replay(binder_line(registry)))
    bridge.drain(5)
    assert len(got) == 1 and isinstance(got[0], DecodedCall)
    assert got[0].method_name == "sendText" and got[0].args[1].value == "0499999999"


def test_start_twice_on_one_bridge(pipeline, registry):
    _, bridge, _ = pipeline
    with pytest.raises(CallbackAlreadySet):
        TracerService.start(bridge, registry)


def test_empty_registry_delivers_notice(registry):
    icpt = Interceptor(monitored=[10050])
    with Bridge(icpt) as bridge:
        icpt.attach_all(bridge.send_event)
        service = TracerService.start(bridge, SignatureRegistry())
        got = []
        service.subscribe(Subscription("all", got.append))
        list(icpt.replay(binder_line(registry)))
        bridge.drain(5)
    assert service.stats.decode_failed == 1 and service.stats.decode_ok == 0
    assert service.stats.frames_in == 1
    assert isinstance(got[0], RawUndecoded)
    assert got[0].code == 5 and "UnknownInterface" in got[0].error


def test_uid_filter(pipeline):
    icpt, bridge, service = pipeline
    mine, everyone = [], []
    service.subscribe(Subscription("mine", mine.append, {10050}))
    service.subscribe(Subscription("everyone", everyone.append))
    list(icpt.replay("open 10050 /mnt/sdcard/a\nopen 10051 /mnt/sdcard/b\n"))
    bridge.drain(5)
    assert [e.uid.uid for e in mine] == [10050]
    assert [e.uid.uid for e in everyone] == [10050, 10051]
    assert service.stats.delivered == 3


def test_unsubscribe_stops_delivery(pipeline):
    icpt, bridge, service = pipeline
    got = []
    service.subscribe(Subscription("c", got.append))
    list(icpt.replay("open 10050 /mnt/sdcard/a\n"))
    bridge.drain(5)
    service.unsubscribe("c")
    list(icpt.replay("open 10050 /mnt/sdcard/a\n"))
    bridge.drain(5)
    assert len(got) == 1


def test_subscription_errors(pipeline):
    _, _, service = pipeline
    service.subscribe(Subscription("c", print))
    with pytest.raises(DuplicateClient):
        service.subscribe(Subscription("c", print))
    with pytest.raises(UnknownClient):
        service.unsubscribe("zzz")


def test_set_app_monitoring(pipeline):
    icpt, bridge, service = pipeline
    got = []
    service.subscribe(Subscription("c", got.append))
    service.set_app_monitoring(10050, False)
    list(icpt.replay("open 10050 /mnt/sdcard/a\n"))
    bridge.drain(5)
    assert got == []
    assert service.set_app_monitoring(424242, True).payload == bytes([0x02])


def test_interleaved_enable_disable_last_writer_wins(pipeline):
    icpt, bridge, service = pipeline
    got = []
    service.subscribe(Subscription("c", got.append))
    for on in (False, True, False, False, True, False):
        service.set_app_monitoring(10050, on)
    list(icpt.replay("open 10050 /mnt/sdcard/a\n"))
    bridge.drain(5)
    assert got == []
    service.set_app_monitoring(10050, True)
    list(icpt.replay("open 10050 /mnt/sdcard/a\n"))
    bridge.drain(5)
    assert len(got) == 1


def test_accounting_and_order(pipeline, registry):
    icpt, bridge, service = pipeline
    got = []
    service.subscribe(Subscription("c", got.append))
    lines = []
    for i in range(50):
        lines.append(f"open 10050 /mnt/sdcard/{i}")
        lines.append(binder_line(registry, dest=str(i)))
    lines.append("binder 10050 junk 5 00000000ffff0000")
    list(icpt.replay("\n".join(lines)))
    bridge.drain(5)
    s = service.stats
    assert s.frames_in == 101 == s.decode_ok + s.decode_failed
    assert s.decode_failed == 1
    assert s.delivered <= s.decode_ok * 1
    paths = [e.path for e in got if isinstance(e, SyscallEvent)]
    dests = [e.args[1].value for e in got if isinstance(e, DecodedCall)]
    assert paths == [f"/mnt/sdcard/{i}" for i in range(50)]
    assert dests == [str(i) for i in range(50)]
    assert isinstance(got[-1], RawUndecoded)
    assert s.line().startswith("frames_in=101 ")


def test_no_subscribers_counts_nothing_delivered(pipeline):
    icpt, bridge, service = pipeline
    list(icpt.replay("open 10050 /mnt/sdcard/a\n"))
    bridge.drain(5)
    assert service.stats.frames_in == 1 and service.stats.delivered == 0
