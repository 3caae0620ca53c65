"""The seven synthetic workload sorts, rendered as replayable trace files."""
from __future__ import annotations

import random
import struct
from dataclasses import dataclass

from ..codec import marshal
from ..events import ArgValue
from ..interceptor import RawBinder, RawOpen, format_trace_line
from ..registry import SignatureRegistry, load_registry

MAX_EVENTS = 10000
DEFAULT_UID = 10050


class UnknownWorkload(ValueError):
    pass


@dataclass(frozen=True)
class WorkloadSort:
    sort: int
    name: str
    api_class: str
    api_method: str
    interface: str | None
    method: str


SORTS = (
    WorkloadSort(1, "device_id", "TelephonyManager", "getDeviceId",
                 "com.android.internal.telephony.IPhoneSubInfo", "getDeviceId"),
    WorkloadSort(2, "sim_serial", "TelephonyManager", "getSimSerialNumber",
                 "com.android.internal.telephony.IPhoneSubInfo", "getSimSerialNumber"),
    WorkloadSort(3, "location", "LocationManager", "getLastKnownLocation",
                 "android.location.ILocationManager", "getLastKnownLocation"),
    WorkloadSort(4, "send_sms", "SmsManager", "sendTextMessage",
                 "com.android.internal.telephony.ISms", "sendText"),
    WorkloadSort(5, "installed_apps", "PackageManager", "getInstalledApplications",
                 "android.content.pm.IPackageManager", "getInstalledApplications"),
    WorkloadSort(6, "network_info", "ConnectivityManager", "getAllNetworkInfo",
                 "android.net.IConnectivityManager", "getAllNetworkInfo"),
    WorkloadSort(7, "sdcard_read", "BufferedReader", "readLine", None, "open"),
)


def resolve(key) -> WorkloadSort:
    """Look a sort up by number (1-7) or name."""
    for s in SORTS:
        if str(key) in (str(s.sort), s.name, s.api_method):
            return s
    raise UnknownWorkload(f"unknown workload {key!r}")


@dataclass(frozen=True)
class Workload:
    name: str
    event_count: int = MAX_EVENTS
    uid: int = DEFAULT_UID

    def __post_init__(self):
        resolve(self.name)
        if not 0 < self.event_count <= MAX_EVENTS:
            raise UnknownWorkload(f"event_count must be in 1..{MAX_EVENTS}, got {self.event_count}")

    @property
    def sort(self) -> WorkloadSort:
        return resolve(self.name)


def _f32(x: float) -> float:
    return struct.unpack("<f", struct.pack("<f", x))[0]


def _phone(rng) -> str:
    return "04" + "".join(rng.choice("0123456789") for _ in range(8))


def _args(sort: WorkloadSort, rng: random.Random) -> list:
    if sort.name == "location":
        work_source = ArgValue.composite("WorkSource", [
            ArgValue.int32(1), ArgValue.bytes_(rng.randbytes(4))])
        request = ArgValue.composite("LocationRequest", [
            ArgValue.int32(rng.choice([100, 102, 104, 200])),
            ArgValue.int64(rng.randrange(1000, 3_600_000)),
            ArgValue.int64(rng.randrange(100, 600_000)),
            ArgValue.bool_(rng.random() < 0.5),
            ArgValue.int64((1 << 63) - 1),
            ArgValue.int32(rng.randrange(1, 1 << 31)),
            ArgValue.float32(_f32(rng.uniform(0, 100))),
            ArgValue.str_(rng.choice(["gps", "network", "passive", "fused"])),
            work_source,
        ])
        return [request, ArgValue.str_("com.example.bench")]
    if sort.name == "send_sms":
        text = "".join(rng.choice("abcdefghijklmnopqrstuvwxyz ") for _ in range(rng.randrange(5, 60)))
        return [ArgValue.str_("com.example.bench"), ArgValue.str_(_phone(rng)),
                ArgValue.str_(""), ArgValue.str_(text)]
    if sort.name == "installed_apps":
        return [ArgValue.int32(rng.choice([0, 128, 8192])), ArgValue.int32(0)]
    return []


def generate_raw(w: Workload, seed: int = 0, registry: SignatureRegistry | None = None) -> list:
    registry = registry if registry is not None else load_registry()
    sort = w.sort
    rng = random.Random(f"{seed}:{sort.sort}")
    if sort.interface is None:
        dirs = ["Music", "DCIM/Camera", "Download", "Android/data/com.example.bench"]
        return [RawOpen(w.uid, f"/mnt/sdcard/{rng.choice(dirs)}/f{rng.randrange(10**6)}.txt")
                for _ in range(w.event_count)]
    sig = registry.find_method(sort.interface, sort.method)
    if sig is None:
        raise UnknownWorkload(f"registry has no {sort.interface}.{sort.method}")
    return [RawBinder(w.uid, sig.interface_name, sig.code,
                      marshal(sig, _args(sort, rng), registry).data)
            for _ in range(w.event_count)]


def generate_workload(w: Workload, seed: int = 0, registry: SignatureRegistry | None = None) -> str:
    """Trace-file text for ``w``; identical for identical seeds."""
    lines = [f"# workload {w.sort.sort} {w.sort.name} count={w.event_count} seed={seed}"]
    lines += [format_trace_line(r) for r in generate_raw(w, seed, registry)]
    return "\n".join(lines) + "\n"
