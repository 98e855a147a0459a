"""Deterministic stand-in model for recording the fixture transcripts.

Every rule pairs a stage marker (a sentence that only appears in that
stage's prompt template) with a code substring unique to one fixture
query, and maps them to the reply a competent model would give for the
miniature corpora under tests/fixtures/corpora.  Recording a pipeline
run against this backend produces the replay transcripts the offline
tests consume; the rules themselves never ship in the package.
"""

from __future__ import annotations

import json
import re

# one distinctive sentence per prompt template
OPEN = "Determine how userspace opens this handler"
IDENT = "Extract the identifier values this handler dispatches on"
RECOVER = "Determine the argument type for each identifier"
DEFINE = "Write the syzlang description for the C definitions"
DEPS = "Decide which commands of this handler"
REPAIR = "Correct the declaration above"

_IDENT_RE = re.compile(r"identifier: ([A-Za-z0-9_]+)")


def _unknown(identifier: str, kind: str, usage: str) -> dict:
    return {"identifier": identifier, "kind": kind, "usage_info": usage}


def _driver(device: str, resource: str) -> dict:
    return {
        "handler_kind": "driver",
        "device_name": device,
        "resource_name": resource,
    }


def _identifiers(entries, return_relevant=()) -> dict:
    out = []
    for name, function, usage, *rest in entries:
        out.append(
            {
                "name": name,
                "function": function,
                "usage": usage,
                "modified": bool(rest and rest[0]),
            }
        )
    return {"identifiers": out, "return_relevant": list(return_relevant)}


def _recovered(arg_type: str, pending=()):
    """Type reply echoing whichever identifier the prompt asks about."""

    def build(prompt: str) -> dict:
        m = _IDENT_RE.search(prompt)
        entry = {"identifier": m.group(1) if m else "", "arg_type": arg_type}
        if pending:
            entry["pending"] = list(pending)
        return {"types": [entry]}

    return build


def _definitions(*entries) -> dict:
    return {
        "definitions": [
            {"name": name, "kind": "struct", "text": text} for name, text in entries
        ]
    }


DM_IOCTL_DEF = """dm_ioctl {
\tversion\tarray[int32, 3]
\tdata_size\tint32
\tdata_start\tint32
\ttarget_count\tint32
\topen_count\tint32
\tflags\tint32
\tevent_nr\tint32
\tpadding\tint32
\tdev\tint64
\tname\tarray[int8, DM_NAME_LEN]
\tuuid\tarray[int8, DM_UUID_LEN]
\tdata\tarray[int8, 7]
}
"""

KVM_MEMORY_REGION_DEF = """kvm_userspace_memory_region {
\tslot\tint32
\tflags\tint32
\tguest_phys_addr\tint64
\tmemory_size\tint64
\tuserspace_addr\tint64
}
"""

VFIO_DEVICE_INFO_DEF = """vfio_device_info {
\targsz\tint32
\tflags\tint32
\tnum_regions\tint32
\tnum_irqs\tint32
}
"""

VFIO_DEPENDENT_DEVICE_DEF = """vfio_pci_dependent_device {
\tgroup_id\tint32
\tsegment\tint16
\tbus\tint8
\tdevfn\tint8
}
"""

# first attempt mistranslates the trailing flexible array: it names the
# sibling count field as if it were a constant length
VFIO_HOT_RESET_BAD_DEF = """vfio_pci_hot_reset_info {
\targsz\tint32
\tflags\tint32
\tcount\tint32
\tdevices\tarray[vfio_pci_dependent_device, count]
}
"""

VFIO_HOT_RESET_FIXED = """vfio_pci_hot_reset_info {
\targsz\tint32
\tflags\tint32
\tcount\tlen[devices]
\tdevices\tarray[vfio_pci_dependent_device]
}
"""

SOCKADDR_IN_DEF = """sockaddr_in {
\tsin_family\tint16
\tsin_port\tint16
\tsin_addr\tint32
\tsin_zero\tarray[int8, 8]
}
"""

Rule = tuple[tuple[str, ...], object]

# checked in order; the first rule whose substrings all appear wins
RULES: list[Rule] = [
    # ---- device-mapper control node ----
    (
        (OPEN, "_dm_misc"),
        {"result": _driver("mapper/control", "fd_dm_ctl"), "unknowns": []},
    ),
    (
        (IDENT, "static ioctl_fn lookup_ioctl("),
        {
            "result": _identifiers(
                [
                    (
                        "DM_VERSION",
                        "dm_version_ioctl",
                        "fills in the running version triple",
                    ),
                    (
                        "DM_REMOVE_ALL",
                        "remove_all",
                        "destroys every mapped device, no payload read",
                    ),
                    (
                        "DM_LIST_DEVICES",
                        "list_devices",
                        "writes the device list into the data area",
                    ),
                    (
                        "DM_DEV_CREATE",
                        "dev_create",
                        "creates a device named by the name field",
                    ),
                    (
                        "DM_TABLE_STATUS",
                        "table_status",
                        "reports target status into the data area",
                    ),
                ]
            ),
            "unknowns": [],
        },
    ),
    (
        (IDENT, "static int ctl_ioctl("),
        {
            "result": {"identifiers": [], "return_relevant": []},
            "unknowns": [
                _unknown(
                    "lookup_ioctl",
                    "Function",
                    "maps the command number to its handler function",
                )
            ],
        },
    ),
    (
        (IDENT, "static long dm_ctl_ioctl("),
        {
            "result": {"identifiers": [], "return_relevant": []},
            "unknowns": [
                _unknown(
                    "ctl_ioctl",
                    "Function",
                    "does the real dispatch over the command number",
                )
            ],
        },
    ),
    ((RECOVER, "identifier: DM_REMOVE_ALL"), _recovered("const[0]")),
    ((RECOVER, "identifier: DM_"), _recovered("ptr[inout, dm_ioctl]", ["dm_ioctl"])),
    (
        (DEFINE, "definition requested for dm_ioctl"),
        {"result": _definitions(("dm_ioctl", DM_IOCTL_DEF)), "unknowns": []},
    ),
    # ---- kvm: /dev/kvm plus the VM fd it creates ----
    (
        (OPEN, "anon_inode_getfile"),
        # an anonymous inode has no device node; nothing to report
        {"result": {"handler_kind": "driver"}, "unknowns": []},
    ),
    (
        (OPEN, "kvm_dev = {"),
        {"result": _driver("kvm", "fd_kvm"), "unknowns": []},
    ),
    (
        (IDENT, "static long kvm_dev_ioctl("),
        {
            "result": _identifiers(
                [
                    (
                        "KVM_GET_API_VERSION",
                        "kvm_dev_ioctl",
                        "returns the stable API version constant",
                    ),
                    (
                        "KVM_CREATE_VM",
                        "kvm_dev_ioctl_create_vm",
                        "installs a new VM file descriptor",
                    ),
                    (
                        "KVM_CHECK_EXTENSION",
                        "kvm_dev_ioctl",
                        "queries support for one extension id",
                    ),
                ],
                return_relevant=["kvm_dev_ioctl_create_vm"],
            ),
            "unknowns": [],
        },
    ),
    (
        (IDENT, "static long kvm_vm_ioctl("),
        {
            "result": _identifiers(
                [
                    (
                        "KVM_CREATE_VCPU",
                        "kvm_vm_ioctl",
                        "adds a vcpu with the given id",
                    ),
                    (
                        "KVM_SET_USER_MEMORY_REGION",
                        "kvm_vm_set_memory_region",
                        "maps a userspace range into guest memory",
                    ),
                    (
                        "KVM_SET_IDENTITY_MAP_ADDR",
                        "kvm_vm_ioctl",
                        "stores the identity map base address",
                    ),
                ]
            ),
            "unknowns": [],
        },
    ),
    (
        (RECOVER, "identifier: KVM_SET_USER_MEMORY_REGION"),
        _recovered(
            "ptr[in, kvm_userspace_memory_region]", ["kvm_userspace_memory_region"]
        ),
    ),
    ((RECOVER, "identifier: KVM_SET_IDENTITY_MAP_ADDR"), _recovered("ptr[in, int64]")),
    ((RECOVER, "identifier: KVM_GET_API_VERSION"), _recovered("const[0]")),
    ((RECOVER, "identifier: KVM_"), _recovered("intptr")),
    (
        (DEFINE, "definition requested for kvm_userspace_memory_region"),
        {
            "result": _definitions(
                ("kvm_userspace_memory_region", KVM_MEMORY_REGION_DEF)
            ),
            "unknowns": [],
        },
    ),
    (
        (DEPS, "kvm_dev_ioctl_create_vm"),
        {
            "result": {
                "dependencies": [
                    {
                        "producer": "KVM_CREATE_VM",
                        "resource": "fd_kvm_vm",
                        "consumers": ["kvm_vm_fops"],
                    }
                ]
            },
            "unknowns": [],
        },
    ),
    # ---- vfio pci stub ----
    (
        (OPEN, "vfio_pci_dev = {"),
        {"result": _driver("vfio/vfio-pci", "fd_vfio_pci"), "unknowns": []},
    ),
    (
        (IDENT, "static long vfio_pci_ioctl("),
        {
            "result": _identifiers(
                [
                    (
                        "VFIO_DEVICE_GET_INFO",
                        "vfio_pci_ioctl",
                        "fills in region and irq counts",
                    ),
                    (
                        "VFIO_DEVICE_RESET",
                        "vfio_pci_ioctl",
                        "resets the function, ignores the argument",
                    ),
                    (
                        "VFIO_DEVICE_GET_PCI_HOT_RESET_INFO",
                        "vfio_pci_ioctl",
                        "lists the devices affected by a hot reset",
                    ),
                ]
            ),
            "unknowns": [],
        },
    ),
    (
        (RECOVER, "identifier: VFIO_DEVICE_GET_INFO"),
        _recovered("ptr[inout, vfio_device_info]", ["vfio_device_info"]),
    ),
    ((RECOVER, "identifier: VFIO_DEVICE_RESET"), _recovered("const[0]")),
    (
        (RECOVER, "identifier: VFIO_DEVICE_GET_PCI_HOT_RESET_INFO"),
        _recovered("ptr[inout, vfio_pci_hot_reset_info]", ["vfio_pci_hot_reset_info"]),
    ),
    (
        (DEFINE, "definition requested for vfio_device_info"),
        {"result": _definitions(("vfio_device_info", VFIO_DEVICE_INFO_DEF)), "unknowns": []},
    ),
    (
        (DEFINE, "definition requested for vfio_pci_hot_reset_info"),
        {
            "result": _definitions(
                ("vfio_pci_dependent_device", VFIO_DEPENDENT_DEVICE_DEF),
                ("vfio_pci_hot_reset_info", VFIO_HOT_RESET_BAD_DEF),
            ),
            "unknowns": [],
        },
    ),
    (
        (REPAIR, "vfio_pci_hot_reset_info {", "NonConstantArrayLength"),
        {"result": {"replacement": VFIO_HOT_RESET_FIXED}, "unknowns": []},
    ),
    # ---- rds sockets ----
    (
        (OPEN, "rds_proto_ops = {"),
        {
            "result": {
                "handler_kind": "socket",
                "socket_domain": "AF_RDS",
                "socket_type": "SOCK_SEQPACKET",
                "socket_protocol": "0",
            },
            "unknowns": [],
        },
    ),
    (
        (IDENT, "static int rds_setsockopt("),
        {
            "result": _identifiers(
                [
                    (
                        "RDS_CANCEL_SENT_TO",
                        "rds_cancel_sent_to",
                        "drops queued messages for one destination",
                    ),
                    (
                        "RDS_RECVERR",
                        "rds_set_bool_option",
                        "toggles error queue delivery",
                    ),
                ]
            ),
            "unknowns": [],
        },
    ),
    (
        (IDENT, "static int rds_getsockopt("),
        {
            "result": _identifiers(
                [
                    (
                        "RDS_RECVERR",
                        "rds_getsockopt",
                        "reads back the error queue flag",
                    ),
                    (
                        "RDS_CONG_MONITOR",
                        "rds_getsockopt",
                        "reads the congestion monitor bitmask",
                    ),
                ]
            ),
            "unknowns": [],
        },
    ),
    (
        (RECOVER, "identifier: RDS_CANCEL_SENT_TO"),
        _recovered("ptr[in, sockaddr_in]", ["sockaddr_in"]),
    ),
    ((RECOVER, "identifier: RDS_RECVERR"), _recovered("ptr[in, int32]")),
    ((RECOVER, "identifier: RDS_CONG_MONITOR"), _recovered("ptr[out, int64]")),
    (
        (DEFINE, "definition requested for sockaddr_in"),
        {"result": _definitions(("sockaddr_in", SOCKADDR_IN_DEF)), "unknowns": []},
    ),
    # ---- two-driver corpus ----
    (
        (OPEN, "alpha_dev = {"),
        {"result": _driver("alpha", "fd_alpha"), "unknowns": []},
    ),
    (
        (IDENT, "static long alpha_ioctl("),
        {
            "result": _identifiers(
                [
                    ("ALPHA_RESET", "alpha_ioctl", "clears the device state"),
                    ("ALPHA_SET_GAIN", "alpha_ioctl", "writes the gain register"),
                ]
            ),
            "unknowns": [],
        },
    ),
    ((RECOVER, "identifier: ALPHA_RESET"), _recovered("const[0]")),
    ((RECOVER, "identifier: ALPHA_SET_GAIN"), _recovered("ptr[in, int32]")),
    (
        (OPEN, "beta_dev = {"),
        {"result": _driver("beta", "fd_beta"), "unknowns": []},
    ),
    (
        (IDENT, "static long beta_ioctl("),
        {
            "result": _identifiers(
                [
                    ("BETA_START", "beta_ioctl", "starts the engine"),
                    ("BETA_STOP", "beta_ioctl", "stops the engine"),
                ]
            ),
            "unknowns": [],
        },
    ),
    ((RECOVER, "identifier: BETA_"), _recovered("const[0]")),
]


class ScriptedModel:
    """Backend that answers from the rule table above."""

    def __init__(self) -> None:
        self.query_count = 0

    def complete(self, key: str, prompt_text: str, messages) -> str:
        self.query_count += 1
        # the few-shot examples inside the templates repeat fixture-like
        # code, so rules only look at the concrete part of each prompt
        # (the task sentence sits below the code, still inside the slice)
        body = prompt_text.split("== RELATED CODE ==", 1)[-1]
        for needles, reply in RULES:
            if all(n in body for n in needles):
                if callable(reply):
                    reply = {"result": reply(body), "unknowns": []}
                return json.dumps(reply, indent=1)
        raise RuntimeError(
            "no scripted rule matches this prompt:\n" + prompt_text[:400]
        )
