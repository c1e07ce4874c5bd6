"""Multi-party key agreement from commutator identities.

Protocol I (class-n platform, n + 1 users, public bases g_1..g_n): user j
broadcasts g_i^{a_j} for every base and computes a weight-n bracket from its
peers' values, raised to its own exponent. Every user lands on
``[g_1, ..., g_n]^(a_1 ... a_{n+1})``.

Protocol II (class n + 1, not n-Engel, public pair (x, g)): user j broadcasts
g^{a_j} and computes ``[x^{a_j}, g^{a_k} (k != j, ascending)]``, which equals
``[x, _n g]^(a_1 ... a_{n+1})``.

Sessions run as one synchronous broadcast round. The transcript is the only
thing that crosses the (simulated) channel, and it is byte-exact::

    "NKEX" | 0x01 | protocol u8 | platform header | n u16 |
    bases (n for Protocol I, x then g for Protocol II) |
    per sender, ascending: sender u16 | count u16 | elements
"""

from __future__ import annotations

import functools
import hashlib
import json
import math
import random
import struct
from dataclasses import dataclass, field

from .commutators import (
    EXHAUSTIVE_ORDER_LIMIT,
    ClassCertificate,
    certify_class,
    engel_commutator,
    find_nondegenerate_witness,
    simple_commutator,
)
from .errors import DecodeError, SetupError
from .groups import GroupElement, Platform, platform_from_header

MAGIC = b"NKEX"
VERSION = 1


@dataclass(frozen=True)
class SessionParams:
    protocol: int
    platform: Platform
    n: int
    bases: tuple[GroupElement, ...]
    rng_seed: int | None = None
    exponents: tuple[int, ...] | None = None

    @property
    def users(self) -> int:
        return self.n + 1


@dataclass
class UserState:
    index: int
    exponent: int
    params: SessionParams
    key: SharedKey | None = None


@dataclass(frozen=True)
class BroadcastMessage:
    sender: int
    payload: tuple[tuple[int, bytes], ...]


@dataclass(frozen=True)
class SharedKey:
    element: GroupElement

    @property
    def bytes(self) -> bytes:
        return self.element.to_bytes()

    def hex(self) -> str:
        return self.bytes.hex()


@functools.lru_cache(maxsize=None)
def platform_certificate(platform: Platform) -> ClassCertificate:
    """Class certificate used at session setup; exhaustive on tiny platforms."""
    return certify_class(
        platform, exhaustive=platform.order <= EXHAUSTIVE_ORDER_LIMIT, samples=200, seed=0
    )


def validate_params(params: SessionParams, certificate: ClassCertificate | None = None) -> None:
    """Raise SetupError unless the session yields a well-defined, non-identity key."""
    P, n = params.platform, params.n
    if params.protocol not in (1, 2):
        raise SetupError(f"unknown protocol {params.protocol!r}")
    P.check(*params.bases)
    cert = certificate or platform_certificate(P)
    if cert.platform != P or cert.refuted:
        raise SetupError(f"{P.name} has no valid class certificate")
    identity = P.identity()
    if params.protocol == 1:
        if n < 2:
            raise SetupError("Protocol I needs n > 1")
        if cert.class_upper != n:
            raise SetupError(f"Protocol I with n = {n} needs class {n}, {P.name} has {cert.class_upper}")
        if len(params.bases) != n:
            raise SetupError(f"Protocol I needs {n} bases, got {len(params.bases)}")
        if simple_commutator(list(params.bases)) == identity:
            raise SetupError("degenerate bases: [g_1, ..., g_n] is the identity")
    else:
        if n < 1:
            raise SetupError("Protocol II needs n >= 1")
        if cert.class_upper != n + 1:
            raise SetupError(
                f"Protocol II with n = {n} needs class {n + 1}, {P.name} has {cert.class_upper}"
            )
        if len(params.bases) != 2:
            raise SetupError("Protocol II needs the pair (x, g)")
        x, g = params.bases
        if engel_commutator(x, g, n) == identity:
            raise SetupError("degenerate pair: [x, _n g] is the identity")
    if params.exponents is not None:
        if len(params.exponents) != params.users:
            raise SetupError(f"need {params.users} exponents, got {len(params.exponents)}")
        for a in params.exponents:
            if a % P.characteristic == 0:
                raise SetupError(f"exponent {a} vanishes mod {P.characteristic}")


def setup_session(
    params: SessionParams, certificate: ClassCertificate | None = None
) -> list[UserState]:
    validate_params(params, certificate)
    if params.exponents is not None:
        exponents = list(params.exponents)
    else:
        rng = random.Random(params.rng_seed)
        q = params.platform.characteristic
        exponents = [rng.randrange(1, q) for _ in range(params.users)]
    return [UserState(j, a, params) for j, a in enumerate(exponents, start=1)]


def round_broadcast(state: UserState) -> BroadcastMessage:
    params = state.params
    P = params.platform
    if params.protocol == 1:
        payload = tuple(
            (i, P.power(g, state.exponent).to_bytes()) for i, g in enumerate(params.bases, start=1)
        )
    else:
        g = params.bases[1]
        payload = ((1, P.power(g, state.exponent).to_bytes()),)
    return BroadcastMessage(state.index, payload)


@dataclass(frozen=True)
class Transcript:
    protocol: int
    platform: Platform
    n: int
    bases: tuple[bytes, ...]
    messages: tuple[BroadcastMessage, ...] = field(default=())

    @classmethod
    def from_params(cls, params: SessionParams, messages=()) -> Transcript:
        return cls(
            params.protocol,
            params.platform,
            params.n,
            tuple(g.to_bytes() for g in params.bases),
            tuple(sorted(messages, key=lambda m: m.sender)),
        )

    def base_elements(self) -> list[GroupElement]:
        return [self.platform.decode(b) for b in self.bases]

    def message_from(self, sender: int) -> BroadcastMessage | None:
        return next((m for m in self.messages if m.sender == sender), None)

    def to_bytes(self) -> bytes:
        out = [MAGIC, bytes([VERSION, self.protocol]), self.platform.header()]
        out.append(struct.pack(">H", self.n))
        out.extend(self.bases)
        for msg in self.messages:
            out.append(struct.pack(">HH", msg.sender, len(msg.payload)))
            out.extend(data for _, data in msg.payload)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> Transcript:
        """Parse and fully validate a transcript; any defect raises DecodeError."""
        data = bytes(data)
        if data[:4] != MAGIC:
            raise DecodeError("bad magic, not an NKEX transcript")
        if len(data) < 6 or data[4] != VERSION:
            raise DecodeError("unsupported transcript version")
        protocol = data[5]
        if protocol not in (1, 2):
            raise DecodeError(f"unknown protocol tag {protocol}")
        platform, pos = platform_from_header(data, 6)
        size = platform.element_size

        def take(k: int) -> bytes:
            nonlocal pos
            if pos + k > len(data):
                raise DecodeError("truncated transcript")
            chunk = data[pos : pos + k]
            pos += k
            return chunk

        (n,) = struct.unpack(">H", take(2))
        nbases = n if protocol == 1 else 2
        bases = tuple(take(size) for _ in range(nbases))
        for b in bases:
            platform.decode(b)
        messages = []
        while pos < len(data):
            sender, count = struct.unpack(">HH", take(4))
            payload = tuple((i, take(size)) for i in range(1, count + 1))
            for _, b in payload:
                platform.decode(b)
            messages.append(BroadcastMessage(sender, payload))
        senders = [m.sender for m in messages]
        if senders != sorted(set(senders)):
            raise DecodeError("messages must be ordered by distinct sender index")
        return cls(protocol, platform, n, bases, tuple(messages))

    @property
    def transcript_id(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "transcript_id": self.transcript_id,
            "protocol": self.protocol,
            "platform": self.platform.name,
            "n": self.n,
            "bases": [b.hex() for b in self.bases],
            "messages": [
                {"sender": m.sender, "elements": [b.hex() for _, b in m.payload]}
                for m in self.messages
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _check_transcript(state: UserState, transcript: Transcript) -> None:
    params = state.params
    if (
        transcript.protocol != params.protocol
        or transcript.platform != params.platform
        or transcript.n != params.n
        or transcript.bases != tuple(g.to_bytes() for g in params.bases)
    ):
        raise ValueError("transcript does not belong to this session")


def derive_key(state: UserState, transcript: Transcript) -> SharedKey:
    """User ``state.index`` assembles its bracket from the peers' broadcasts."""
    params = state.params
    _check_transcript(state, transcript)
    P, j = params.platform, state.index
    peers = [k for k in range(1, params.users + 1) if k != j]
    received = {}
    expected_len = params.n if params.protocol == 1 else 1
    for k in peers:
        msg = transcript.message_from(k)
        if msg is None:
            raise ValueError(f"missing broadcast from user {k}")
        if len(msg.payload) != expected_len:
            raise ValueError(f"user {k} sent {len(msg.payload)} elements, expected {expected_len}")
        received[k] = [P.decode(b) for _, b in msg.payload]

    if params.protocol == 1:
        # slot i is filled by the i-th peer in ascending order
        slots = [received[k][i] for i, k in enumerate(peers)]
        element = P.power(simple_commutator(slots), state.exponent)
    else:
        x = params.bases[0]
        element = simple_commutator([P.power(x, state.exponent)] + [received[k][0] for k in peers])
    state.key = SharedKey(element)
    return state.key


def expected_key(params: SessionParams, exponents) -> GroupElement:
    """The common key computed directly from the bases and every exponent."""
    e = math.prod(exponents)
    P = params.platform
    if params.protocol == 1:
        return P.power(simple_commutator(list(params.bases)), e)
    x, g = params.bases
    return P.power(engel_commutator(x, g, params.n), e)


def run_session(
    params: SessionParams, certificate: ClassCertificate | None = None
) -> tuple[Transcript, list[SharedKey]]:
    users = setup_session(params, certificate)
    transcript = Transcript.from_params(params, [round_broadcast(u) for u in users])
    return transcript, [derive_key(u, transcript) for u in users]


def random_session_params(
    protocol: int,
    platform: Platform,
    *,
    n: int | None = None,
    seed: int = 0,
    exponents: tuple[int, ...] | None = None,
    tries: int = 1000,
) -> SessionParams:
    """Pick public bases for a session; n defaults to the largest the platform supports."""
    if n is None:
        n = platform.claimed_class if protocol == 1 else platform.claimed_class - 1
    if protocol == 1:
        if n < 2:
            raise SetupError(f"Protocol I needs class > 1, {platform.name} has class {n}")
        rng = random.Random(f"bases:{seed}")
        identity = platform.identity()
        for _ in range(tries):
            bases = tuple(platform.random_element(rng) for _ in range(n))
            if simple_commutator(list(bases)) != identity:
                break
        else:
            raise SetupError(f"no non-degenerate bases found on {platform.name}")
    elif protocol == 2:
        if n < 1:
            raise SetupError(f"Protocol II needs class > 1, {platform.name} is abelian")
        witness = find_nondegenerate_witness(platform, n + 1, budget=tries, seed=seed)
        if witness is None:
            raise SetupError(f"{platform.name} looks {n}-Engel; no pair with [x, _n g] != 1")
        bases = witness
    else:
        raise SetupError(f"unknown protocol {protocol!r}")
    return SessionParams(protocol, platform, n, bases, rng_seed=seed, exponents=exponents)
