"""Cryptanalysis: generic discrete-log solvers and the band-linearity attack on UT platforms.

For g = I + N in UT(m, q), write d for the first superdiagonal on which N is
nonzero. Every term of the binomial expansion of (I + N)^a past the linear
one lives strictly above band d, so on band d the entries of g^a are exactly
a times those of g (mod q). One modular division therefore recovers a from
any public power, and with it the session key of either protocol.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from .errors import DecodeError, NotAPowerError, UnsupportedPlatformError
from .groups import GroupElement, Platform, UnitriangularGroup, UTMatrix
from .protocols import SessionParams, Transcript, UserState, derive_key


class _Tally:
    """Group arithmetic that counts multiplications (the DLP cost unit)."""

    def __init__(self, group: Platform):
        self.group = group
        self.mults = 0

    def mul(self, a, b):
        self.mults += 1
        return self.group.multiply(a, b)

    def pow(self, g, a: int):
        if a < 0:
            g, a = self.group.inverse(g), -a
        result = self.group.identity()
        while a:
            if a & 1:
                result = self.mul(result, g)
            a >>= 1
            if a:
                g = self.mul(g, g)
        return result

    def comm(self, a, b):
        inv = self.group.inverse
        return self.mul(self.mul(inv(a), inv(b)), self.mul(a, b))

    def simple(self, args):
        c = args[0]
        for g in args[1:]:
            c = self.comm(c, g)
        return c


# ---------------------------------------------------------------------------
# generic DLP


@dataclass(frozen=True)
class DlpInstance:
    base: GroupElement
    target: GroupElement
    order_bound: int

    def __post_init__(self):
        if self.order_bound < 1:
            raise ValueError("order bound must be positive")
        self.base.group.check(self.target)


@dataclass(frozen=True)
class DlpResult:
    exponent: int | None
    operations: int
    table_size: int = 0

    @property
    def solved(self) -> bool:
        return self.exponent is not None


def _confirmed(inst: DlpInstance, a: int) -> bool:
    return inst.base.group.power(inst.base, a) == inst.target


def dlp_bruteforce(inst: DlpInstance) -> DlpResult:
    """Least a in [0, order_bound) with base^a = target, by walking the powers."""
    G = inst.base.group
    tally = _Tally(G)
    cur = G.identity()
    for a in range(inst.order_bound):
        if cur == inst.target:
            assert _confirmed(inst, a)
            return DlpResult(a, tally.mults)
        cur = tally.mul(cur, inst.base)
    return DlpResult(None, tally.mults)


def dlp_bsgs(inst: DlpInstance) -> DlpResult:
    """Baby-step giant-step with m = ceil(sqrt(order_bound)).

    Returns the same least exponent as :func:`dlp_bruteforce`: giant steps
    run in ascending order and the baby table keeps the smallest index for
    each element. Cost is about 2m multiplications plus one power for g^-m.
    """
    G = inst.base.group
    tally = _Tally(G)
    m = math.isqrt(inst.order_bound - 1) + 1
    table: dict[GroupElement, int] = {}
    cur = G.identity()
    for j in range(m):
        table.setdefault(cur, j)
        if j < m - 1:
            cur = tally.mul(cur, inst.base)
    giant = G.inverse(tally.pow(inst.base, m))
    cur = inst.target
    for i in range(m):
        j = table.get(cur)
        if j is not None:
            a = i * m + j
            if a >= inst.order_bound:
                break
            if not _confirmed(inst, a):
                raise AssertionError(f"BSGS produced a wrong exponent {a}")
            return DlpResult(a, tally.mults, len(table))
        if i < m - 1:
            cur = tally.mul(cur, giant)
    return DlpResult(None, tally.mults, len(table))


# ---------------------------------------------------------------------------
# band linearity


def first_band(g: UTMatrix) -> int | None:
    """Smallest d >= 1 with a nonzero entry on superdiagonal d, or None for the identity."""
    m = g.group.m
    for d in range(1, m):
        if any(g.rows[i][i + d] for i in range(m - d)):
            return d
    return None


def _exponent_period(G: UnitriangularGroup) -> int:
    # every element's order divides q^s once q^s >= m
    s = 1
    while G.q**s < G.m:
        s += 1
    return G.q**s


def extract_exponent_ut(g: UTMatrix, h: UTMatrix, tally: _Tally | None = None) -> int | None:
    """Recover a with g^a = h from g's first nonzero band.

    The answer is a mod q, which is the full exponent whenever q >= m.
    Returns None when g is the identity (nothing to divide by); raises
    NotAPowerError when the bands disagree or the candidate fails to verify.
    """
    G = g.group
    if not isinstance(G, UnitriangularGroup):
        raise UnsupportedPlatformError(f"band extraction needs a UT platform, got {G.name}")
    G.check(h)
    d = first_band(g)
    if d is None:
        return None
    m, q = G.m, G.q
    for e in range(1, d):
        if any(h.rows[i][i + e] for i in range(m - e)):
            raise NotAPowerError("h is not a power of g: nonzero entries below g's first band")
    a = None
    for i in range(m - d):
        gv, hv = g.rows[i][i + d], h.rows[i][i + d]
        if gv:
            cand = hv * pow(gv, -1, q) % q
            if a is None:
                a = cand
            elif a != cand:
                raise NotAPowerError("h is not a power of g: inconsistent band ratios")
        elif hv:
            raise NotAPowerError("h is not a power of g: band entry where g has none")
    tally = tally or _Tally(G)
    for k in range(_exponent_period(G) // q):
        if tally.pow(g, a + k * q) == h:
            return a + k * q
    raise NotAPowerError("h is not a power of g: higher bands disagree")


# ---------------------------------------------------------------------------
# transcript attacks


@dataclass
class AttackReport:
    transcript_id: str
    protocol: int | None = None
    platform: str | None = None
    recovered_exponents: dict[int, int] = field(default_factory=dict)
    exponent_modulus: int | None = None
    key_bytes: bytes | None = None
    success: bool = False
    mode: str = "consistency"
    operations_count: int = 0
    invalid_session: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "transcript_id": self.transcript_id,
            "protocol": self.protocol,
            "platform": self.platform,
            "recovered_exponents": {str(j): a for j, a in self.recovered_exponents.items()},
            "exponent_modulus": self.exponent_modulus,
            "key": self.key_bytes.hex() if self.key_bytes is not None else None,
            "success": self.success,
            "mode": self.mode,
            "operations_count": self.operations_count,
            "invalid_session": self.invalid_session,
            "error": self.error,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _load(transcript: Transcript | bytes) -> Transcript | AttackReport:
    if isinstance(transcript, Transcript):
        return transcript
    try:
        return Transcript.from_bytes(transcript)
    except DecodeError as exc:
        tid = hashlib.sha256(bytes(transcript)).hexdigest()[:16]
        return AttackReport(tid, error=f"decode error: {exc}")


def _break(transcript, protocol: int, reference_key: bytes | None) -> AttackReport:
    t = _load(transcript)
    if isinstance(t, AttackReport):
        return t
    if t.protocol != protocol:
        raise ValueError(f"expected a Protocol {'I' * protocol} transcript, got protocol {t.protocol}")
    G = t.platform
    if not isinstance(G, UnitriangularGroup):
        raise UnsupportedPlatformError(f"unsupported platform {G.name}: no band structure to exploit")

    report = AttackReport(
        t.transcript_id, protocol, G.name, exponent_modulus=G.q,
        mode="reference" if reference_key is not None else "consistency",
    )
    tally = _Tally(G)
    bases = t.base_elements()
    users = t.n + 1
    senders = [m.sender for m in t.messages]
    if senders != list(range(1, users + 1)):
        report.error = f"transcript needs broadcasts from users 1..{users}, has {senders}"
        return report

    # Protocol I users publish every g_i^{a_j}; Protocol II only g^{a_j}
    pairs = list(enumerate(bases)) if protocol == 1 else [(0, bases[1])]
    consistent = True
    for msg in t.messages:
        values = [G.decode(b) for _, b in msg.payload]
        found = []
        try:
            for idx, base in pairs:
                a = extract_exponent_ut(base, values[idx], tally)
                if a is not None:
                    found.append(a)
        except (NotAPowerError, IndexError) as exc:
            report.error = f"user {msg.sender}: {exc}"
            return report
        if not found:
            report.error = f"user {msg.sender}: every base is the identity, exponent indeterminate"
            return report
        consistent &= len(set(found)) == 1
        report.recovered_exponents[msg.sender] = found[0]

    exps = [report.recovered_exponents[j] for j in range(1, users + 1)]
    if any(a % G.q == 0 for a in exps):
        report.invalid_session = True
    core = tally.simple(bases) if protocol == 1 else tally.simple([bases[0]] + [bases[1]] * t.n)
    key = tally.pow(core, math.prod(exps))
    report.key_bytes = key.to_bytes()
    report.operations_count = tally.mults

    if report.invalid_session:
        report.error = "invalid session: a private exponent is 0 mod q"
    elif reference_key is not None:
        report.success = report.key_bytes == bytes(reference_key)
    else:
        # replay user 1 with the recovered exponent through the honest derivation
        params = SessionParams(protocol, G, t.n, tuple(bases))
        replayed = derive_key(UserState(1, exps[0], params), t)
        report.success = consistent and replayed.bytes == report.key_bytes and not key.is_identity
    return report


def break_protocol1_ut(
    transcript: Transcript | bytes, reference_key: bytes | None = None
) -> AttackReport:
    """Recover the Protocol I key from a UT transcript alone."""
    return _break(transcript, 1, reference_key)


def break_protocol2_ut(
    transcript: Transcript | bytes, reference_key: bytes | None = None
) -> AttackReport:
    """Recover the Protocol II key from a UT transcript alone."""
    return _break(transcript, 2, reference_key)
