import json

import pytest
from hypothesis import given, settings, strategies as st

from nilkex import (
    DecodeError,
    SessionParams,
    SetupError,
    Transcript,
    UnitriangularGroup,
    WreathGroup,
    derive_key,
    engel_commutator,
    random_session_params,
    round_broadcast,
    run_session,
    setup_session,
    simple_commutator,
)
from nilkex.protocols import expected_key


@pytest.fixture
def example_params(ut35):
    return SessionParams(1, ut35, 2, (ut35.elementary(1, 2), ut35.elementary(2, 3)), exponents=(2, 3, 4))


def test_setup_example(example_params):
    users = setup_session(example_params)
    assert [(u.index, u.exponent) for u in users] == [(1, 2), (2, 3), (3, 4)]


def test_setup_protocol2_wreath(w3):
    params = random_session_params(2, w3, seed=1)
    assert params.n == 2
    x, g = params.bases
    assert engel_commutator(x, g, 2) != w3.identity()
    assert len(setup_session(params)) == 3


def test_degenerate_bases_rejected(ut35):
    g = ut35.elementary(1, 2)
    with pytest.raises(SetupError):
        setup_session(SessionParams(1, ut35, 2, (g, g ** 2)))


@pytest.mark.parametrize(
    "params",
    [
        lambda G: SessionParams(1, G, 3, (G.elementary(1, 2),) * 3),  # wrong class
        lambda G: SessionParams(2, G, 2, (G.elementary(1, 2), G.elementary(2, 3))),  # class 2 != 3
        lambda G: SessionParams(2, G, 1, (G.identity(), G.elementary(2, 3))),  # [x, g] = 1
        lambda G: SessionParams(1, G, 2, (G.elementary(1, 2), G.elementary(2, 3)), exponents=(1, 5, 2)),
        lambda G: SessionParams(1, G, 2, (G.elementary(1, 2), G.elementary(2, 3)), exponents=(1, 2)),
        lambda G: SessionParams(3, G, 2, ()),
    ],
)
def test_invalid_setups(ut35, params):
    with pytest.raises(SetupError):
        setup_session(params(ut35))


def test_abelian_platform_rejected():
    with pytest.raises(SetupError):
        random_session_params(1, UnitriangularGroup(2, 7))
    with pytest.raises(SetupError):
        random_session_params(2, UnitriangularGroup(2, 7))


def test_round_broadcast_example(example_params, ut35):
    users = setup_session(example_params)
    msg = round_broadcast(users[0])
    assert msg.sender == 1
    assert msg.payload == (
        (1, ut35.elementary(1, 2, 2).to_bytes()),
        (2, ut35.elementary(2, 3, 2).to_bytes()),
    )


def test_round_broadcast_protocol2_exponent_one(w3):
    params = random_session_params(2, w3, exponents=(1, 2, 1))
    msg = round_broadcast(setup_session(params)[0])
    assert msg.payload == ((1, params.bases[1].to_bytes()),)


def test_derive_key_example(example_params, ut35):
    transcript, keys = run_session(example_params)
    assert all(k.element == ut35.elementary(1, 3, 4) for k in keys)  # 24 mod 5


def test_transcript_wire_example(example_params):
    transcript, _ = run_session(example_params)
    expected = (
        b"NKEX" + bytes([1, 1])
        + bytes.fromhex("01" "00000003" "00000005") + bytes.fromhex("0002")
        + bytes([1, 0, 0]) + bytes([0, 0, 1])
        + bytes.fromhex("0001" "0002") + bytes([2, 0, 0]) + bytes([0, 0, 2])
        + bytes.fromhex("0002" "0002") + bytes([3, 0, 0]) + bytes([0, 0, 3])
        + bytes.fromhex("0003" "0002") + bytes([4, 0, 0]) + bytes([0, 0, 4])
    )
    assert transcript.to_bytes() == expected
    assert Transcript.from_bytes(expected) == transcript


def test_message_counts():
    params = random_session_params(1, UnitriangularGroup(4, 101), seed=3)
    transcript, _ = run_session(params)
    assert len(transcript.messages) == 4
    assert all(len(m.payload) == 3 for m in transcript.messages)


def test_trilinear_example_shape(rng):
    # users A, B, C, D over a class-3 platform with public x, y, z
    G = UnitriangularGroup(4, 101)
    x, y, z = G.elementary(1, 2), G.elementary(2, 3), G.elementary(3, 4)
    a, b, c, d = 5, 7, 11, 13
    params = SessionParams(1, G, 3, (x, y, z), exponents=(a, b, c, d))
    transcript, keys = run_session(params)
    assert simple_commutator([x ** b, y ** c, z ** d]) ** a == keys[0].element
    assert simple_commutator([x ** a, y ** c, z ** d]) ** b == keys[1].element
    assert simple_commutator([x ** a, y ** b, z ** d]) ** c == keys[2].element
    assert simple_commutator([x ** a, y ** b, z ** c]) ** d == keys[3].element
    assert keys[0].element == simple_commutator([x, y, z]) ** (a * b * c * d) == G.elementary(1, 4, a * b * c * d)


def test_all_exponents_one(rng):
    G = UnitriangularGroup(4, 101)
    params = random_session_params(1, G, seed=2, exponents=(1, 1, 1, 1))
    _, keys = run_session(params)
    assert all(k.element == simple_commutator(list(params.bases)) for k in keys)


@pytest.mark.parametrize(
    "protocol, platform",
    [(1, UnitriangularGroup(3, 101)), (1, UnitriangularGroup(4, 101)), (1, WreathGroup(3)),
     (2, WreathGroup(3)), (2, UnitriangularGroup(5, 101)), (2, UnitriangularGroup(4, 7)), (2, WreathGroup(5))],
)
def test_seeded_sessions_agree(protocol, platform):
    for seed in range(10):
        params = random_session_params(protocol, platform, seed=seed)
        transcript, keys = run_session(params)
        assert len({k.bytes for k in keys}) == 1
        assert not keys[0].element.is_identity
        users = setup_session(params)
        assert keys[0].element == expected_key(params, [u.exponent for u in users])


def test_protocol2_formula_with_known_exponents(w3):
    params = random_session_params(2, w3, seed=4, exponents=(2, 1, 2))
    x, g = params.bases
    _, keys = run_session(params)
    assert all(k.element == simple_commutator([x, g, g]) ** 4 for k in keys)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.permutations([3, 17, 42, 99]))
def test_exponent_order_independence(seed, exps):
    G = UnitriangularGroup(4, 101)
    params = random_session_params(1, G, seed=seed, exponents=tuple(exps))
    base = random_session_params(1, G, seed=seed, exponents=(3, 17, 42, 99))
    assert run_session(params)[1][0].bytes == run_session(base)[1][0].bytes


def test_determinism_and_replay():
    G = UnitriangularGroup(4, 101)
    t1, k1 = run_session(random_session_params(1, G, seed=9))
    t2, k2 = run_session(random_session_params(1, G, seed=9))
    assert t1.to_bytes() == t2.to_bytes() and [k.bytes for k in k1] == [k.bytes for k in k2]
    params = random_session_params(1, G, seed=9)
    user = setup_session(params)[0]
    replayed = Transcript.from_bytes(t1.to_bytes())
    assert derive_key(user, replayed).bytes == derive_key(user, replayed).bytes == k1[0].bytes


def test_transcript_carries_no_private_exponent():
    G = UnitriangularGroup(4, 101)
    params = random_session_params(1, G, seed=5)
    transcript, _ = run_session(params)
    fields = [transcript.bases] + [tuple(b for _, b in m.payload) for m in transcript.messages]
    assert all(isinstance(b, bytes) for group in fields for b in group)
    assert set(vars(transcript)) == {"protocol", "platform", "n", "bases", "messages"}


def test_missing_peer_message():
    G = UnitriangularGroup(4, 101)
    params = random_session_params(1, G, seed=5)
    users = setup_session(params)
    partial = Transcript.from_params(params, [round_broadcast(u) for u in users[:-1]])
    with pytest.raises(ValueError, match="missing"):
        derive_key(users[0], partial)


def test_foreign_transcript_rejected():
    G = UnitriangularGroup(4, 101)
    t, _ = run_session(random_session_params(1, G, seed=1))
    user = setup_session(random_session_params(1, G, seed=2))[0]
    with pytest.raises(ValueError):
        derive_key(user, t)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda b: b"XKEX" + b[4:],
        lambda b: b[:4] + b"\x02" + b[5:],
        lambda b: b[:5] + b"\x07" + b[6:],
        lambda b: b[:-1],
        lambda b: b + b"\x00",
        lambda b: b[:-1] + b"\xff",
    ],
)
def test_malformed_transcripts(mutate):
    t, _ = run_session(random_session_params(1, UnitriangularGroup(3, 101), seed=1))
    with pytest.raises(DecodeError):
        Transcript.from_bytes(mutate(t.to_bytes()))


def test_session_json():
    t, _ = run_session(random_session_params(2, WreathGroup(3), seed=1))
    d = json.loads(t.to_json())
    assert d["protocol"] == 2 and d["platform"] == "wreath:3" and len(d["messages"]) == 3
    assert d["transcript_id"] == t.transcript_id
