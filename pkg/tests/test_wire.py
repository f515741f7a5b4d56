"""Wire codec: layout vectors, round trips, truncation, text mirror."""
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adflow.errors import BadMagic, Truncated, UnknownUnionTag, UnsupportedVersion, WireError
from adflow.geometry import GeoAnchor, Mesh, f32
from adflow.params import Accuracy, ParameterDescriptor, ParameterKind
from adflow.wire import (
    ComponentsBody,
    FrameReader,
    Hello,
    HostAssign,
    HostChanged,
    LockDeny,
    LockGrant,
    LockRelease,
    LockRequest,
    MeshDataBody,
    ParameterUpdateBody,
    Presence,
    Reject,
    Role,
    decode,
    decode_text,
    encode,
    encode_text,
    frame,
)


def _slider(guid="a", value=3.5) -> ParameterDescriptor:
    return ParameterDescriptor(
        guid=guid, name="s", kind=ParameterKind.NUMBER_SLIDER, value=value,
        accuracy=Accuracy.FLOAT, min=0.0, max=10.0, epsilon=f32(0.01),
        decimal_places=2)


def test_empty_components_prefix():
    data = encode(ComponentsBody([]))
    assert data[:6] == b"PARA\x01\x01"
    assert data[6:] == b"\x00\x00\x00\x00"


def test_slider_roundtrip():
    body = ComponentsBody([_slider()])
    back = decode(encode(body))
    assert back == body


def test_all_descriptor_kinds_roundtrip():
    items = [
        ParameterDescriptor(guid="g1", name="t", kind=ParameterKind.BOOLEAN_TOGGLE,
                            value=True),
        _slider("g2", f32(1.25)),
        ParameterDescriptor(guid="g3", name="l", kind=ParameterKind.LIST_PARAMETER,
                            value=1, items=["small", "medium", "big"]),
    ]
    assert decode(encode(ComponentsBody(items))) == ComponentsBody(items)


def test_bad_magic():
    data = bytearray(encode(ComponentsBody([])))
    data[0] ^= 0xFF
    with pytest.raises(BadMagic):
        decode(bytes(data))


def test_unsupported_version():
    data = bytearray(encode(ComponentsBody([])))
    data[4] = 9
    with pytest.raises(UnsupportedVersion):
        decode(bytes(data))


def test_unknown_kind_and_tags():
    data = bytearray(encode(ComponentsBody([])))
    data[5] = 77
    with pytest.raises(UnknownUnionTag):
        decode(bytes(data))
    payload = bytearray(encode(ComponentsBody([_slider()])))
    payload[10] = 99  # the union tag of the first item
    with pytest.raises(UnknownUnionTag):
        decode(bytes(payload))


def _sample_messages() -> list:
    mesh = Mesh(vertices=[(0.0, 1.0, 2.0), (3.0, 4.0, 5.0), (6.0, 7.0, 8.0)],
                triangles=[(0, 1, 2)])
    return [
        ComponentsBody([]),
        ComponentsBody([_slider()]),
        MeshDataBody(guid="def", meshes=[mesh],
                     geo=GeoAnchor(lat=50.5, lon=4.25, heading=12.5)),
        MeshDataBody(guid="", meshes=[], geo=None),
        ParameterUpdateBody(guid="g", kind=ParameterKind.NUMBER_SLIDER,
                            value=f32(2.5)),
        ParameterUpdateBody(guid="g", kind=ParameterKind.BOOLEAN_TOGGLE,
                            value=True),
        ParameterUpdateBody(guid="g", kind=ParameterKind.LIST_PARAMETER,
                            value=2),
        Hello(Role.DESIGNER),
        Hello(Role.VIEWER),
        HostAssign(you=True, address="10.0.0.1:8000"),
        HostChanged(address="10.0.0.2:8000"),
        LockRequest(guid="g"),
        LockGrant(guid="g"),
        LockDeny(guid="g", holder="peer"),
        LockRelease(guid="g"),
        Reject(guid="g", reason="locked:other"),
        Presence(data=b"\x00\x01\x02 blob"),
    ]


@pytest.mark.parametrize("message", _sample_messages(),
                         ids=lambda m: type(m).__name__)
def test_binary_text_agreement(message):
    assert decode(encode(message)) == message
    assert decode_text(encode_text(message)) == message


def test_truncation_every_boundary():
    for message in _sample_messages():
        data = encode(message)
        for cut in range(len(data)):
            with pytest.raises(Truncated):
                decode(data[:cut])


def test_trailing_garbage_rejected():
    data = encode(ComponentsBody([])) + b"x"
    with pytest.raises(WireError):
        decode(data)


def test_text_example_shape():
    body = ComponentsBody([ParameterDescriptor(
        guid="abc", name="t", kind=ParameterKind.BOOLEAN_TOGGLE, value=True)])
    text = encode_text(body)
    assert text == ('{"kind":"Components","items":[{"type":"BooleanToggle",'
                    '"name":"t","guid":"abc","value":true}]}')


def test_malformed_text_rejected():
    for bad in ("{", "[]", '{"kind":"Nope"}', '{"no-kind":1}',
                '{"kind":"Components","items":[{"type":"X"}]}'):
        with pytest.raises(WireError):
            decode_text(bad)


def test_components_size_linear_bound():
    items = [_slider(guid=f"guid-{i}", value=float(i)) for i in range(50)]
    data = encode(ComponentsBody(items))
    string_bytes = sum(len(d.name) + len(d.guid) for d in items)
    assert len(data) <= 10 + string_bytes + 32 * len(items)


def test_frame_reader_reassembles_split_stream():
    messages = _sample_messages()
    stream = b"".join(frame(encode(m)) for m in messages)
    reader = FrameReader()
    out = []
    rng = random.Random(5)
    i = 0
    while i < len(stream):
        step = rng.randint(1, 7)
        out.extend(reader.feed(stream[i:i + step]))
        i += step
    assert [decode(p) for p in out] == messages


_text = st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=0x2FA), max_size=20)


@st.composite
def descriptors(draw):
    kind = draw(st.sampled_from(list(ParameterKind)))
    name = draw(_text)
    guid = draw(_text)
    if kind is ParameterKind.BOOLEAN_TOGGLE:
        return ParameterDescriptor(guid=guid, name=name, kind=kind,
                                   value=draw(st.booleans()))
    if kind is ParameterKind.NUMBER_SLIDER:
        fin = st.floats(allow_nan=False, allow_infinity=False, width=32)
        return ParameterDescriptor(
            guid=guid, name=name, kind=kind, value=f32(draw(fin)),
            accuracy=draw(st.sampled_from(list(Accuracy))),
            min=f32(draw(fin)), max=f32(draw(fin)), epsilon=f32(draw(fin)),
            decimal_places=draw(st.integers(-32768, 32767)))
    items = draw(st.lists(_text, max_size=5))
    return ParameterDescriptor(guid=guid, name=name, kind=kind,
                               value=draw(st.integers(0, 2 ** 31)),
                               items=items)


@settings(max_examples=200, deadline=None)
@given(st.lists(descriptors(), max_size=6))
def test_fuzzed_components_roundtrip(items):
    body = ComponentsBody(items)
    assert decode(encode(body)) == body
    assert decode_text(encode_text(body)) == body


@settings(max_examples=100, deadline=None)
@given(st.binary(max_size=64))
def test_fuzzed_presence_roundtrip(blob):
    body = Presence(blob)
    assert decode(encode(body)) == body
    assert decode_text(encode_text(body)) == body


@settings(max_examples=100, deadline=None)
@given(st.binary(max_size=40))
def test_random_bytes_never_crash(data):
    try:
        decode(data)
    except WireError:
        pass
