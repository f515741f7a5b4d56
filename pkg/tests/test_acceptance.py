"""Acceptance suite: one test per acceptance criterion, full scale.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS line per
criterion as it completes.
"""
import math
import random
import subprocess
import sys
import time

import pytest

from adflow import wire
from adflow.dataflow import EvaluationEngine
from adflow.errors import GraphError, StructuralEdgeForbidden, Truncated, WireError
from adflow.fixtures import build_cube_graph, build_spiral_graph
from adflow.geometry import (
    GeoAnchor,
    Mesh,
    box_mesh,
    compute_normals,
    signed_volume,
    to_render_coords,
)
from adflow.geo import ER, LatLon, from_web_mercator, haversine_distance, to_web_mercator
from adflow.ghx import parse_document, serialize_document
from adflow.graph import TypedGraph, VertexKind
from adflow.params import Accuracy, ParameterDescriptor, ParameterKind
from adflow.relay import Disposition, Session, SessionConfig, Strategy
from adflow.speech import AddSlider, AddToggle, apply_command, parse_command
from adflow.values import ValueKind
from adflow.wire import ComponentsBody, HostChanged, ParameterUpdateBody, Role

from helpers import graphs_isomorphic, random_definition


def _ok(line: str) -> None:
    print(f"ACCEPTANCE PASS: {line}", flush=True)


# ---------------------------------------------------------------------------
# 1. graph validity fuzz


def _dfs_acyclic(edges) -> bool:
    succ = {}
    for (u, v) in edges:
        succ.setdefault(u, []).append(v)
    state: dict = {}
    for start in succ:
        if start in state:
            continue
        stack = [(start, iter(succ.get(start, ())))]
        state[start] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if state.get(nxt) == 1:
                    return False
                if nxt not in state:
                    state[nxt] = 1
                    stack.append((nxt, iter(succ.get(nxt, ()))))
                    advanced = True
                    break
            if not advanced:
                state[node] = 2
                stack.pop()
    return True


def test_graph_validity_fuzz():
    rng = random.Random(0xADF)
    started = time.monotonic()
    ops_done = 0
    target = 100_000
    graph = TypedGraph()
    expected_structural = set()
    type_pool = ["NumberSlider", "BooleanToggle", "Panel", "ListParameter",
                 "Range", "Evaluate", "ConstructPoint", "Polyline", "Box",
                 "Pipe", "GenericPrimitive"]

    def reset():
        nonlocal graph, expected_structural
        graph = random_definition(rng, components=rng.randint(2, 25))
        expected_structural = set(graph.structural_edges)

    reset()
    while ops_done < target:
        ops_done += 1
        roll = rng.random()
        vertices = list(graph.vertices)
        try:
            if roll < 0.22:
                cid = graph.add_component(rng.choice(type_pool), "v",
                                          (rng.random(), rng.random()))
                for port in graph.ports_of(cid):
                    if port.kind is VertexKind.INPUT_PORT:
                        expected_structural.add((port.id, cid))
                    else:
                        expected_structural.add((cid, port.id))
            elif roll < 0.55 and vertices:
                u = rng.choice(vertices)
                v = rng.choice(vertices)
                graph.add_link(u, v)
                assert _dfs_acyclic(graph.edges), "cycle admitted"
            elif roll < 0.70 and graph.edges:
                edge = rng.choice(sorted(graph.edges))
                if edge in expected_structural:
                    with pytest.raises(StructuralEdgeForbidden):
                        graph.remove_link(*edge)
                else:
                    graph.remove_link(*edge)
            elif roll < 0.80 and vertices:
                victim = rng.choice(vertices)
                if graph.vertices[victim].is_port:
                    with pytest.raises(GraphError):
                        graph.remove_component(victim)
                else:
                    doomed = {victim} | {p.id for p in graph.ports_of(victim)}
                    graph.remove_component(victim)
                    expected_structural = {
                        e for e in expected_structural
                        if e[0] not in doomed and e[1] not in doomed}
            elif roll < 0.88 and vertices:
                graph.move_component(rng.choice(vertices),
                                     (rng.random(), rng.random()))
            elif roll < 0.95:
                members = [c.id for c in graph.components()]
                if members:
                    graph.create_group(
                        rng.sample(members, k=min(len(members), 3)), "g")
            elif graph.groups:
                graph.dissolve_group(rng.choice(graph.groups).id)
        except GraphError:
            pass  # rejected edits must leave the graph untouched & valid

        if ops_done % 25 == 0 or ops_done == target:
            assert graph.validate() == []
            assert graph.structural_edges == expected_structural
        if len(graph.vertices) > 200:
            assert graph.validate() == []
            reset()
    assert graph.validate() == []
    elapsed = time.monotonic() - started
    assert elapsed < 30.0, f"fuzz took {elapsed:.1f}s"
    _ok(f"graph fuzz: {target} edits, no violation/cycle/structural touch "
        f"({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 2. file round trip


def _permuted(text: str, rng: random.Random) -> str:
    import xml.etree.ElementTree as ET

    root = ET.fromstring(text)
    objects = root.find("objects")
    if objects is None:
        return text
    children = list(objects)
    rng.shuffle(children)
    for child in list(objects):
        objects.remove(child)
    for child in children:
        objects.append(child)
    return ET.tostring(root, encoding="unicode")


def test_file_round_trip_500():
    rng = random.Random(0x10)
    started = time.monotonic()
    for i in range(500):
        graph = random_definition(rng, components=rng.randint(1, 12))
        text = serialize_document(graph)
        parsed, _ = parse_document(text)
        assert graphs_isomorphic(graph, parsed), f"definition {i}"
        shuffled, _ = parse_document(_permuted(text, rng))
        assert graphs_isomorphic(graph, shuffled), f"permutation {i}"
    _ok(f"file round trip: 500 definitions + permutations isomorphic "
        f"({time.monotonic() - started:.1f}s)")


# ---------------------------------------------------------------------------
# 3. evaluation oracle


def _mesh_key(meshes):
    return tuple((tuple(m.vertices), tuple(m.triangles)) for m in meshes)


def test_evaluation_oracle():
    spiral = build_spiral_graph()
    result = EvaluationEngine(spiral).solve()
    assert not result.errors
    curve = next(v for v in result.values.values()
                 if v.kind is ValueKind.CURVE)
    assert len(curve.data) == 121
    for i, (x, y, z) in enumerate(curve.data):
        t = 6.0 * math.pi * i / 120.0
        assert abs(x - t * math.cos(t)) < 1e-9
        assert abs(y - t * math.sin(t)) < 1e-9
        assert abs(z - t) < 1e-9

    cube = build_cube_graph()
    engine = EvaluationEngine(cube)
    mesh = engine.solve().meshes[0]
    size = next(d for d in engine.parameters() if d.name == "Size").value
    center = [sum(v[axis] for v in mesh.vertices) / 8 for axis in range(3)]
    corners = set(mesh.vertices)
    assert len(corners) == 8
    for corner in corners:
        for axis in range(3):
            assert abs(abs(corner[axis] - center[axis]) - size / 2) < 1e-6

    rng = random.Random(0xE7A)
    live = EvaluationEngine(spiral, coalesce_window_ms=0.0)
    live.solve()
    guids = [d.guid for d in live.parameters()]
    for step in range(1000):
        descriptor = live.descriptor(rng.choice(guids))
        if descriptor.kind is ParameterKind.BOOLEAN_TOGGLE:
            value = rng.random() < 0.5
        else:
            value = rng.uniform(descriptor.min, descriptor.max)
        live.enqueue_update(descriptor.guid, value, timestamp=float(step))
        live.drain()
        live.solve()
    incremental = live.solve()
    fresh = EvaluationEngine(spiral.copy()).solve()
    assert incremental.values == fresh.values
    assert _mesh_key(incremental.meshes) == _mesh_key(fresh.meshes)
    assert incremental.unevaluated == fresh.unevaluated
    assert [(e.vertex_id, e.message) for e in incremental.errors] == \
        [(e.vertex_id, e.message) for e in fresh.errors]
    _ok("evaluation oracle: spiral 1e-9, cube corners at +-size/2, "
        "1000-update incremental == from-scratch bit-for-bit")


# ---------------------------------------------------------------------------
# 4. geometry


def test_geometry_criteria():
    meshes = [box_mesh((0, 0, 0), 1.0), box_mesh((3, -2, 5), 2.5)]
    spiral_mesh = EvaluationEngine(build_spiral_graph()).solve().meshes[0]
    meshes.append(Mesh(vertices=list(spiral_mesh.vertices),
                       triangles=list(spiral_mesh.triangles)))
    for mesh in meshes:
        twice = to_render_coords(to_render_coords(mesh))
        assert twice.vertices == mesh.vertices
        assert twice.triangles == mesh.triangles
    for mesh in meshes[:2]:  # closed meshes only
        model = signed_volume(mesh)
        render = signed_volume(to_render_coords(mesh), left_handed=True)
        assert abs(render - model) <= 1e-6 * abs(model)

    tri = Mesh(vertices=[(0, 0, 0), (1, 0, 0), (0, 1, 0)],
               triangles=[(0, 1, 2)])
    for normal in compute_normals(tri).normals:
        assert max(abs(normal[0]), abs(normal[1]), abs(normal[2] - 1.0)) < 1e-6
    cube = compute_normals(box_mesh((0, 0, 0), 2.0))
    component = 1.0 / math.sqrt(3.0)
    for vertex, normal in zip(cube.vertices, cube.normals):
        for vi, ni in zip(vertex, normal):
            assert abs(abs(ni) - component) < 1e-6
            assert math.copysign(1.0, ni) == math.copysign(1.0, vi)
    _ok("geometry: involution, signed volume within 1e-6, "
        "triangle/cube normals within 1e-6")


# ---------------------------------------------------------------------------
# 5. geodesy


def test_geodesy_criteria():
    rng = random.Random(0x6E0)
    for _ in range(10_000):
        point = LatLon(rng.uniform(-85, 85), rng.uniform(-180, 180))
        back = from_web_mercator(to_web_mercator(point))
        assert abs(back.lat - point.lat) < 1e-9
        assert abs(back.lon - point.lon) < 1e-9

    expected_y = math.log(math.tan((90.0 + 45.0) * math.pi / 360.0)) \
        / (math.pi / 180.0) * 20037508.342789244 / 180.0
    assert abs(to_web_mercator(LatLon(45, 0)).y - expected_y) < 0.01

    quarter = haversine_distance(LatLon(0, 0), LatLon(0, 90))
    assert abs(quarter - ER * math.pi / 2) <= 1e-6 * (ER * math.pi / 2)

    for _ in range(2_000):
        a = LatLon(rng.uniform(-90, 90), rng.uniform(-180, 180))
        b = LatLon(rng.uniform(-90, 90), rng.uniform(-180, 180))
        c = LatLon(rng.uniform(-90, 90), rng.uniform(-180, 180))
        assert haversine_distance(a, b) == haversine_distance(b, a)
        assert haversine_distance(a, b) <= \
            haversine_distance(a, c) + haversine_distance(c, b) + 1e-6
    _ok("geodesy: 1e4 round trips < 1e-9 deg, (45,0) < 0.01 m, "
        "haversine quarter-circumference, symmetry + triangle inequality")


# ---------------------------------------------------------------------------
# 6. wire


def _random_message(rng: random.Random):
    def text():
        return "".join(rng.choice("abcdefguidXYZ-09 .") for _ in
                       range(rng.randint(0, 12)))

    def descriptor():
        kind = rng.choice(list(ParameterKind))
        if kind is ParameterKind.BOOLEAN_TOGGLE:
            return ParameterDescriptor(guid=text(), name=text(), kind=kind,
                                       value=rng.random() < 0.5)
        if kind is ParameterKind.NUMBER_SLIDER:
            return ParameterDescriptor(
                guid=text(), name=text(), kind=kind,
                value=wire.f32(rng.uniform(-1e3, 1e3)),
                accuracy=rng.choice(list(Accuracy)),
                min=wire.f32(rng.uniform(-1e3, 0)),
                max=wire.f32(rng.uniform(0, 1e3)),
                epsilon=wire.f32(rng.random()),
                decimal_places=rng.randint(-100, 100))
        return ParameterDescriptor(
            guid=text(), name=text(), kind=kind, value=rng.randint(0, 99),
            items=[text() for _ in range(rng.randint(0, 4))])

    roll = rng.randrange(6)
    if roll == 0:
        return ComponentsBody([descriptor() for _ in range(rng.randint(0, 5))])
    if roll == 1:
        meshes = []
        for _ in range(rng.randint(0, 2)):
            n = rng.randint(0, 6)
            vertices = [tuple(wire.f32(rng.uniform(-9, 9)) for _ in range(3))
                        for _ in range(n)]
            triangles = [tuple(rng.randrange(max(1, n)) for _ in range(3))
                         for _ in range(rng.randint(0, 4))] if n else []
            meshes.append(Mesh(vertices=vertices, triangles=triangles))
        geo = None if rng.random() < 0.5 else GeoAnchor(
            rng.uniform(-85, 85), rng.uniform(-180, 180), rng.uniform(0, 360))
        return wire.MeshDataBody(guid=text(), meshes=meshes, geo=geo)
    if roll == 2:
        kind = rng.choice(list(ParameterKind))
        value = (rng.random() < 0.5 if kind is ParameterKind.BOOLEAN_TOGGLE
                 else wire.f32(rng.uniform(-99, 99))
                 if kind is ParameterKind.NUMBER_SLIDER
                 else rng.randint(0, 9))
        return ParameterUpdateBody(guid=text(), kind=kind, value=value)
    if roll == 3:
        return rng.choice([
            wire.Hello(rng.choice(list(Role))),
            wire.HostAssign(rng.random() < 0.5, text()),
            wire.HostChanged(text())])
    if roll == 4:
        return rng.choice([
            wire.LockRequest(text()), wire.LockGrant(text()),
            wire.LockDeny(text(), text()), wire.LockRelease(text()),
            wire.Reject(text(), text())])
    return wire.Presence(bytes(rng.randrange(256)
                               for _ in range(rng.randint(0, 30))))


def test_wire_criteria():
    data = wire.encode(ComponentsBody([]))
    assert data[:6] == b"PARA\x01\x01"

    rng = random.Random(0x317E)
    messages = [_random_message(rng) for _ in range(400)]
    for message in messages:
        assert wire.decode(wire.encode(message)) == message
        assert wire.decode_text(wire.encode_text(message)) == message

    for message in messages[:40]:
        encoded = wire.encode(message)
        for cut in range(len(encoded)):
            with pytest.raises(Truncated):
                wire.decode(encoded[:cut])

    for _ in range(2_000):
        blob = bytes(rng.randrange(256) for _ in range(rng.randint(0, 50)))
        try:
            wire.decode(blob)
        except WireError:
            pass
    _ok("wire: 400 fuzzed messages lossless both codecs, PARA prefix, "
        "full truncation sweep clean")


# ---------------------------------------------------------------------------
# 7. relay simulation


class _Clock:
    def __init__(self):
        self.now = 0.0

    def __call__(self):
        return self.now


def test_relay_simulation():
    started = time.monotonic()
    guids = [f"param-{i}" for i in range(6)]

    # last-writer-wins under the default strategy, limiter cap, no lost finals
    clock = _Clock()
    session = Session(SessionConfig(strategy=Strategy.OVERWRITE,
                                    min_interval_ms=100.0), clock=clock)
    rng = random.Random(0x5E55)
    clients = [session.connect(Role.DESIGNER, f"designer-{i}")
               for i in range(4)]
    serial_info = {}
    forwarded: list[tuple[float, float]] = []  # (time, value)
    last_attempt_per_guid: dict[str, float] = {}
    last_attempt_per_pair: dict[tuple[int, str], float] = {}

    def drain_engine():
        for update in session.take_engine_updates():
            forwarded.append((clock.now, update.value))

    serial = 0
    for _ in range(1000):
        clock.now += rng.uniform(0.0, 0.04)
        sender = rng.choice(clients)
        guid = rng.choice(guids)
        serial += 1
        value = float(serial)
        serial_info[value] = (sender, guid)
        result = session.parameter_update(
            sender, ParameterUpdateBody(guid=guid,
                                        kind=ParameterKind.NUMBER_SLIDER,
                                        value=value))
        assert result.disposition in (Disposition.ACCEPTED,
                                      Disposition.COALESCED)
        last_attempt_per_guid[guid] = value
        last_attempt_per_pair[(sender, guid)] = value
        drain_engine()
        session.tick()
        drain_engine()
    clock.now += 1.0
    session.tick()
    drain_engine()

    final_per_guid = {}
    for _, value in forwarded:
        final_per_guid[serial_info[value][1]] = value
    for guid in guids:
        assert final_per_guid[guid] == last_attempt_per_guid[guid], \
            "engine final value is not the last writer"

    forwarded_values = {value for _, value in forwarded}
    for pair, value in last_attempt_per_pair.items():
        assert value in forwarded_values, f"final value of {pair} lost"

    times_per_pair: dict[tuple[int, str], list[float]] = {}
    for at, value in forwarded:
        times_per_pair.setdefault(serial_info[value], []).append(at)
    for pair, times in times_per_pair.items():
        for earlier, later in zip(times, times[1:]):
            assert later - earlier >= 0.1 - 1e-9, f"rate cap broken for {pair}"

    # reactive locking admits no non-holder forwards
    lock_session = Session(SessionConfig(strategy=Strategy.REACTIVE_LOCK,
                                         min_interval_ms=0.0), clock=_Clock())
    lock_clients = [lock_session.connect(Role.DESIGNER, f"d{i}")
                    for i in range(4)]
    sent = {}
    serial = 0
    for _ in range(1000):
        sender = rng.choice(lock_clients)
        guid = rng.choice(guids)
        serial += 1
        value = float(serial)
        sent[value] = sender
        result = lock_session.parameter_update(
            sender, ParameterUpdateBody(guid=guid,
                                        kind=ParameterKind.NUMBER_SLIDER,
                                        value=value))
        if result.disposition is not Disposition.REJECTED:
            assert lock_session.locks[guid] == sender
        for update in lock_session.take_engine_updates():
            holder = lock_session.locks[update.guid]
            assert sent[update.value] == holder, "non-holder forward"
        if rng.random() < 0.1:
            lock_session.lock_release(sender, guid)

    # host departure: exactly one HostChanged naming the earliest survivor
    host_session = Session(SessionConfig(), clock=_Clock())
    ids = [host_session.connect(Role.DESIGNER, f"host-test-{i}")
           for i in range(4)]
    for cid in ids:
        host_session.take_outbox(cid)
    host_session.disconnect(ids[0])
    for cid in ids[1:]:
        changes = [m for m in host_session.take_outbox(cid)
                   if isinstance(m, HostChanged)]
        assert len(changes) == 1
        assert changes[0].address == "host-test-1"
    assert host_session.host == ids[1]

    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"relay sim took {elapsed:.1f}s"
    _ok(f"relay sim: 4 designers / 1000 updates / 6 guids — last-writer, "
        f"lock isolation, 100 ms cap, single host change ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 8. speech


def test_speech_criteria():
    assert parse_command("add slider with value 7") == AddSlider(7.0)
    assert parse_command("add boolean toggle with value true") == \
        AddToggle(True)
    assert parse_command("add component range").type_name == "Range"

    from adflow.registry import known_type_names
    from adflow.speech import parse_number_words

    numbers = ["zero", "one", "seven", "ten", "fifteen", "twenty",
               "twenty seven", "ninety nine", "one hundred",
               "three hundred five", "nine hundred ninety nine",
               "one thousand", "three thousands", "42", "7", "0", "123"]
    sentences = [f"add component {name}" for name in known_type_names()]
    sentences += [f"add slider with value {n}" for n in numbers]
    sentences += ["add boolean toggle with value true",
                  "add boolean toggle with value false"]
    sentences += [f"add panel with text note {i}" for i in range(30)]
    # pad with generated number-word sliders up to the enumeration budget
    units = "one two three four five six seven eight nine".split()
    tens = "twenty thirty forty fifty sixty seventy eighty ninety".split()
    for ten in tens:
        for unit in units:
            sentences.append(f"add slider with value {ten} {unit}")
            for hundred in units[:3]:
                sentences.append(
                    f"add slider with value {hundred} hundred {ten} {unit}")
    assert len(sentences) <= 3000
    graph = TypedGraph()
    for sentence in sentences:
        apply_command(graph, parse_command(sentence))
    assert graph.validate() == []

    def spell(n: int) -> str:
        teens = ("ten eleven twelve thirteen fourteen fifteen sixteen "
                 "seventeen eighteen nineteen").split()

        def two(k):
            if k == 0:
                return []
            if k < 10:
                return [units[k - 1]]
            if k < 20:
                return [teens[k - 10]]
            out = [tens[k // 10 - 2]]
            if k % 10:
                out.append(units[k % 10 - 1])
            return out

        if n == 0:
            return "zero"
        words = []
        if n >= 1000:
            words += two(n // 1000) + ["thousand"]
            n %= 1000
        if n >= 100:
            words += [units[n // 100 - 1], "hundred"]
            n %= 100
        words += two(n)
        return " ".join(words)

    for n in range(10_000):
        assert parse_number_words(spell(n)) == n
    _ok(f"speech: paper commands, {len(sentences)} grammar sentences applied "
        f"cleanly, number words 0..9999 match oracle")


# ---------------------------------------------------------------------------
# 9. end to end


def test_end_to_end_serve_and_client(tmp_path):
    from adflow.client import HeadlessClient
    from adflow.geometry import parse_obj
    from adflow.wire import MeshDataBody

    spiral_path = tmp_path / "spiral.xml"
    spiral_path.write_text(serialize_document(build_spiral_graph()),
                           encoding="utf-8")
    out_obj = tmp_path / "fresh.obj"

    proc = subprocess.Popen(
        [sys.executable, "-m", "adflow.cli", "serve", str(spiral_path),
         "--bind", "127.0.0.1:0", "--rate-limit-ms", "0",
         "--coalesce-ms", "0"],
        stdout=subprocess.PIPE, text=True)
    try:
        line = proc.stdout.readline()
        assert "listening on port" in line
        port = int(line.strip().rsplit(" ", 1)[1])

        client = HeadlessClient("127.0.0.1", port, Role.DESIGNER)
        try:
            client.wait_for(ComponentsBody, timeout=10.0)
            sent_at = time.monotonic()
            client.send_update("Radius", 0.25)
            mesh_message = client.wait_for(MeshDataBody, timeout=10.0)
            latency = time.monotonic() - sent_at
            assert latency < 0.1, f"loop latency {latency * 1e3:.1f} ms"
        finally:
            client.close()

        # a scripted CLI client sees the same rebroadcast
        script = tmp_path / "script.txt"
        script.write_text("wait components\nset Radius 0.25\nwait mesh\n",
                          encoding="utf-8")
        scripted = subprocess.run(
            [sys.executable, "-m", "adflow.cli", "client", "--connect",
             f"127.0.0.1:{port}", "--role", "designer", "--script",
             str(script)],
            capture_output=True, text=True, timeout=30)
        assert scripted.returncode == 0, scripted.stderr
        assert '"kind":"MeshData"' in scripted.stdout
    finally:
        proc.terminate()
        proc.wait(timeout=10)

    # geometry equality against a fresh evaluation at the same value
    fresh = subprocess.run(
        [sys.executable, "-m", "adflow.cli", "eval", str(spiral_path),
         "--set", "Radius=0.25", "--out", str(out_obj)],
        capture_output=True, text=True, timeout=60)
    assert fresh.returncode == 0, fresh.stderr
    fresh_meshes = parse_obj(out_obj.read_text(encoding="utf-8")).meshes

    def corner_set(meshes):
        return sorted(
            tuple(mesh.vertices[i] for i in tri)
            for mesh in meshes for tri in mesh.triangles)

    live_render = [to_render_coords(m) for m in mesh_message.meshes]
    assert corner_set(live_render) == corner_set(fresh_meshes)
    _ok("end to end: serve + scripted client rebroadcast equals fresh eval, "
        "loop latency < 100 ms")
