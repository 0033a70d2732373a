"""Registry/overlay behavior: sign-in rules, broadcast totality,
registry-mediated scheme dispatch, type resupply."""

import random

from mdp.harness.encoding import decode_canonical, encode_canonical
from mdp.harness.runner import SessionRuntime, run_scenario
from mdp.harness.scenario import PlayerSpec, simple_scenario
from mdp.overlay import MemberRecord
from mdp.transport import IdGenerator, Phase, Process, Topology

from conftest import random_mesh_scenario


def test_sign_in_accepts_and_issues_sequential_ids():
    s = simple_scenario("signin", 3, "vickrey", {}, ["5/1", "4/1"], registries=1)
    r = run_scenario(s)
    pids = sorted(r.roster_map.values())
    assert pids[0].startswith("0.0.") and pids[1].startswith("0.1.")


def test_duplicate_credentials_rejected():
    s = simple_scenario("dup-cred", 3, "vickrey", {}, ["5/1", "4/1", "3/1"],
                        registries=1)
    s.players[2].credential = s.players[0].credential  # same name, later spawn
    s.players[2].spawn_tick = 30
    r = run_scenario(s)
    statuses = sorted(o["status"] for o in r.outcomes.values())
    assert statuses.count("rejected:duplicate") == 1
    assert statuses.count("done") == 2


def test_sign_in_after_barrier_rejected_phase_closed():
    s = simple_scenario("late", 3, "vickrey", {}, ["5/1", "4/1"], registries=1,
                        max_ticks=60000)
    s.players.append(PlayerSpec(credential="late", registry=0, host="ph0",
                                spawn_tick=2000, type_wire="9/1", late=True))
    r = run_scenario(s)
    assert r.outcomes["late"]["status"] == "rejected:phase-closed"
    done = r.done_outcomes()
    assert len(done) == 2
    assert all(len(o["roster"]) == 2 for o in done.values())


def test_twelve_players_three_registries_all_reachable():
    types = ["%d/1" % k for k in range(12)]
    s = random_mesh_scenario(99, n_players=12, registries=3, types=types)
    r = run_scenario(s)
    assert r.completed
    assert len(set(r.roster_map.values())) == 12
    done = r.done_outcomes()
    assert len(done) == 12
    # broadcast totality at the barrier: every player derived the same roster
    rosters = {tuple(o["roster"]) for o in done.values()}
    assert len(rosters) == 1 and len(next(iter(rosters))) == 12


def test_broadcast_single_player_reaches_itself():
    s = simple_scenario("solo-bc", 5, "vickrey", {}, ["4/1"], registries=1)
    r = run_scenario(s)
    o = r.outcomes["p1"]
    assert o["status"] == "done" and o["roster"] == [r.roster_map["p1"]]


def test_broadcast_line_of_registries_exactly_once():
    # five registries in a line, sender at one end; every player must end
    # up with exactly one delivered copy of each announcement
    types = ["7/1", "3/1", "2/1", "1/1", "5/1"]
    s = simple_scenario("line5", 8, "vickrey", {}, types, registries=5)
    r = run_scenario(s)
    player_pids = set(r.roster_map.values())
    per_dst: dict[str, int] = {}
    for e in r.trace:
        if e["kind"] == "deliver" and e.get("msg") == "type-deliver" \
                and e["dst"] in player_pids:
            per_dst[e["dst"]] = per_dst.get(e["dst"], 0) + 1
    assert set(per_dst.values()) == {5}
    assert len(per_dst) == 5


def test_concurrent_broadcasts_both_arrive_everywhere():
    s = simple_scenario("conc", 13, "vickrey", {}, ["6/1", "9/1"], registries=2,
                        spawn_gap=0)
    r = run_scenario(s)
    done = r.done_outcomes()
    assert len(done) == 2
    assert {tuple(o["roster"]) for o in done.values()} == \
        {tuple(sorted(r.roster_map.values(), key=lambda k: [int(x) for x in k.split(".")]))}


def test_scheme_dispatch_copies_are_byte_identical():
    s = random_mesh_scenario(5, n_players=3)
    rt = SessionRuntime(s)
    result = rt.run()
    assert result.completed
    # all registries hold the identical dispatched copy for every sender
    for key in rt.registries[0].scheme_seen:
        blobs = {encode_canonical(reg.scheme_seen[key]) for reg in rt.registries}
        assert len(blobs) == 1


def test_no_direct_player_to_player_scheme_traffic():
    # players never address each other directly: every scheme (and every
    # other message) is registry-mediated
    s = random_mesh_scenario(6, n_players=4)
    rt = SessionRuntime(s)
    result = rt.run()
    players = {p.pid.key() for p in rt.players.values()}
    direct = [e for e in result.trace if e["kind"] == "send"
              and e["src"] in players and e["dst"] in players]
    assert direct == []


def test_registry_type_caches_identical_at_quiescence():
    s = random_mesh_scenario(7, n_players=4)
    rt = SessionRuntime(s)
    rt.run()
    caches = {encode_canonical(reg.type_cache) for reg in rt.registries}
    assert len(caches) == 1
    assert len(rt.registries[0].type_cache) == 4


def test_resupply_returns_cached_and_reports_absent():
    # drive the registry handler directly over a two-node transport
    from mdp.overlay import OverlayConfig, RegistryProcess
    from mdp.transport.sim import SimNetwork

    topo = Topology(hosts=("a", "b"), edges=(("a", "b", 1),))
    net = SimNetwork(topo, seed=1, session="s", jitter=0)
    boot = IdGenerator(1, random.Random(1))
    reg_pid, gw_pid, player_pid = (boot.new_process_id() for _ in range(3))
    cfg = OverlayConfig(
        session="s", ring=[gw_pid, reg_pid],
        gateway_neighbors={gw_pid: []}, gateway_registries={gw_pid: [reg_pid]},
        registry_gateway={reg_pid: gw_pid}, registry_ordinals={reg_pid: 0},
        ordinal_registry={0: reg_pid}, collector=None,
        timeout_ticks=50, scheme_deadline_ticks=100)
    reg = RegistryProcess(reg_pid, cfg, ordinal=0)
    reg.type_cache["x.0.1"] = "10/1"
    reg.members[player_pid] = MemberRecord(player_pid, "p", 0)
    reg.local_members.add(player_pid)

    got = []

    class Probe(Process):
        def __init__(self, pid):
            self.pid = pid

        def on_message(self, ctx, env):
            if env.kind == "resupply-reply":
                got.append(decode_canonical(env.payload))

    class Sink(Process):
        def __init__(self, pid):
            self.pid = pid

    net.attach(Sink(gw_pid), "a")
    net.attach(reg, "a")
    probe_ctx = net.attach(Probe(player_pid), "b")
    probe_ctx.send(reg_pid, Phase.SCHEME_EXCHANGE, "resupply-request",
                   {"missing": ["x.0.1", "y.0.2"]})
    for _ in range(10):
        net.deliver_tick()
    assert got == [{"found": {"x.0.1": "10/1"}, "absent": ["y.0.2"]}]


def test_barrier_announces_strictly_after_last_entrant():
    # the fifth player signs in only around tick 40: no process may see
    # the registration barrier before that
    types = ["9/1", "7/1", "5/1", "3/1", "1/1"]
    s = simple_scenario("late-entry", 21, "vickrey", {}, types, registries=2,
                        max_ticks=60000)
    s.players[4].spawn_tick = 40
    r = run_scenario(s)
    assert r.completed
    reg_tick = dict(r.barrier_ticks())["registration"]
    assert reg_tick > 40
    assert all(len(o["roster"]) == 5 for o in r.done_outcomes().values())


def test_member_that_never_finishes_blocks_the_barrier():
    # an interactive player that registers and never submits keeps the
    # type-broadcast barrier from ever announcing (liveness needs all)
    from mdp.harness.runner import SessionRuntime
    s = simple_scenario("stuck", 21, "vickrey", {}, ["9/1", "7/1", "interactive"],
                        registries=1, max_ticks=4000,
                        scheme_deadline_ticks=10**6)
    s.validate(allow_interactive=True)
    rt = SessionRuntime(s)
    rt.claim_interactive_slot("sleeper")  # registers, then stays silent
    while not rt.finished() and rt.net.now < 4000:
        rt.step()
    announced = {phase for phase, _ in
                 [(e["phase"], e["tick"]) for e in rt.net.trace
                  if e["kind"] == "barrier-announce"]}
    assert "registration" in announced
    assert "type-broadcast" not in announced


def test_roster_size_equals_accepted_registrations():
    for seed in (1, 2, 3):
        s = random_mesh_scenario(seed, n_players=4)
        r = run_scenario(s)
        for o in r.done_outcomes().values():
            assert len(o["roster"]) == 4
