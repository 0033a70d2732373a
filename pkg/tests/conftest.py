import random

import pytest

from mdp.harness.scenario import PlayerSpec, Scenario
from mdp.transport.sim import Topology


def random_mesh_scenario(seed: int, mechanism_id: str = "vickrey",
                         params: dict | None = None, n_players: int = 5,
                         registries: int = 3, types: list | None = None,
                         behaviors: dict[int, dict] | None = None,
                         max_ticks: int = 60000) -> Scenario:
    """Random connected core of gateway hosts, one registry per core host,
    each player on its own leaf host attached to a random core host."""
    rng = random.Random(seed)
    params = params or {}
    behaviors = behaviors or {}
    core = ["core%d" % i for i in range(registries)]
    hosts = list(core)
    edges = []
    for i in range(1, registries):
        j = rng.randrange(i)  # random spanning tree keeps the core connected
        edges.append((core[i], core[j], rng.randint(1, 3)))
    for _ in range(rng.randint(0, registries)):
        pair = rng.sample(range(registries), 2) if registries > 1 else None
        if pair and not any({core[pair[0]], core[pair[1]]} == {a, b}
                            for a, b, _ in edges):
            edges.append((core[pair[0]], core[pair[1]], rng.randint(1, 3)))
    if types is None:
        types = ["%d/1" % rng.randint(0, 20) for _ in range(n_players)]
    players = []
    for i, wire in enumerate(types):
        host = "ph%d" % i
        hosts.append(host)
        edges.append((host, core[rng.randrange(registries)], rng.randint(1, 3)))
        players.append(PlayerSpec(
            credential="p%d" % (i + 1), registry=rng.randrange(registries),
            host=host, spawn_tick=1 + rng.randint(0, 6), type_wire=wire,
            behavior=behaviors.get(i, {})))
    return Scenario(
        session="mesh-%d" % seed, seed=seed,
        topology=Topology(hosts=tuple(hosts), edges=tuple(edges)),
        core_hosts=core,
        registries=[{"host": h, "gateway": i} for i, h in enumerate(core)],
        players=players, mechanism_id=mechanism_id, mechanism_params=params,
        max_ticks=max_ticks)


@pytest.fixture
def mesh_scenario():
    return random_mesh_scenario
