"""Scenario files: the data form of a full distributed run.

A .scn file is canonical-encoding JSON describing the topology, the
registry/gateway placement, the players (scripted types, interactive
slots, byzantine behaviors), the mechanism, timing knobs and the fault
script. Scenarios double as documentation of the bundled examples, so
the format stays human-diffable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import ConfigError
from ..mechlib.mechanisms import (MECHANISM_IDS, type_value_from_wire,
                                  validate_type_value)
from ..transport.sim import Topology
from .encoding import decode_canonical, encode_canonical

INTERACTIVE = "interactive"


@dataclass
class PlayerSpec:
    credential: str
    registry: int
    host: str
    spawn_tick: int = 1
    type_wire: object = None           # wire value, or INTERACTIVE
    behavior: dict = field(default_factory=dict)
    late: bool = False                 # arrives on purpose after the barrier

    @property
    def interactive(self) -> bool:
        return self.type_wire == INTERACTIVE


@dataclass
class FaultSpec:
    tick: int
    crash: Optional[str] = None                 # player credential
    delay_edge: Optional[tuple[str, str]] = None
    extra: int = 0
    drop_next: Optional[tuple[str, str]] = None  # credentials / "registry:N"


@dataclass
class Scenario:
    session: str
    seed: int
    topology: Topology
    core_hosts: list[str]
    registries: list[dict]             # {"host": str, "gateway": core index}
    players: list[PlayerSpec]
    mechanism_id: str
    mechanism_params: dict
    collector_registry: int = 0
    timeout_ticks: Optional[int] = None
    scheme_deadline_ticks: Optional[int] = None
    wave_pause: int = 4
    jitter: int = 3
    max_ticks: int = 10000
    lossy: bool = False
    faults: list[FaultSpec] = field(default_factory=list)

    # -- derived knobs ------------------------------------------------------

    def probe_timeout(self) -> int:
        if self.timeout_ticks is not None:
            return self.timeout_ticks
        return 50 * self.topology.max_latency()

    def scheme_deadline(self) -> int:
        if self.scheme_deadline_ticks is not None:
            return self.scheme_deadline_ticks
        return 2 * self.probe_timeout()

    # -- validation -----------------------------------------------------------

    def validate(self, allow_interactive: bool = False) -> None:
        self.topology.validate()
        core = [h for h in self.core_hosts]
        if not core:
            raise ConfigError("at least one core (gateway) host required")
        for h in core:
            if h not in self.topology.hosts:
                raise ConfigError("core host %r not in topology" % h)
        if len(set(core)) != len(core):
            raise ConfigError("duplicate core hosts")
        core_edges = [(a, b, l) for a, b, l in self.topology.edges
                      if a in core and b in core]
        core_topo = Topology(hosts=tuple(core), edges=tuple(core_edges))
        if not core_topo.is_connected():
            raise ConfigError("gateway core subgraph not connected")
        if not self.registries:
            raise ConfigError("at least one registry required")
        for reg in self.registries:
            if reg["host"] not in self.topology.hosts:
                raise ConfigError("registry host %r unknown" % reg["host"])
            if not 0 <= int(reg["gateway"]) < len(core):
                raise ConfigError("registry gateway index out of range")
        if not 0 <= self.collector_registry < len(self.registries):
            raise ConfigError("collector registry index out of range")
        if not self.players:
            raise ConfigError("at least one player required")
        if self.mechanism_id not in MECHANISM_IDS:
            raise ConfigError("unknown mechanism %r" % self.mechanism_id)
        scripted = 0
        for p in self.players:
            if not 0 <= p.registry < len(self.registries):
                raise ConfigError("player %r registry out of range" % p.credential)
            if p.host not in self.topology.hosts:
                raise ConfigError("player %r host unknown" % p.credential)
            if p.interactive:
                if not allow_interactive:
                    raise ConfigError(
                        "interactive players need the gateway (mdp serve)")
                continue
            scripted += 1
            value = type_value_from_wire(self.mechanism_id, p.type_wire)
            validate_type_value(self.mechanism_id,
                                self._params_with_items(), value)
        if self.mechanism_id == "unit-demand":
            m = int(self.mechanism_params.get("items", 0))
            if m > len(self.players):
                raise ConfigError("more items than players")
        if self.mechanism_id == "vickrey-cavallo" and len(self.players) < 2:
            raise ConfigError("redistribution needs at least two players")
        names = set()
        for f in self.faults:
            if f.crash is not None and f.crash not in {p.credential for p in self.players}:
                raise ConfigError("fault crashes unknown player %r" % f.crash)
            if f.drop_next is not None and not self.lossy:
                raise ConfigError("DropNextMessage requires lossy mode")
            if f.delay_edge is not None:
                a, b = f.delay_edge
                if not any({a, b} == {x, y} for x, y, _ in self.topology.edges):
                    raise ConfigError("delay fault on unknown edge (%s, %s)" % (a, b))
        for p in self.players:
            if p.credential in names:
                # duplicates are legal input: the second sign-in is rejected
                pass
            names.add(p.credential)

    def _params_with_items(self) -> dict:
        return dict(self.mechanism_params)

    # -- codec ---------------------------------------------------------------------

    def to_wire(self) -> dict:
        return {
            "session": self.session,
            "seed": self.seed,
            "topology": {
                "hosts": list(self.topology.hosts),
                "edges": [[a, b, l] for a, b, l in self.topology.edges],
            },
            "core_hosts": list(self.core_hosts),
            "registries": self.registries,
            "collector_registry": self.collector_registry,
            "players": [{
                "credential": p.credential, "registry": p.registry,
                "host": p.host, "spawn_tick": p.spawn_tick,
                "type": p.type_wire, "behavior": p.behavior, "late": p.late,
            } for p in self.players],
            "mechanism": {"id": self.mechanism_id, "params": self.mechanism_params},
            "timeout_ticks": self.timeout_ticks,
            "scheme_deadline_ticks": self.scheme_deadline_ticks,
            "wave_pause": self.wave_pause,
            "jitter": self.jitter,
            "max_ticks": self.max_ticks,
            "lossy": self.lossy,
            "faults": [{
                "tick": f.tick, "crash": f.crash,
                "delay_edge": list(f.delay_edge) if f.delay_edge else None,
                "extra": f.extra,
                "drop_next": list(f.drop_next) if f.drop_next else None,
            } for f in self.faults],
        }

    @classmethod
    def from_wire(cls, tree: dict) -> "Scenario":
        try:
            topo = Topology(
                hosts=tuple(tree["topology"]["hosts"]),
                edges=tuple((a, b, int(l)) for a, b, l in tree["topology"]["edges"]),
            )
            players = [PlayerSpec(
                credential=p["credential"], registry=int(p["registry"]),
                host=p["host"], spawn_tick=int(p.get("spawn_tick", 1)),
                type_wire=p.get("type"), behavior=p.get("behavior") or {},
                late=bool(p.get("late", False)),
            ) for p in tree["players"]]
            faults = [FaultSpec(
                tick=int(f["tick"]), crash=f.get("crash"),
                delay_edge=tuple(f["delay_edge"]) if f.get("delay_edge") else None,
                extra=int(f.get("extra", 0)),
                drop_next=tuple(f["drop_next"]) if f.get("drop_next") else None,
            ) for f in tree.get("faults", [])]
            return cls(
                session=tree["session"], seed=int(tree["seed"]), topology=topo,
                core_hosts=list(tree["core_hosts"]),
                registries=list(tree["registries"]),
                collector_registry=int(tree.get("collector_registry", 0)),
                players=players,
                mechanism_id=tree["mechanism"]["id"],
                mechanism_params=tree["mechanism"].get("params", {}),
                timeout_ticks=tree.get("timeout_ticks"),
                scheme_deadline_ticks=tree.get("scheme_deadline_ticks"),
                wave_pause=int(tree.get("wave_pause", 4)),
                jitter=int(tree.get("jitter", 3)),
                max_ticks=int(tree.get("max_ticks", 10000)),
                lossy=bool(tree.get("lossy", False)),
                faults=faults,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("malformed scenario: %s" % exc) from exc

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        return cls.from_wire(decode_canonical(Path(path).read_bytes()))

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(encode_canonical(self.to_wire()) + b"\n")


def simple_scenario(session: str, seed: int, mechanism_id: str, params: dict,
                    types: list, registries: int = 1,
                    behaviors: Optional[dict[int, dict]] = None,
                    spawn_gap: int = 1, **knobs) -> Scenario:
    """Convenience builder: a line of core hosts, one registry per core
    host, player i at registry i mod R on its own leaf host."""
    behaviors = behaviors or {}
    core = ["core%d" % i for i in range(registries)]
    hosts = list(core)
    edges = [(core[i], core[i + 1], 1) for i in range(len(core) - 1)]
    players = []
    for i, value in enumerate(types):
        host = "ph%d" % i
        hosts.append(host)
        edges.append((host, core[i % registries], 1))
        players.append(PlayerSpec(
            credential="p%d" % (i + 1), registry=i % registries, host=host,
            spawn_tick=1 + i * spawn_gap, type_wire=value,
            behavior=behaviors.get(i, {})))
    return Scenario(
        session=session, seed=seed,
        topology=Topology(hosts=tuple(hosts), edges=tuple(edges)),
        core_hosts=core,
        registries=[{"host": h, "gateway": i} for i, h in enumerate(core)],
        players=players, mechanism_id=mechanism_id, mechanism_params=params,
        **knobs)
