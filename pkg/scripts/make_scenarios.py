#!/usr/bin/env python3
"""Regenerate the bundled .scn files (canonical encoding keeps them diffable)."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from mdp.harness.scenario import (FaultSpec, PlayerSpec, Scenario,  # noqa: E402
                                  simple_scenario)
from mdp.transport.sim import Topology  # noqa: E402

OUT = pathlib.Path(__file__).resolve().parents[1] / "scenarios"


def vickrey3() -> Scenario:
    """The walkthrough example: bids 10, 8, 5 over a three-registry mesh."""
    topo = Topology(
        hosts=("core0", "core1", "core2", "h-ann", "h-bob", "h-cid"),
        edges=(("core0", "core1", 1), ("core1", "core2", 2),
               ("core0", "core2", 2), ("h-ann", "core0", 1),
               ("h-bob", "core1", 1), ("h-cid", "core2", 3)))
    players = [
        PlayerSpec("ann", 0, "h-ann", 2, "10/1"),
        PlayerSpec("bob", 1, "h-bob", 3, "8/1"),
        PlayerSpec("cid", 2, "h-cid", 4, "5/1"),
    ]
    return Scenario(session="vickrey3", seed=17, topology=topo,
                    core_hosts=["core0", "core1", "core2"],
                    registries=[{"host": "core0", "gateway": 0},
                                {"host": "core1", "gateway": 1},
                                {"host": "core2", "gateway": 2}],
                    players=players, mechanism_id="vickrey",
                    mechanism_params={}, max_ticks=20000)


def scenarios() -> dict[str, Scenario]:
    out = {"vickrey3": vickrey3()}
    out["cavallo3"] = simple_scenario(
        "cavallo3", 23, "vickrey-cavallo", {}, ["10/1", "8/1", "5/1"],
        registries=3, max_ticks=20000)
    out["unit-demand4"] = simple_scenario(
        "unit-demand4", 29, "unit-demand", {"items": 3},
        [["5/1", "2/1", "1/1"], ["4/1", "3/1", "0/1"],
         ["1/1", "6/1", "2/1"], ["0/1", "1/1", "9/1"]],
        registries=2, max_ticks=20000)
    out["single-minded5"] = simple_scenario(
        "single-minded5", 31, "single-minded", {"items": 6},
        [[1, 2, "5/1"], [2, 4, "6/1"], [4, 6, "4/1"],
         [1, 1, "2/1"], [5, 6, "3/1"]],
        registries=2, max_ticks=20000)
    out["public-project3"] = simple_scenario(
        "public-project3", 37, "public-project", {"cost": "30/1"},
        ["6/1", "7/1", "25/1"], registries=3, max_ticks=20000)
    crash = simple_scenario(
        "crash-tolerance5", 41, "vickrey", {},
        ["10/1", "8/1", "5/1", "3/1", "2/1"], registries=3, max_ticks=60000)
    crash.faults = [FaultSpec(tick=170, crash="p1")]
    out["crash-tolerance5"] = crash
    byz = simple_scenario(
        "policing3", 43, "vickrey", {}, ["10/1", "8/1", "5/1"],
        registries=3, max_ticks=60000,
        behaviors={0: {"tamper": "inflate-own-rebate", "rounds": [1]}})
    out["policing3"] = byz
    return out


def interactive_vickrey() -> Scenario:
    base = simple_scenario("interactive-vickrey", 47, "vickrey", {},
                           ["8/1", "5/1"], registries=2,
                           max_ticks=10**7, scheme_deadline_ticks=10**6,
                           timeout_ticks=5000)
    topo = base.topology
    base.topology = Topology(hosts=topo.hosts + ("h-human",),
                             edges=topo.edges + (("h-human", "core0", 1),))
    base.players.append(PlayerSpec("seat-1", 0, "h-human", 1, "interactive"))
    return base


def main() -> None:
    OUT.mkdir(exist_ok=True)
    (OUT / "interactive").mkdir(exist_ok=True)
    for name, scenario in scenarios().items():
        scenario.validate()
        scenario.save(OUT / ("%s.scn" % name))
        print("wrote", name)
    inter = interactive_vickrey()
    inter.validate(allow_interactive=True)
    inter.save(OUT / "interactive" / "interactive-vickrey.scn")
    print("wrote interactive-vickrey")


if __name__ == "__main__":
    main()
