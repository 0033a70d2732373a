"""Scenario runner: builds the full stack on the simulated transport,
drives it to quiescence, and cross-checks outcomes against the
centralized brute-force oracle."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from random import Random
from typing import Optional

from ..engine import (PlayerProcess, SessionDriverProcess, TaxCollectorProcess)
from ..errors import ConfigError
from ..mechlib import JointType, check_strategy_proof, settle, tax_vector
from ..mechlib.mechanisms import build_problem, type_value_from_wire
from ..mechlib.rational import encode_rational, rational
from ..overlay import GatewayProcess, OverlayConfig, RegistryProcess
from ..transport.ids import IdGenerator, ProcessId
from ..transport.sim import CrashProcess, DelayEdge, DropNextMessage, SimNetwork
from . import oracles
from .encoding import encode_canonical
from .scenario import PlayerSpec, Scenario


@dataclass
class RunResult:
    scenario: Scenario
    outcomes: dict[str, dict]            # credential -> outcome wire
    ledger: list[list]                   # [payer pid key, "num/den"]
    ledger_total: Fraction
    trace: list[dict]
    violations: list[str]
    completed: bool
    ticks: int
    roster_map: dict[str, str] = field(default_factory=dict)  # credential -> pid

    def trace_hash(self) -> str:
        return hashlib.sha256(encode_canonical(self.trace)).hexdigest()

    def done_outcomes(self) -> dict[str, dict]:
        return {c: o for c, o in self.outcomes.items() if o["status"] == "done"}

    def barrier_ticks(self) -> list[tuple[str, int]]:
        return [(e["phase"], e["tick"]) for e in self.trace
                if e["kind"] == "barrier-announce"]


class SessionRuntime:
    """A built simulation; step() advances one tick (spawns and faults
    included), so the gateway can pump it interactively."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.net = SimNetwork(scenario.topology, scenario.seed, scenario.session,
                              jitter=scenario.jitter, lossy=scenario.lossy)
        boot = IdGenerator(len(scenario.registries), Random(scenario.seed ^ 0xB007))
        self._player_gens = [IdGenerator(i, Random(scenario.seed * 1000003 + i))
                             for i in range(len(scenario.registries))]

        gateway_pids = [boot.new_process_id() for _ in scenario.core_hosts]
        registry_pids = [boot.new_process_id() for _ in scenario.registries]
        driver_pid = boot.new_process_id()
        collector_pid = boot.new_process_id()

        core_index = {h: i for i, h in enumerate(scenario.core_hosts)}
        neighbors: dict[ProcessId, list[ProcessId]] = {p: [] for p in gateway_pids}
        for a, b, _ in scenario.topology.edges:
            if a in core_index and b in core_index:
                neighbors[gateway_pids[core_index[a]]].append(gateway_pids[core_index[b]])
                neighbors[gateway_pids[core_index[b]]].append(gateway_pids[core_index[a]])
        gateway_registries: dict[ProcessId, list[ProcessId]] = {p: [] for p in gateway_pids}
        registry_gateway: dict[ProcessId, ProcessId] = {}
        for i, reg in enumerate(scenario.registries):
            gw = gateway_pids[int(reg["gateway"])]
            gateway_registries[gw].append(registry_pids[i])
            registry_gateway[registry_pids[i]] = gw

        cfg = OverlayConfig(
            session=scenario.session,
            ring=gateway_pids + registry_pids,
            gateway_neighbors=neighbors,
            gateway_registries=gateway_registries,
            registry_gateway=registry_gateway,
            registry_ordinals={p: i for i, p in enumerate(registry_pids)},
            ordinal_registry={i: p for i, p in enumerate(registry_pids)},
            collector=None,  # registries learn it from collector-sign-in
            timeout_ticks=scenario.probe_timeout(),
            scheme_deadline_ticks=scenario.scheme_deadline(),
            wave_pause=scenario.wave_pause,
        )
        self.cfg = cfg
        self.gateways = [GatewayProcess(p, cfg, initiator=(i == 0))
                         for i, p in enumerate(gateway_pids)]
        self.registries = [
            RegistryProcess(p, cfg, ordinal=i,
                            system_leaves=[driver_pid] if i == 0 else None)
            for i, p in enumerate(registry_pids)]
        self.driver = SessionDriverProcess(driver_pid)
        self.collector = TaxCollectorProcess(
            collector_pid, scenario.session,
            registry=registry_pids[scenario.collector_registry])

        for gw, host in zip(self.gateways, scenario.core_hosts):
            self.net.attach(gw, host)
        for rp, reg in zip(self.registries, scenario.registries):
            self.net.attach(rp, reg["host"])
        self.net.attach(self.driver, scenario.registries[0]["host"])
        self.net.attach(self.collector,
                        scenario.registries[scenario.collector_registry]["host"])

        self.players: dict[str, PlayerProcess] = {}
        self._pending = sorted([p for p in scenario.players if not p.interactive],
                               key=lambda p: (p.spawn_tick, p.credential))
        self._interactive_free = [p for p in scenario.players if p.interactive]
        self._faults: dict[int, list] = {}
        for f in scenario.faults:
            self._faults.setdefault(f.tick, []).append(f)
        self._registration_closed = False

    # -- spawning --------------------------------------------------------------

    def _spawn(self, spec: PlayerSpec, credential: Optional[str] = None,
               type_value=None) -> PlayerProcess:
        credential = credential or spec.credential
        key = credential
        n = 2
        while key in self.players:  # duplicate credentials do spawn; the
            key = "%s#%d" % (credential, n)  # registry rejects them later
            n += 1
        gen = self._player_gens[spec.registry]
        pid = gen.new_process_id()
        if spec.interactive:
            scripted = None
        else:
            scripted = type_value_from_wire(self.scenario.mechanism_id,
                                            spec.type_wire)
        proc = PlayerProcess(
            pid=pid, credential=credential,
            registry=self.cfg.ordinal_registry[spec.registry],
            mechanism_id=self.scenario.mechanism_id,
            mechanism_params=self.scenario.mechanism_params,
            type_value=scripted if type_value is None else type_value,
            behavior=spec.behavior,
        )
        self.players[key] = proc
        self.net.attach(proc, spec.host)
        return proc

    def claim_interactive_slot(self, credential: str) -> PlayerProcess:
        if not self._interactive_free:
            raise ConfigError("no interactive slots left")
        if credential in self.players:
            raise ConfigError("credential already used in this session")
        spec = self._interactive_free.pop(0)
        return self._spawn(spec, credential=credential)

    @property
    def interactive_slots_left(self) -> int:
        return len(self._interactive_free)

    # -- stepping ----------------------------------------------------------------

    def step(self) -> None:
        self.net.deliver_tick()
        now = self.net.now
        for fault in self._faults.get(now, ()):
            self._apply_fault(fault)
        while self._pending and self._pending[0].spawn_tick <= now:
            self._spawn(self._pending.pop(0))
        self._update_registration_gate()

    def _apply_fault(self, fault) -> None:
        if fault.crash is not None:
            proc = self.players.get(fault.crash)
            if proc is not None:
                self.net.crash(proc.pid)
        elif fault.delay_edge is not None:
            a, b = fault.delay_edge
            self.net.apply_fault(DelayEdge(a, b, fault.extra))
        elif fault.drop_next is not None:
            src, dst = (self._resolve(x) for x in fault.drop_next)
            if src and dst:
                self.net.apply_fault(DropNextMessage(src, dst))

    def _resolve(self, name: str) -> Optional[ProcessId]:
        if name.startswith("registry:"):
            return self.cfg.ordinal_registry[int(name.split(":", 1)[1])]
        proc = self.players.get(name)
        return proc.pid if proc else None

    def _update_registration_gate(self) -> None:
        if self.driver.registration_complete:
            return
        if any(not sp.late for sp in self._pending) or self._interactive_free:
            return
        late = {sp.credential for sp in self.scenario.players if sp.late}
        settled = all(p.registered or p.halted or self.net.is_crashed(p.pid)
                      for c, p in self.players.items() if c not in late)
        if settled:
            self.driver.registration_complete = True

    def finished(self) -> bool:
        if self._pending or self._interactive_free:
            return False
        players_terminal = all(p.halted or self.net.is_crashed(p.pid)
                               for p in self.players.values())
        return players_terminal and self.net.quiescent()

    def run(self) -> RunResult:
        s = self.scenario
        while not self.finished() and self.net.now < s.max_ticks:
            self.step()
        completed = self.finished()
        outcomes = {c: p.outcome.to_wire() for c, p in self.players.items()
                    if p.outcome is not None}
        ledger = [[payer, encode_rational(amount)]
                  for _, payer, amount in self.collector.ledger]
        return RunResult(
            scenario=s, outcomes=outcomes, ledger=ledger,
            ledger_total=self.collector.total(),
            trace=self.net.trace, violations=self.net.violations,
            completed=completed, ticks=self.net.now,
            roster_map={c: p.pid.key() for c, p in self.players.items()},
        )


def run_scenario(scenario: Scenario, allow_interactive: bool = False) -> RunResult:
    scenario.validate(allow_interactive=allow_interactive)
    return SessionRuntime(scenario).run()


# ---------------------------------------------------------------------------
# oracle cross-checks

ORACLE_CAPS = {"unit-demand": (6, 6), "single-minded": (12, 10)}


def expected_joint(scenario: Scenario, result: RunResult,
                   roster_keys: list[str]) -> JointType:
    """Joint type over the run's final roster, in roster (pid) order,
    using the scenario's scripted values."""
    key_to_cred = {v: k for k, v in result.roster_map.items()}
    spec_by_cred = {p.credential: p for p in scenario.players}
    values = []
    for key in roster_keys:
        cred = key_to_cred[key].split("#", 1)[0]
        values.append(type_value_from_wire(scenario.mechanism_id,
                                           spec_by_cred[cred].type_wire))
    return JointType.from_values(values)


def centralized_reference(scenario: Scenario, joint: JointType) -> dict:
    """Single-process mechlib evaluation (the replica-agreement oracle)."""
    problem = build_problem(scenario.mechanism_id, scenario.mechanism_params,
                            len(joint))
    decision = problem.decide(joint)
    taxes = tax_vector(problem, joint)
    scheme = settle(taxes)
    return {
        "decision": list(decision) if isinstance(decision, tuple) else decision,
        "taxes": [encode_rational(t) for t in taxes],
        "transfers": scheme.to_wire(),
    }


def brute_force_reference(scenario: Scenario, joint: JointType) -> dict:
    ev = oracles.evaluate(scenario.mechanism_id, scenario.mechanism_params, joint)
    d = ev["decision"]
    return {
        "decision": list(d) if isinstance(d, tuple) else d,
        "taxes": [encode_rational(t) for t in ev["taxes"]],
        "welfare": encode_rational(ev["welfare"]),
    }


def deviation_grid(scenario: Scenario, truth, lo: int, hi: int) -> list:
    """Integer deviation grid for one player, shaped by the type domain
    (values-only for single-minded; per-coordinate for unit-demand)."""
    mech = scenario.mechanism_id
    if mech in ("vickrey", "vickrey-cavallo", "first-price", "public-project"):
        return [Fraction(k) for k in range(lo, hi + 1)]
    if mech == "single-minded":
        a, b, _ = truth
        return [(a, b, Fraction(k)) for k in range(lo, hi + 1)]
    if mech == "unit-demand":
        out = []
        for j in range(len(truth)):
            for k in range(lo, hi + 1):
                vec = list(truth)
                vec[j] = Fraction(k)
                out.append(tuple(vec))
        return out
    raise ConfigError("no deviation grid for %r" % mech)


def verify_scenario(scenario: Scenario, lo: int = 0, hi: int = 20) -> dict:
    """Run the distributed stack AND the centralized oracles; exact-compare
    decision/taxes/welfare; check strategy-proofness on the grid."""
    scenario.validate()
    caps = ORACLE_CAPS.get(scenario.mechanism_id)
    if caps is not None:
        n_cap, m_cap = caps
        n = len(scenario.players)
        m = int(scenario.mechanism_params.get("items", 0))
        if n > n_cap or m > m_cap:
            raise ConfigError(
                "verify refuses: %s brute force capped at n<=%d, m<=%d"
                % (scenario.mechanism_id, n_cap, m_cap))
    result = SessionRuntime(scenario).run()
    report = {"ok": True, "notes": [], "violations": list(result.violations)}
    done = result.done_outcomes()
    if not result.completed or not done:
        report["ok"] = False
        report["notes"].append("run did not complete")
        return report
    sample = next(iter(done.values()))
    roster_keys = sample["roster"]
    joint = expected_joint(scenario, result, roster_keys)
    central = centralized_reference(scenario, joint)
    brute = brute_force_reference(scenario, joint)

    replicas_equal = all(
        (o["decision"], o["taxes"], o["scheme"]) ==
        (sample["decision"], sample["taxes"], sample["scheme"])
        for o in done.values())
    if not replicas_equal:
        report["ok"] = False
        report["notes"].append("replicas disagree")
    if sample["decision"] != central["decision"] or \
            sample["taxes"] != central["taxes"] or \
            sample["scheme"] != central["transfers"]:
        report["ok"] = False
        report["notes"].append("distributed outcome != centralized mechlib")
    if sample["decision"] != brute["decision"] or sample["taxes"] != brute["taxes"]:
        report["ok"] = False
        report["notes"].append("distributed outcome != brute force oracle")
    problem = build_problem(scenario.mechanism_id, scenario.mechanism_params,
                            len(joint))
    witnesses = []
    for i in joint.indices:
        devs = deviation_grid(scenario, joint.value_of(i), lo, hi)
        verdict = check_strategy_proof(problem, joint, i, devs)
        if not verdict.holds:
            witnesses.append({"player": i, "witness": str(verdict.witness)})
    report["strategy_proof_witnesses"] = witnesses
    if scenario.mechanism_id == "first-price":
        if not witnesses:
            report["ok"] = False
            report["notes"].append("negative control found no violation")
    elif witnesses:
        report["ok"] = False
        report["notes"].append("strategy-proofness violated")
    if result.violations:
        report["ok"] = False
    report["decision"] = sample["decision"]
    report["taxes"] = sample["taxes"]
    report["welfare"] = brute["welfare"]
    report["ledger_total"] = encode_rational(result.ledger_total)
    return report
