"""Entanglement distribution over resource networks.

A network is a set of nodes plus elementary entangled resources (Bell pairs on
edges, optionally GHZ triples and larger).  Distributing a GHZ state to a
chosen terminal set proceeds in three stages:

1. steiner_tree     -- near-minimal tree spanning the terminals (metric-closure
                       MST 2-approximation, or exhaustive exact search).
2. plan_distribution -- an ordered, node-local merge plan over the tree's Bell
                       resources.  Degree-2 relay nodes are contracted first
                       (Bell swap), then branching nodes gather their subtree
                       resources bottom-up with multi-coin star merges, and the
                       final pair of resources is joined by a coin-free
                       parallel-walk merge.
3. execute_schedule -- runs the plan against the state-vector simulator
                       (sampling one measurement branch per step, applying the
                       derived correction, and checking the canonical-GHZ
                       fidelity), or as a symbolic resource ledger that only
                       tracks party sets and site conservation.

All planning is deterministic: ties break on node id, and every randomized
execution path draws from one seeded generator.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .protocols import _Register, derive_ghz_correction
from .qudit import (
    SIZE_CAP,
    Basis,
    QuditState,
    canonical_bell,
    canonical_ghz,
    fidelity,
    fourier_inv_op,
    fourier_op,
    identity_op,
    tensor,
)

FIDELITY_TOL = 1e-9


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class Resource:
    kind: str                 # "bell" | "ghz"
    parties: tuple[int, ...]  # node ids, one site per node

    def __post_init__(self):
        if self.kind == "bell" and len(self.parties) != 2:
            raise NetworkError("bell resources have exactly 2 parties")
        if self.kind == "ghz" and len(self.parties) < 3:
            raise NetworkError("ghz resources have at least 3 parties")
        if self.kind not in ("bell", "ghz"):
            raise NetworkError(f"unknown resource kind {self.kind!r}")
        if len(set(self.parties)) != len(self.parties):
            raise NetworkError("resource parties must be distinct nodes")


@dataclass
class ResourceNetwork:
    local_dim: int
    nodes: dict[int, str]           # id -> label
    resources: list[Resource]

    def validate(self) -> None:
        if not self.nodes:
            raise NetworkError("network has no nodes")
        if self.local_dim < 2:
            raise NetworkError("local_dim must be >= 2")
        for res in self.resources:
            for p in res.parties:
                if p not in self.nodes:
                    raise NetworkError(f"resource references unknown node {p}")

    def adjacency(self) -> dict[int, set[int]]:
        adj = {v: set() for v in self.nodes}
        for res in self.resources:
            for u, v in itertools.combinations(res.parties, 2):
                adj[u].add(v)
                adj[v].add(u)
        return adj

    def bell_edge_pool(self) -> dict[tuple[int, int], list[int]]:
        pool: dict[tuple[int, int], list[int]] = {}
        for i, res in enumerate(self.resources):
            if res.kind == "bell":
                key = tuple(sorted(res.parties))
                pool.setdefault(key, []).append(i)
        return pool


def load_network(path: str | Path) -> ResourceNetwork:
    """Read and validate a network JSON file.

    Schema: {"local_dim": int, "nodes": [{"id": int, "label": str}],
    "resources": [{"kind": "bell"|"ghz", "parties": [int, ...]}]}.  A
    top-level "comment" field is tolerated and ignored.
    """
    with open(path) as fh:
        blob = json.load(fh)
    extra = set(blob) - {"local_dim", "nodes", "resources", "comment"}
    if extra:
        raise NetworkError(f"unknown fields in network file: {sorted(extra)}")
    try:
        ids = [int(n["id"]) for n in blob["nodes"]]
        if len(set(ids)) != len(ids):
            raise NetworkError("duplicate node ids in network file")
        nodes = {int(n["id"]): str(n.get("label", n["id"])) for n in blob["nodes"]}
        resources = [Resource(kind=r["kind"], parties=tuple(int(p) for p in r["parties"]))
                     for r in blob["resources"]]
        net = ResourceNetwork(local_dim=int(blob.get("local_dim", 2)),
                              nodes=nodes, resources=resources)
    except (KeyError, TypeError) as exc:
        raise NetworkError(f"malformed network file: {exc}") from exc
    net.validate()
    return net


def bundled_network_path() -> Path:
    """Path of the package's 14-node demo network."""
    return Path(__file__).parent / "data" / "network14.json"


# ---------------------------------------------------------------------------
# Steiner tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SteinerTree:
    terminals: frozenset[int]
    edges: frozenset[tuple[int, int]]

    @property
    def nodes(self) -> set[int]:
        out = set(self.terminals)
        for u, v in self.edges:
            out.update((u, v))
        return out

    @property
    def steiner_nodes(self) -> set[int]:
        return self.nodes - self.terminals

    def adjacency(self) -> dict[int, set[int]]:
        adj = {v: set() for v in self.nodes}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def check(self) -> None:
        nodes = self.nodes
        if not self.terminals:
            raise NetworkError("no terminals")
        if not self.edges:
            if len(nodes) != 1:
                raise NetworkError("empty edge set with several nodes")
            return
        if len(self.edges) != len(nodes) - 1:
            raise NetworkError("edge count is not |nodes|-1 (not a tree)")
        adj = self.adjacency()
        seen = _component(adj, min(nodes))
        if seen != nodes:
            raise NetworkError("tree is not connected")
        for v, nbrs in adj.items():
            if len(nbrs) == 1 and v not in self.terminals:
                raise NetworkError(f"non-terminal leaf {v}")


def _component(adj: dict[int, set[int]], start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def _bfs_dist(adj: dict[int, set[int]], src: int) -> dict[int, int]:
    dist = {src: 0}
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for w in sorted(adj[u]):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def _lex_shortest_path(adj: dict[int, set[int]], src: int, dst: int) -> tuple[int, ...]:
    """Among all shortest src->dst paths, the lexicographically least node tuple."""
    dist = _bfs_dist(adj, src)
    if dst not in dist:
        raise NetworkError(f"nodes {src} and {dst} are disconnected")
    best: dict[int, tuple[int, ...]] = {src: (src,)}
    order = sorted(dist, key=lambda v: (dist[v], v))
    for v in order:
        if v == src:
            continue
        cands = [best[u] + (v,) for u in adj[v] if dist.get(u) == dist[v] - 1 and u in best]
        best[v] = min(cands)
    return best[dst]


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def _prune_to_tree(edges: set[tuple[int, int]], terminals: set[int]) -> frozenset[tuple[int, int]]:
    """Spanning tree of the edge union, then strip non-terminal leaves."""
    nodes = {v for e in edges for v in e}
    uf = _UnionFind(nodes)
    tree = {e for e in sorted(edges) if uf.union(*e)}
    changed = True
    while changed:
        changed = False
        degree: dict[int, int] = {}
        for u, v in tree:
            degree[u] = degree.get(u, 0) + 1
            degree[v] = degree.get(v, 0) + 1
        for u, v in sorted(tree):
            for leaf in (u, v):
                if degree[leaf] == 1 and leaf not in terminals:
                    tree.discard((u, v))
                    changed = True
                    break
            if changed:
                break
    return frozenset(tree)


def steiner_tree(net: ResourceNetwork, terminals, exact: bool = False) -> SteinerTree:
    """Tree spanning ``terminals``, near-minimal in edge count.

    Default: metric-closure MST (2-approximation) with lexicographic
    tie-breaking throughout, so identical inputs give identical trees.
    ``exact=True`` searches non-terminal subsets exhaustively (allowed up to
    16 non-terminals) and returns a provably edge-minimal tree.
    """
    terminals = sorted(set(int(t) for t in terminals))
    if not terminals:
        raise NetworkError("terminal set is empty")
    for t in terminals:
        if t not in net.nodes:
            raise NetworkError(f"terminal {t} not in network")
    if len(terminals) == 1:
        return SteinerTree(frozenset(terminals), frozenset())

    adj = net.adjacency()
    reach = _component(adj, terminals[0])
    if not set(terminals) <= reach:
        raise NetworkError("terminals are not connected in the network")

    if exact:
        others = sorted(set(net.nodes) - set(terminals))
        if len(others) > 16:
            raise NetworkError("exact mode supports at most 16 non-terminal nodes")
        for size in range(len(others) + 1):
            for extra in itertools.combinations(others, size):
                chosen = set(terminals) | set(extra)
                sub = {v: adj[v] & chosen for v in chosen}
                if _component(sub, terminals[0]) != chosen:
                    continue
                edges = set()
                uf = _UnionFind(chosen)
                for u in sorted(chosen):
                    for w in sorted(sub[u]):
                        if u < w and uf.union(u, w):
                            edges.add((u, w))
                tree = SteinerTree(frozenset(terminals), _prune_to_tree(edges, set(terminals)))
                tree.check()
                return tree
        raise NetworkError("no connecting tree found")  # unreachable if connected

    # metric closure over terminals
    closure = []
    paths: dict[tuple[int, int], tuple[int, ...]] = {}
    for u, v in itertools.combinations(terminals, 2):
        path = _lex_shortest_path(adj, u, v)
        paths[(u, v)] = path
        closure.append((len(path) - 1, u, v))
    closure.sort()
    uf = _UnionFind(terminals)
    union_edges: set[tuple[int, int]] = set()
    for _, u, v in closure:
        if uf.union(u, v):
            path = paths[(u, v)]
            for a, b in zip(path, path[1:]):
                union_edges.add((min(a, b), max(a, b)))
    tree = SteinerTree(frozenset(terminals), _prune_to_tree(union_edges, set(terminals)))
    tree.check()
    return tree


# ---------------------------------------------------------------------------
# Scheduling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScheduleStep:
    """One node-local merge.

    action "pair-merge": the node holds one particle of each of two input
    resources; the first is the coin (identity coin), the second the walk
    position; both are measured and the outputs join.
    action "star-merge": every coin input contributes its node-local particle
    as a Fourier coin shifting onto the position resource's local particle;
    the position resource is a Bell pair whose far particle receives the
    inverse Fourier.  With local_role "coin" a freshly prepared local Bell
    pair donates a coin and leaves its partner at the node (node retention);
    with local_role "position" the local pair itself is the position pair.
    action "release": Fourier-measure the resource's particle at the node,
    dropping the node from the party set.
    """

    node: int
    action: str
    protocol: str
    coin_inputs: tuple[str, ...]
    position_input: str | None
    local_pair: str | None
    local_role: str | None
    output_id: str
    output_parties: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "node": self.node,
            "action": self.action,
            "protocol": self.protocol,
            "coins": list(self.coin_inputs),
            "position": self.position_input,
            "local_pair": self.local_pair,
            "local_role": self.local_role,
            "output": self.output_id,
            "output_parties": list(self.output_parties),
        }


@dataclass
class SwapSchedule:
    terminals: tuple[int, ...]
    initial: dict[str, Resource]          # resource id -> elementary resource
    steps: list[ScheduleStep] = field(default_factory=list)

    @property
    def acting_nodes(self) -> list[int]:
        return [s.node for s in self.steps]

    def to_dict(self) -> dict:
        return {
            "terminals": list(self.terminals),
            "initial_resources": {
                rid: {"kind": r.kind, "parties": list(r.parties)}
                for rid, r in sorted(self.initial.items())
            },
            "steps": [s.to_dict() for s in self.steps],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _eccentricity_root(adj: dict[int, set[int]], nodes: set[int]) -> int:
    best = None
    for v in sorted(nodes):
        ecc = max(_bfs_dist(adj, v).values())
        if best is None or ecc < best[0]:
            best = (ecc, v)
    return best[1]


def plan_distribution(tree: SteinerTree, net: ResourceNetwork) -> SwapSchedule:
    """Merge plan turning per-edge Bell resources into a terminal-set GHZ.

    Raises NetworkError when some tree edge has no Bell resource available.
    """
    tree.check()
    terminals = tuple(sorted(tree.terminals))
    if not tree.edges:
        return SwapSchedule(terminals=terminals, initial={})

    pool = net.bell_edge_pool()
    initial: dict[str, Resource] = {}
    live: dict[str, tuple[int, ...]] = {}    # id -> parties
    edge_res: dict[tuple[int, int], str] = {}
    for i, edge in enumerate(sorted(tree.edges)):
        avail = pool.get(edge, [])
        if not avail:
            raise NetworkError(f"no elementary Bell resource on tree edge {edge}")
        res = net.resources[avail.pop(0)]
        rid = f"r{i}"
        initial[rid] = res
        live[rid] = res.parties
        edge_res[edge] = rid

    counters = {"m": 0, "l": 0}
    steps: list[ScheduleStep] = []
    term_set = set(terminals)

    def fresh(prefix: str) -> str:
        counters[prefix] += 1
        return f"{prefix}{counters[prefix] - 1}"

    def incident(v: int) -> list[str]:
        return sorted(rid for rid, parties in live.items() if v in parties)

    def rest(rid: str, v: int) -> tuple[int, ...]:
        return tuple(p for p in live[rid] if p != v)

    def add_pair_merge(v: int, r1: str, r2: str) -> str:
        out = fresh("m")
        parties = rest(r1, v) + rest(r2, v)
        steps.append(ScheduleStep(
            node=v, action="pair-merge", protocol="ghz-parallel-d",
            coin_inputs=(r1,), position_input=r2, local_pair=None,
            local_role=None, output_id=out, output_parties=parties))
        del live[r1], live[r2]
        live[out] = parties
        return out

    def add_star_merge(v: int, coins: list[str], position: str | None,
                       retain: bool) -> str:
        out = fresh("m")
        local = None
        local_role = None
        if position is None:
            local = fresh("l")
            local_role = "position"
        elif retain:
            local = fresh("l")
            local_role = "coin"
        parties: list[int] = []
        for rid in coins:
            parties.extend(rest(rid, v))
        if local_role == "coin":
            parties.append(v)
        if local_role == "position":
            parties.append(v)
        else:
            parties.extend(rest(position, v))
        steps.append(ScheduleStep(
            node=v, action="star-merge", protocol="ghz-from-bells-d",
            coin_inputs=tuple(coins), position_input=position,
            local_pair=local, local_role=local_role,
            output_id=out, output_parties=tuple(parties)))
        for rid in coins:
            del live[rid]
        if position is not None:
            del live[position]
        live[out] = tuple(parties)
        return out

    def add_release(v: int, rid: str) -> str:
        out = fresh("m")
        parties = rest(rid, v)
        steps.append(ScheduleStep(
            node=v, action="release", protocol="fourier-release",
            coin_inputs=(rid,), position_input=None, local_pair=None,
            local_role=None, output_id=out, output_parties=parties))
        del live[rid]
        live[out] = parties
        return out

    # stage 1: contract non-terminal relay nodes (two Bell resources meeting)
    adj = tree.adjacency()
    root0 = _eccentricity_root(adj, tree.nodes)
    depth0 = _bfs_dist(adj, root0)
    while True:
        eligible = []
        for v in tree.nodes:
            if v in term_set:
                continue
            inc = incident(v)
            if len(inc) == 2 and all(len(live[r]) == 2 for r in inc):
                eligible.append(v)
        if not eligible:
            break
        v = sorted(eligible, key=lambda x: (-depth0[x], x))[0]
        r1, r2 = incident(v)
        add_pair_merge(v, r1, r2)

    # stage 2: bottom-up gathering on the contracted tree
    cadj: dict[int, set[int]] = {}
    for parties in live.values():
        for u, w in itertools.combinations(parties, 2):
            cadj.setdefault(u, set()).add(w)
            cadj.setdefault(w, set()).add(u)
    if cadj:
        cnodes = set(cadj)
        root = _eccentricity_root(cadj, cnodes)
        depth = _bfs_dist(cadj, root)
        parent = {root: None}
        for v in sorted(cnodes, key=lambda x: (depth[x], x)):
            for w in cadj[v]:
                if depth[w] == depth[v] + 1 and w not in parent:
                    parent[w] = v
        children: dict[int, list[int]] = {v: [] for v in cnodes}
        for w, p in parent.items():
            if p is not None:
                children[p].append(w)

        def resource_between(v: int, w: int) -> str:
            for rid in incident(v):
                if w in live[rid]:
                    return rid
            raise NetworkError(f"no live resource between {v} and {w}")

        # the resource carrying each processed subtree up to its parent
        up_res: dict[int, str] = {}
        for v in cnodes:
            if not children[v] and parent[v] is not None:
                up_res[v] = resource_between(v, parent[v])

        for v in sorted((x for x in cnodes if children[x]),
                        key=lambda x: (-depth[x], x)):
            kid_res = [up_res[c] for c in sorted(children[v])]
            retain = v in term_set
            if parent[v] is not None:
                up_res[v] = add_star_merge(
                    v, kid_res, resource_between(v, parent[v]), retain)
                continue
            # root handling
            if len(kid_res) == 1:
                if not retain:
                    add_release(v, kid_res[0])
                continue
            if len(kid_res) == 2 and not retain:
                add_pair_merge(v, kid_res[0], kid_res[1])
                continue
            bells = [r for r in kid_res if len(live[r]) == 2]
            if bells:
                position = bells[0]
                coins = [r for r in kid_res if r != position]
                add_star_merge(v, coins, position, retain)
            else:
                out = add_star_merge(v, kid_res, None, retain)
                if not retain:
                    add_release(v, out)

    if len(live) != 1:
        raise NetworkError(f"planning left {len(live)} resources, expected 1")
    final_parties = next(iter(live.values()))
    if set(final_parties) != term_set:
        raise NetworkError(
            f"planned output spans {sorted(set(final_parties))}, wanted {terminals}")
    return SwapSchedule(terminals=terminals, initial=initial, steps=steps)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

@dataclass
class DistributionResult:
    mode: str
    terminals: tuple[int, ...]
    step_count: int
    resources_consumed: int
    final_parties: tuple[int, ...]
    fidelity: float | None = None
    final_state: QuditState | None = None
    ledger: list[dict] = field(default_factory=list)
    outcomes: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "mode": self.mode,
            "terminals": list(self.terminals),
            "steps": self.step_count,
            "resources_consumed": self.resources_consumed,
            "final_parties": list(self.final_parties),
        }
        if self.fidelity is not None:
            out["fidelity"] = self.fidelity
        if self.ledger:
            out["ledger"] = self.ledger
        if self.outcomes:
            out["outcomes"] = self.outcomes
        return out


def _slot_of(parties: tuple[int, ...], node: int) -> int:
    return parties.index(node)


def _simulate_step(step: ScheduleStep, states: dict[str, tuple[tuple[int, ...], QuditState]],
                   d: int, rng: np.random.Generator) -> dict:
    involved = list(step.coin_inputs)
    if step.position_input is not None:
        involved.append(step.position_input)

    parts = []
    labels_of: dict[str, list[tuple[str, int]]] = {}
    total_sites = 0
    for rid in involved:
        parties, st = states[rid]
        labels = [(rid, i) for i in range(len(parties))]
        labels_of[rid] = labels
        parts.append((st, labels))
        total_sites += len(parties)
    if step.local_pair is not None:
        total_sites += 2
    if d**total_sites > SIZE_CAP:
        raise NetworkError(
            f"step at node {step.node} needs {total_sites} live sites at d={d}; "
            "over the dense cap -- use symbolic mode")
    if step.local_pair is not None:
        parts.append((canonical_bell(d, 0, 0),
                      [(step.local_pair, 0), (step.local_pair, 1)]))
        states[step.local_pair] = ((step.node, step.node), None)

    state = parts[0][0]
    labels = list(parts[0][1])
    for st, labs in parts[1:]:
        state = tensor(state, st)
        labels.extend(labs)
    reg = _Register(state, tuple(labels))

    def particle(rid: str) -> tuple[str, int]:
        parties = states[rid][0]
        return (rid, _slot_of(parties, step.node))

    F = fourier_op(d)
    I = identity_op(d)
    targets: list[tuple[tuple[str, int], Basis]] = []

    if step.action == "pair-merge":
        coin = particle(step.coin_inputs[0])
        pos = particle(step.position_input)
        reg = reg.walk(coin, pos, I)
        targets = [(coin, Basis.FOURIER), (pos, Basis.COMPUTATIONAL)]
        ft_label = None
    elif step.action == "star-merge":
        if step.local_role == "position":
            pos = (step.local_pair, 0)
            ft_label = (step.local_pair, 1)
        else:
            pos = particle(step.position_input)
            pos_parties = states[step.position_input][0]
            far = 1 - _slot_of(pos_parties, step.node)
            ft_label = (step.position_input, far)
        coin_particles = [particle(rid) for rid in step.coin_inputs]
        if step.local_role == "coin":
            coin_particles.append((step.local_pair, 0))
        for cp in coin_particles:
            reg = reg.walk(cp, pos, F)
        targets = [(cp, Basis.FOURIER) for cp in coin_particles]
        targets.append((pos, Basis.COMPUTATIONAL))
    elif step.action == "release":
        targets = [(particle(step.coin_inputs[0]), Basis.FOURIER)]
        ft_label = None
    else:
        raise NetworkError(f"unknown action {step.action}")

    # sample one branch
    options = list(reg.measure(targets))
    probs = np.array([p for _, p, _ in options])
    pick = rng.choice(len(options), p=probs / probs.sum())
    values, _, post = options[pick]
    if step.action == "star-merge":
        post = post.apply(fourier_inv_op(d), [ft_label])

    # reorder surviving sites to the step's documented output order
    node_of = {}
    for rid in involved + ([step.local_pair] if step.local_pair else []):
        parties = (step.node, step.node) if rid == step.local_pair else states[rid][0]
        for i, p in enumerate(parties):
            node_of[(rid, i)] = p
    want: list[tuple[str, int]] = []
    remaining = list(post.labels)
    for party in step.output_parties:
        pick_lab = next(lab for lab in remaining if node_of[lab] == party)
        remaining.remove(pick_lab)
        want.append(pick_lab)
    ordered = post.reorder(want).state

    corr = derive_ghz_correction(ordered)
    corrected = corr.apply_to(ordered)
    target = canonical_ghz(d, len(step.output_parties))
    fid = fidelity(corrected, target)
    if fid < 1 - FIDELITY_TOL:
        raise NetworkError(f"step at node {step.node} failed to recover GHZ (fid={fid})")

    for rid in involved + ([step.local_pair] if step.local_pair else []):
        states.pop(rid, None)
    states[step.output_id] = (step.output_parties, corrected)
    return {"node": step.node, "action": step.action,
            "outcome": [int(v) for v in values], "correction": corr.label,
            "step_fidelity": fid}


def execute_schedule(schedule: SwapSchedule, mode: str = "simulated",
                     d: int = 2, seed: int = 0) -> DistributionResult:
    """Run a schedule to completion.

    simulated: state-vector execution; one Born-sampled branch per step, the
    derived correction applied, per-step and final canonical-GHZ fidelity
    checks.  Independent resources stay factored, so the cap applies per
    merge event rather than to the whole network.
    symbolic: party-set bookkeeping with site conservation per step.
    """
    terminals = schedule.terminals
    if mode == "symbolic":
        live: dict[str, tuple[int, ...]] = {
            rid: res.parties for rid, res in schedule.initial.items()}
        ledger = []
        for step in schedule.steps:
            inputs = list(step.coin_inputs)
            if step.position_input is not None:
                inputs.append(step.position_input)
            sites_in = 0
            for rid in inputs:
                if rid not in live:
                    raise NetworkError(f"step consumes unknown resource {rid}")
                if step.node not in live[rid]:
                    raise NetworkError(f"resource {rid} has no particle at node {step.node}")
                sites_in += len(live[rid])
            if step.local_pair is not None:
                sites_in += 2
            if step.action == "pair-merge":
                measured = 2
            elif step.action == "star-merge":
                measured = len(step.coin_inputs) + 1 + (1 if step.local_role == "coin" else 0)
            else:
                measured = 1
            if sites_in - measured != len(step.output_parties):
                raise NetworkError("site conservation violated in schedule step")
            for rid in inputs:
                del live[rid]
            live[step.output_id] = step.output_parties
            ledger.append({"node": step.node, "action": step.action,
                           "sites_in": sites_in, "measured": measured,
                           "output": step.output_id,
                           "parties": list(step.output_parties)})
        final_parties = _final_parties(live, terminals)
        return DistributionResult(
            mode="symbolic", terminals=terminals, step_count=len(schedule.steps),
            resources_consumed=len(schedule.initial) + sum(
                1 for s in schedule.steps if s.local_pair),
            final_parties=final_parties, ledger=ledger)

    if mode != "simulated":
        raise NetworkError(f"unknown mode {mode!r}")

    rng = np.random.default_rng(seed)
    states: dict[str, tuple[tuple[int, ...], QuditState]] = {}
    for rid, res in schedule.initial.items():
        st = (canonical_bell(d, 0, 0) if res.kind == "bell"
              else canonical_ghz(d, len(res.parties)))
        states[rid] = (res.parties, st)
    outcomes = []
    for step in schedule.steps:
        outcomes.append(_simulate_step(step, states, d, rng))

    live = {rid: parties for rid, (parties, _) in states.items()}
    final_parties = _final_parties(live, terminals)
    if len(terminals) == 1:
        return DistributionResult(
            mode="simulated", terminals=terminals, step_count=0,
            resources_consumed=0, final_parties=terminals, fidelity=1.0)
    (final_rid,) = [rid for rid, parties in live.items()
                    if set(parties) == set(terminals)]
    final_state = states[final_rid][1]
    fid = fidelity(final_state, canonical_ghz(d, len(terminals)))
    return DistributionResult(
        mode="simulated", terminals=terminals, step_count=len(schedule.steps),
        resources_consumed=len(schedule.initial) + sum(
            1 for s in schedule.steps if s.local_pair),
        final_parties=final_parties, fidelity=fid, final_state=final_state,
        outcomes=outcomes)


def _final_parties(live: dict[str, tuple[int, ...]], terminals: tuple[int, ...]):
    if len(terminals) == 1:
        return terminals
    spanning = [parties for parties in live.values()
                if set(parties) == set(terminals)]
    if len(spanning) != 1 or len(live) != 1:
        raise NetworkError(
            f"execution finished with resources {sorted(live.values())}, "
            f"expected a single one over {list(terminals)}")
    return spanning[0]


def distribute(net: ResourceNetwork, terminals, mode: str = "simulated",
               d: int | None = None, seed: int = 0,
               exact_steiner: bool = False) -> tuple[SteinerTree, SwapSchedule, DistributionResult]:
    """Steiner tree + plan + execution in one call."""
    tree = steiner_tree(net, terminals, exact=exact_steiner)
    schedule = plan_distribution(tree, net)
    result = execute_schedule(schedule, mode=mode,
                              d=d if d is not None else net.local_dim, seed=seed)
    return tree, schedule, result


# ---------------------------------------------------------------------------
# Random instances (testing and demos)
# ---------------------------------------------------------------------------

def random_tree_instance(seed: int, max_nodes: int = 10, max_terminals: int = 4,
                         d: int = 2) -> tuple[ResourceNetwork, SteinerTree]:
    """Seeded random tree network whose leaves (plus maybe one internal node)
    form the terminal set; every tree edge carries one Bell resource."""
    rng = np.random.default_rng(seed)
    while True:
        n = int(rng.integers(2, max_nodes + 1))
        if n == 2:
            edges = [(0, 1)]
        else:
            edges = [(int(rng.integers(0, v)), v) for v in range(1, n)]
        adj: dict[int, set[int]] = {v: set() for v in range(n)}
        for u, v in edges:
            adj[u].add(v)
            adj[v].add(u)
        leaves = sorted(v for v in adj if len(adj[v]) == 1)
        if len(leaves) > max_terminals:
            seed = int(rng.integers(0, 2**31))
            rng = np.random.default_rng(seed)
            continue
        terminals = set(leaves)
        internal = [v for v in adj if v not in terminals]
        if internal and len(terminals) < max_terminals and rng.random() < 0.5:
            terminals.add(int(rng.choice(internal)))
        net = ResourceNetwork(
            local_dim=d,
            nodes={v: f"n{v}" for v in range(n)},
            resources=[Resource("bell", (u, v)) for u, v in edges],
        )
        net.validate()
        tree = SteinerTree(frozenset(terminals),
                           frozenset((min(u, v), max(u, v)) for u, v in edges))
        tree.check()
        return net, tree
