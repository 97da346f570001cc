"""Entanglement-swapping and GHZ-merging protocols built on coined quantum walks.

Every protocol here consumes two or more entangled resources whose particles
meet at a middle location, runs one or more coined-walk steps there (a local
coin unitary followed by the conditional shift), measures the walked particles
in prescribed bases, and leaves the remaining particles in an entangled state
that a local correction maps back to a canonical Bell or GHZ state.

Protocol catalog and site conventions
-------------------------------------
Particles keep the 1-based labels used throughout this package's docs; state
site order is always the initial product order, and the output state keeps the
unmeasured particles in that same relative order.

bell-swap-2d      particles 1..4 = Bell(1,2) x Bell(3,4); one walk, coin X on
                  2, shift 2->3; measure 2 in the Fourier (+/-) basis, 3
                  computationally; output (1,4).
ghz-swap-2d       particles 1..6 = GHZ(1,2,3) x GHZ(4,5,6); coins X on 2 and
                  H on 3, both shifting onto 4; measure 2 Fourier, 3 and 4
                  computationally; output (1,5,6).
merge-method-1    GHZ(a1..am) x GHZ(b1..bn); k coins a1..ak (X then H's), all
                  shifting onto b1; measure a1 Fourier, a2..ak and b1
                  computationally; output (a_{k+1}..a_m, b2..bn).  With
                  retain_coins=True, a1 stays unmeasured and joins the output.
merge-method-2    k parallel single-coin walks a_i -> b_i with coin X;
                  measure a1..ak Fourier and b1..bk computationally; output
                  (a_{k+1}.., b_{k+1}..).  retain_coins=True skips the a
                  measurements.
merge-combined    method 2 on pairs (a_i,b_i), i < l, and method 1 with coins
                  a_l..a_k onto b_l; outcome order is a1..ak then b1..bl.
bell-swap-d       generalized Bell labels ((m,n),(p,q)); one walk with coin I
                  on 2, shift 2->3; Fourier result k0 on 2 and value u0 on 3
                  leave (1,4) in the Bell state labeled (m+p-k0, n+q-u0).
ghz-parallel-d    d-dim version of method 2 with coin I; the position results
                  agree on a single value u0 on every nonzero branch.
ghz-swap-d        two qudit GHZ triples; coins F on 2 and 3 shifting onto 4,
                  then inverse Fourier on 1; measure 2,3 Fourier (results
                  always coincide) and 4 computationally; output (1,5,6).
ghz-multi-coin-d  coins F on a2..am shifting onto b1, inverse Fourier on a1;
                  output (a1, b2..bn).
ghz-from-bells-d  bells+1 Bell pairs (2k-1,2k); pair k's particle 2k is the
                  k-th coin (F), particle 2*bells+1 is the shared position;
                  after measuring, inverse Fourier on 2*bells+2; output
                  (1,3,...,2*bells-1, 2*bells+2).
triangle-merge-2d three qubit GHZ triples (a,q1,q6),(q2,b,q3),(q4,q5,c);
                  coin-X walks q1->q2, q3->q4, q5->q6; measure q1,q3,q5
                  Fourier and q2,q4,q6 computationally; output (a,b,c).
triangle-merge-d  same triple layout; coin-I walk q1->q2 measured first
                  (results p1,u1), then coin-I walks q4->q3 and q5->q6
                  measured (p2,p3,u2,u3); the position values satisfy
                  u1 + u2 = u3 (mod d) on every nonzero branch; output (a,b,c).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .qudit import (
    Basis,
    OperatorMatrix,
    QuditState,
    apply,
    canonical_bell,
    canonical_ghz,
    clock_power_op,
    fourier_inv_op,
    fourier_op,
    identity_op,
    label_shift_op,
    measure_all_branches,
    pauli_x,
    pauli_z,
    shift_op,
    tensor,
)

FIDELITY_TOL = 1e-9


class ProtocolKind(Enum):
    BELL_SWAP_2D = "bell-swap-2d"
    GHZ_SWAP_2D = "ghz-swap-2d"
    MERGE_METHOD_1 = "merge-method-1"
    MERGE_METHOD_2 = "merge-method-2"
    MERGE_COMBINED = "merge-combined"
    BELL_SWAP_D = "bell-swap-d"
    GHZ_PARALLEL_D = "ghz-parallel-d"
    GHZ_SWAP_D = "ghz-swap-d"
    GHZ_MULTI_COIN_D = "ghz-multi-coin-d"
    GHZ_FROM_BELLS_D = "ghz-from-bells-d"
    TRIANGLE_MERGE_2D = "triangle-merge-2d"
    TRIANGLE_MERGE_D = "triangle-merge-d"


@dataclass(frozen=True)
class ProtocolSpec:
    """Parameter bundle selecting one protocol instance.

    m, n are input GHZ party counts, k the coin count (method 1/2/parallel),
    l the method-2 share of the combined merge, bells the number of
    coin-carrying Bell pairs, bell_labels = (m, n, p, q) the generalized Bell
    labels for bell-swap-d, retain_coins the keep-the-coin-sites variant of
    the two merge methods.
    """

    kind: ProtocolKind
    d: int = 2
    m: int = 0
    n: int = 0
    k: int = 0
    l: int = 0
    bells: int = 0
    bell_labels: tuple[int, int, int, int] = (0, 0, 0, 0)
    retain_coins: bool = False

    def validate(self) -> None:
        kd = self.kind
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if kd in (ProtocolKind.BELL_SWAP_2D, ProtocolKind.GHZ_SWAP_2D,
                  ProtocolKind.MERGE_METHOD_1, ProtocolKind.MERGE_METHOD_2,
                  ProtocolKind.MERGE_COMBINED, ProtocolKind.TRIANGLE_MERGE_2D):
            if self.d != 2:
                raise ValueError(f"{kd.value} is defined for d=2 only")
        if kd in (ProtocolKind.MERGE_METHOD_1,):
            if self.m < 2 or self.n < 2 or not 1 <= self.k <= self.m - 1:
                raise ValueError("method 1 needs m,n >= 2 and 1 <= k <= m-1")
        if kd in (ProtocolKind.MERGE_METHOD_2, ProtocolKind.GHZ_PARALLEL_D):
            if self.m < 2 or self.n < 2 or not 1 <= self.k <= min(self.m, self.n) - 1:
                raise ValueError("parallel merge needs 1 <= k <= min(m,n)-1")
        if kd is ProtocolKind.MERGE_COMBINED:
            q = self.k + self.l
            ok = (self.k > self.l >= 2 and q <= self.m + self.n - 2
                  and self.k <= self.m - 1 and self.l <= self.n - 1)
            if not ok:
                raise ValueError("combined merge needs k > l >= 2, k+l <= m+n-2, "
                                 "k <= m-1, l <= n-1")
        if kd is ProtocolKind.BELL_SWAP_D:
            if not all(0 <= x < self.d for x in self.bell_labels):
                raise ValueError("bell labels out of range")
        if kd is ProtocolKind.GHZ_MULTI_COIN_D:
            if self.m < 2 or self.n < 2:
                raise ValueError("multi-coin merge needs m,n >= 2")
        if kd is ProtocolKind.GHZ_FROM_BELLS_D:
            if self.bells < 1:
                raise ValueError("need at least one coin Bell pair")
        if self.retain_coins and kd not in (
            ProtocolKind.MERGE_METHOD_1, ProtocolKind.MERGE_METHOD_2,
            ProtocolKind.GHZ_PARALLEL_D,
        ):
            raise ValueError("retain_coins applies to the merge methods only")


@dataclass(frozen=True)
class CorrectionOp:
    """Product of single-site unitaries (applied in list order) and a phase."""

    ops: tuple[tuple[int, str, OperatorMatrix], ...]
    global_phase: complex = 1.0
    label: str = "I"

    def apply_to(self, state: QuditState) -> QuditState:
        out = state
        for site, _, mat in self.ops:
            out = apply(out, mat, [site])
        if self.global_phase != 1.0:
            out = QuditState(out.d, out.n, self.global_phase * out.amps)
        return out

    def to_dict(self) -> dict:
        return {"label": self.label,
                "ops": [{"site": s, "op": name} for s, name, _ in self.ops]}


IDENTITY_CORRECTION = CorrectionOp(ops=(), label="I")


class CorrectionError(ValueError):
    """Raised when a residual state is not a shifted, phased GHZ pattern."""


@dataclass(frozen=True)
class BranchResult:
    outcome: tuple[int, ...]
    probability: float
    post: QuditState
    correction: CorrectionOp
    fidelity: float
    bell_label: tuple[int, int] | None = None
    label_fidelity: float | None = None


@dataclass
class ProtocolResult:
    spec: ProtocolSpec
    measured: tuple[tuple[str, Basis], ...]
    output_labels: tuple[str, ...]
    branches: list[BranchResult] = field(default_factory=list)

    @property
    def min_fidelity(self) -> float:
        return min(b.fidelity for b in self.branches)

    @property
    def total_probability(self) -> float:
        return sum(b.probability for b in self.branches)

    def all_recovered(self, tol: float = FIDELITY_TOL) -> bool:
        return self.min_fidelity >= 1 - tol and abs(self.total_probability - 1) <= 1e-9

    def to_dict(self) -> dict:
        params = {}
        for name in ("m", "n", "k", "l", "bells"):
            v = getattr(self.spec, name)
            if v:
                params[name] = v
        if self.spec.kind is ProtocolKind.BELL_SWAP_D:
            params["bell_labels"] = list(self.spec.bell_labels)
        if self.spec.retain_coins:
            params["retain_coins"] = True
        return {
            "protocol": self.spec.kind.value,
            "d": self.spec.d,
            "params": params,
            "measured": [[lab, basis.value] for lab, basis in self.measured],
            "outputs": list(self.output_labels),
            "branches": [
                {
                    "outcome": list(b.outcome),
                    "probability": b.probability,
                    "correction": b.correction.label,
                    "fidelity": b.fidelity,
                }
                for b in self.branches
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


# ---------------------------------------------------------------------------
# Walk primitive
# ---------------------------------------------------------------------------

def walk_step(state: QuditState, coin_site: int, pos_site: int,
              coin_op: OperatorMatrix) -> QuditState:
    """One coined-walk step: coin_op on coin_site, then the conditional shift.

    The shift subtracts the coin value from the position value (mod d).
    """
    if coin_site == pos_site:
        raise ValueError("coin and position sites must differ")
    if coin_op.arity != 1:
        raise ValueError("coin operator must act on one site")
    out = apply(state, coin_op, [coin_site])
    return apply(out, shift_op(state.d), [coin_site, pos_site])


def outcome_parity(bits) -> int:
    """Mod-2 sum of measurement bits; the y / N parity of the merge tables."""
    return int(sum(bits)) % 2


# ---------------------------------------------------------------------------
# Labeled-register helper
# ---------------------------------------------------------------------------

class _Register:
    """A state plus the particle label of each live site."""

    def __init__(self, state: QuditState, labels: tuple[str, ...]):
        assert state.n == len(labels)
        self.state = state
        self.labels = labels

    def idx(self, label: str) -> int:
        return self.labels.index(label)

    def apply(self, op: OperatorMatrix, labels: list[str]) -> "_Register":
        sites = [self.idx(x) for x in labels]
        return _Register(apply(self.state, op, sites), self.labels)

    def walk(self, coin: str, pos: str, coin_op: OperatorMatrix) -> "_Register":
        st = walk_step(self.state, self.idx(coin), self.idx(pos), coin_op)
        return _Register(st, self.labels)

    def measure(self, targets: list[tuple[str, Basis]]):
        """Yield (values, probability, post register) per nonzero branch."""
        site_targets = [(self.idx(lab), basis) for lab, basis in targets]
        kept = tuple(lab for lab in self.labels
                     if lab not in {t[0] for t in targets})
        for br in measure_all_branches(self.state, site_targets):
            values = tuple(v for (_, _, v) in br.outcome)
            post = _Register(br.post, kept) if br.post is not None else None
            yield values, br.probability, post

    def reorder(self, new_order: list) -> "_Register":
        new_order = tuple(new_order)
        if set(new_order) != set(self.labels) or len(new_order) != len(self.labels):
            raise ValueError("reorder must permute the existing labels")
        perm = [self.labels.index(lab) for lab in new_order]
        tens = np.moveaxis(self.state.tensor_view(), perm, range(len(perm)))
        state = QuditState(self.state.d, self.state.n,
                           np.ascontiguousarray(tens.reshape(-1)))
        return _Register(state, new_order)


def _product_register(d: int, parts: list[tuple[QuditState, list[str]]]) -> _Register:
    state, labels = parts[0][0], list(parts[0][1])
    for st, labs in parts[1:]:
        state = tensor(state, st)
        labels.extend(labs)
    return _Register(state, tuple(labels))


# ---------------------------------------------------------------------------
# Generic correction derivation
# ---------------------------------------------------------------------------

def _shift_name(d: int, s: int) -> str:
    return "X" if (d == 2 and s == 1) else f"U[0,{s}]"

def _phase_name(d: int, t: int) -> str:
    return "Z" if (d == 2 and t == 1) else f"Z^{t}"


def derive_ghz_correction(state: QuditState, atol: float = 1e-8) -> CorrectionOp:
    """Read site offsets and the linear phase off a shifted GHZ residual.

    Every residual state these protocols produce has the form
    (1/sqrt d) sum_r g * w^{-t r} |r+s_0, r+s_1, ..., r+s_{P-1}>, so the
    correction is a label shift per offset site plus a clock power on the
    reference site, with g folded into the global phase.
    """
    d, n = state.d, state.n
    tens = state.tensor_view()
    nz = np.argwhere(np.abs(tens) > atol)
    if len(nz) != d:
        raise CorrectionError(f"support size {len(nz)} != d")
    ref = nz[0]
    offsets = [(int(v) - int(ref[0])) % d for v in ref]
    coeffs = []
    for r in range(d):
        idx = tuple((r + s) % d for s in offsets)
        c = complex(tens[idx])
        if abs(abs(c) - 1 / np.sqrt(d)) > atol:
            raise CorrectionError("support magnitudes are not uniform")
        coeffs.append(c)
    rel = np.array(coeffs) / coeffs[0]
    w = np.exp(2j * np.pi / d)
    t = int(round((-np.angle(rel[1]) / (2 * np.pi / d)))) % d if d > 1 else 0
    if not np.allclose(rel, w ** (-t * np.arange(d)), atol=atol):
        raise CorrectionError("phases are not linear in the GHZ index")

    ops = []
    names = []
    for j, s in enumerate(offsets):
        if s:
            ops.append((j, _shift_name(d, s), label_shift_op(d, 0, s)))
            names.append(f"{_shift_name(d, s)}@{j}")
    if t:
        ops.append((0, _phase_name(d, t), clock_power_op(d, t)))
        names.append(f"{_phase_name(d, t)}@0")
    g = coeffs[0] * np.sqrt(d)  # unit-modulus residue; cancel it exactly
    phase = np.conj(g) if abs(abs(g) - 1) < atol else 1.0
    return CorrectionOp(ops=tuple(ops), global_phase=complex(phase),
                        label=" ".join(names) if names else "I")


def _shift_phase_correction(d: int, n_out: int, shifts: dict[int, int],
                            t: int, phase_site: int = 0) -> CorrectionOp:
    """Correction made of label shifts per site plus one clock power."""
    ops = []
    names = []
    for site in sorted(shifts):
        s = shifts[site] % d
        if s:
            ops.append((site, _shift_name(d, s), label_shift_op(d, 0, s)))
            names.append(f"{_shift_name(d, s)}@{site}")
    t %= d
    if t:
        ops.append((phase_site, _phase_name(d, t), clock_power_op(d, t)))
        names.append(f"{_phase_name(d, t)}@{phase_site}")
    return CorrectionOp(ops=tuple(ops), label=" ".join(names) if names else "I")


# ---------------------------------------------------------------------------
# Table-rule corrections for the qubit protocols
# ---------------------------------------------------------------------------

def _op_product(d: int, site_ops: list[tuple[int, str]], sign: int) -> CorrectionOp:
    """Build a qubit correction from (site, 'X'|'Z') factors applied in order."""
    mats = {"X": pauli_x(d), "Z": pauli_z(d)}
    ops = tuple((site, name, mats[name]) for site, name in site_ops)
    label = ("-" if sign < 0 else "") + (
        "".join(f"{name}{site + 1}" for site, name in reversed(site_ops)) or "I")
    return CorrectionOp(ops=ops, global_phase=complex(sign), label=label)


def _bell_swap_2d_correction(outcome: tuple[int, int]) -> CorrectionOp:
    table = {
        (0, 0): ([(0, "X")], +1),
        (0, 1): ([], +1),
        (1, 0): ([(0, "X"), (0, "Z")], +1),   # Z1 X1
        (1, 1): ([(0, "Z")], -1),             # -Z1
    }
    site_ops, sign = table[outcome]
    return _op_product(2, site_ops, sign)


def _ghz_swap_2d_correction(outcome: tuple[int, int, int]) -> CorrectionOp:
    table = {
        (0, 0, 0): ([(0, "X")], +1),
        (0, 0, 1): ([], +1),
        (0, 1, 0): ([(0, "Z")], +1),
        (0, 1, 1): ([(0, "Z"), (0, "X")], +1),  # X1 Z1
        (1, 0, 0): ([(0, "X"), (0, "Z")], +1),  # Z1 X1
        (1, 0, 1): ([(0, "Z")], -1),
        (1, 1, 0): ([], -1),
        (1, 1, 1): ([(0, "X")], -1),
    }
    site_ops, sign = table[outcome]
    return _op_product(2, site_ops, sign)


def _method1_correction(outcome: tuple[int, ...], m: int, k: int) -> CorrectionOp:
    """Measured-result rule: outcome = (a1, x2..xk, b1), parity y of the x's."""
    a1, xs, b1 = outcome[0], outcome[1:-1], outcome[-1]
    y = outcome_parity(xs)
    a_out = m - k  # output sites 0..a_out-1 hold a_{k+1}..a_m
    flips = [(j, "X") for j in range(a_out)]
    if b1 == y:
        if a1 == 0:
            return _op_product(2, flips + ([(0, "Z")] if y else []), +1)
        return _op_product(2, flips + ([(0, "Z")] if (y + 1) % 2 else []), -1)
    if a1 == 0:
        return _op_product(2, [(0, "Z")] if y else [], +1)
    return _op_product(2, [(0, "Z")] if (y + 1) % 2 else [], -1)


def _method2_correction(outcome: tuple[int, ...], m: int, k: int) -> CorrectionOp:
    """Measured-result rule: outcome = (x1..xk, b...b); all b values agree.

    The conventional layout of the matching reference table pairs the
    position value 0...0 with the flip-free entry, which cannot map that
    branch's |0..01..1>-type residual onto the GHZ target with single-site
    phases alone; the two entries are applied here with the roles exchanged
    (flips on the b=0...0 branch), which is the assignment the residuals
    demand.  verify_table reports the transposition.
    """
    xs, b = outcome[:k], outcome[-1]
    n_parity = outcome_parity(xs)
    a_out = m - k
    sign = -1 if n_parity else +1  # (-Z)^N carries the sign
    z = [(0, "Z")] if n_parity else []
    if b == 0:
        return _op_product(2, [(j, "X") for j in range(a_out)] + z, sign)
    return _op_product(2, z, sign)


# ---------------------------------------------------------------------------
# Protocol construction
# ---------------------------------------------------------------------------

def _a_labels(m):
    return [f"a{i}" for i in range(1, m + 1)]

def _b_labels(n):
    return [f"b{i}" for i in range(1, n + 1)]


def _enumerate_single_stage(reg: _Register, targets: list[tuple[str, Basis]]):
    return [(vals, p, post) for vals, p, post in reg.measure(targets)]


def _build_branches(spec: ProtocolSpec):
    """Run the protocol circuit; return (measured, output_labels, raw branches).

    Raw branches are (outcome values, probability, post register).
    """
    d = spec.d
    kd = spec.kind
    F = fourier_op(d)
    H = fourier_op(2)
    X2 = pauli_x(2)
    I = identity_op(d)

    if kd is ProtocolKind.BELL_SWAP_2D:
        reg = _product_register(2, [
            (canonical_bell(2, 0, 0), ["1", "2"]),
            (canonical_bell(2, 0, 0), ["3", "4"]),
        ])
        reg = reg.walk("2", "3", X2)
        measured = [("2", Basis.FOURIER), ("3", Basis.COMPUTATIONAL)]
        return measured, ("1", "4"), _enumerate_single_stage(reg, measured)

    if kd is ProtocolKind.GHZ_SWAP_2D:
        reg = _product_register(2, [
            (canonical_ghz(2, 3), ["1", "2", "3"]),
            (canonical_ghz(2, 3), ["4", "5", "6"]),
        ])
        reg = reg.walk("2", "4", X2)
        reg = reg.walk("3", "4", H)
        measured = [("2", Basis.FOURIER), ("3", Basis.COMPUTATIONAL),
                    ("4", Basis.COMPUTATIONAL)]
        return measured, ("1", "5", "6"), _enumerate_single_stage(reg, measured)

    if kd is ProtocolKind.MERGE_METHOD_1:
        m, n, k = spec.m, spec.n, spec.k
        a, b = _a_labels(m), _b_labels(n)
        reg = _product_register(2, [
            (canonical_ghz(2, m), a), (canonical_ghz(2, n), b)])
        reg = reg.walk(a[0], b[0], X2)
        for i in range(1, k):
            reg = reg.walk(a[i], b[0], H)
        measured = [(a[i], Basis.COMPUTATIONAL) for i in range(1, k)]
        if not spec.retain_coins:
            measured = [(a[0], Basis.FOURIER)] + measured
        measured += [(b[0], Basis.COMPUTATIONAL)]
        outputs = ([a[0]] if spec.retain_coins else []) + a[k:] + b[1:]
        return measured, tuple(outputs), _enumerate_single_stage(reg, measured)

    if kd in (ProtocolKind.MERGE_METHOD_2, ProtocolKind.GHZ_PARALLEL_D):
        m, n, k = spec.m, spec.n, spec.k
        coin = X2 if kd is ProtocolKind.MERGE_METHOD_2 else I
        a, b = _a_labels(m), _b_labels(n)
        reg = _product_register(d, [
            (canonical_ghz(d, m), a), (canonical_ghz(d, n), b)])
        for i in range(k):
            reg = reg.walk(a[i], b[i], coin)
        measured = []
        if not spec.retain_coins:
            measured += [(a[i], Basis.FOURIER) for i in range(k)]
        measured += [(b[i], Basis.COMPUTATIONAL) for i in range(k)]
        outputs = (a if spec.retain_coins else a[k:]) + b[k:]
        return measured, tuple(outputs), _enumerate_single_stage(reg, measured)

    if kd is ProtocolKind.MERGE_COMBINED:
        m, n, k, l = spec.m, spec.n, spec.k, spec.l
        a, b = _a_labels(m), _b_labels(n)
        reg = _product_register(2, [
            (canonical_ghz(2, m), a), (canonical_ghz(2, n), b)])
        for i in range(l - 1):                 # method-2 part
            reg = reg.walk(a[i], b[i], X2)
        reg = reg.walk(a[l - 1], b[l - 1], X2)  # method-1 part: coins a_l..a_k
        for i in range(l, k):
            reg = reg.walk(a[i], b[l - 1], H)
        measured = ([(a[i], Basis.FOURIER) for i in range(l - 1)]
                    + [(a[l - 1], Basis.FOURIER)]
                    + [(a[i], Basis.COMPUTATIONAL) for i in range(l, k)]
                    + [(b[i], Basis.COMPUTATIONAL) for i in range(l)])
        outputs = a[k:] + b[l:]
        return measured, tuple(outputs), _enumerate_single_stage(reg, measured)

    if kd is ProtocolKind.BELL_SWAP_D:
        bm, bn, bp, bq = spec.bell_labels
        reg = _product_register(d, [
            (canonical_bell(d, bm, bn), ["1", "2"]),
            (canonical_bell(d, bp, bq), ["3", "4"]),
        ])
        reg = reg.walk("2", "3", I)
        measured = [("2", Basis.FOURIER), ("3", Basis.COMPUTATIONAL)]
        return measured, ("1", "4"), _enumerate_single_stage(reg, measured)

    if kd is ProtocolKind.GHZ_SWAP_D:
        reg = _product_register(d, [
            (canonical_ghz(d, 3), ["1", "2", "3"]),
            (canonical_ghz(d, 3), ["4", "5", "6"]),
        ])
        reg = reg.walk("2", "4", F)
        reg = reg.walk("3", "4", F)
        reg = reg.apply(fourier_inv_op(d), ["1"])
        measured = [("2", Basis.FOURIER), ("3", Basis.FOURIER),
                    ("4", Basis.COMPUTATIONAL)]
        return measured, ("1", "5", "6"), _enumerate_single_stage(reg, measured)

    if kd is ProtocolKind.GHZ_MULTI_COIN_D:
        m, n = spec.m, spec.n
        a, b = _a_labels(m), _b_labels(n)
        reg = _product_register(d, [
            (canonical_ghz(d, m), a), (canonical_ghz(d, n), b)])
        for i in range(1, m):
            reg = reg.walk(a[i], b[0], F)
        reg = reg.apply(fourier_inv_op(d), [a[0]])
        measured = ([(a[i], Basis.FOURIER) for i in range(1, m)]
                    + [(b[0], Basis.COMPUTATIONAL)])
        outputs = [a[0]] + b[1:]
        return measured, tuple(outputs), _enumerate_single_stage(reg, measured)

    if kd is ProtocolKind.GHZ_FROM_BELLS_D:
        M = spec.bells
        parts = []
        for j in range(1, M + 2):
            parts.append((canonical_bell(d, 0, 0), [str(2 * j - 1), str(2 * j)]))
        reg = _product_register(d, parts)
        pos = str(2 * M + 1)
        for j in range(1, M + 1):
            reg = reg.walk(str(2 * j), pos, F)
        measured = ([(str(2 * j), Basis.FOURIER) for j in range(1, M + 1)]
                    + [(pos, Basis.COMPUTATIONAL)])
        outputs = tuple([str(2 * j - 1) for j in range(1, M + 1)] + [str(2 * M + 2)])
        branches = []
        finv = fourier_inv_op(d)
        for vals, p, post in reg.measure(measured):
            post = post.apply(finv, [str(2 * M + 2)])
            branches.append((vals, p, post))
        return measured, outputs, branches

    if kd is ProtocolKind.TRIANGLE_MERGE_2D:
        reg = _product_register(2, [
            (canonical_ghz(2, 3), ["a", "q1", "q6"]),
            (canonical_ghz(2, 3), ["q2", "b", "q3"]),
            (canonical_ghz(2, 3), ["q4", "q5", "c"]),
        ])
        reg = reg.walk("q1", "q2", X2)
        reg = reg.walk("q3", "q4", X2)
        reg = reg.walk("q5", "q6", X2)
        measured = [("q1", Basis.FOURIER), ("q3", Basis.FOURIER),
                    ("q5", Basis.FOURIER), ("q2", Basis.COMPUTATIONAL),
                    ("q4", Basis.COMPUTATIONAL), ("q6", Basis.COMPUTATIONAL)]
        return measured, ("a", "b", "c"), _enumerate_single_stage(reg, measured)

    if kd is ProtocolKind.TRIANGLE_MERGE_D:
        reg = _product_register(d, [
            (canonical_ghz(d, 3), ["a", "q1", "q6"]),
            (canonical_ghz(d, 3), ["q2", "b", "q3"]),
            (canonical_ghz(d, 3), ["q4", "q5", "c"]),
        ])
        reg = reg.walk("q1", "q2", I)
        stage1 = [("q1", Basis.FOURIER), ("q2", Basis.COMPUTATIONAL)]
        stage2 = [("q4", Basis.FOURIER), ("q5", Basis.FOURIER),
                  ("q6", Basis.COMPUTATIONAL), ("q3", Basis.COMPUTATIONAL)]
        branches = []
        for vals1, p1, post1 in reg.measure(stage1):
            walked = post1.walk("q4", "q3", I).walk("q5", "q6", I)
            for vals2, p2, post2 in walked.measure(stage2):
                branches.append((vals1 + vals2, p1 * p2, post2))
        return stage1 + stage2, ("a", "b", "c"), branches

    raise ValueError(f"unknown protocol kind {kd}")


# ---------------------------------------------------------------------------
# Corrections per kind
# ---------------------------------------------------------------------------

def _closed_form_correction(spec: ProtocolSpec, outcome: tuple[int, ...]) -> CorrectionOp | None:
    """Outcome-driven correction where the residual has a closed form."""
    d, kd = spec.d, spec.kind

    if kd is ProtocolKind.BELL_SWAP_2D:
        return _bell_swap_2d_correction(outcome)
    if kd is ProtocolKind.GHZ_SWAP_2D:
        return _ghz_swap_2d_correction(outcome)
    if kd is ProtocolKind.MERGE_METHOD_1 and not spec.retain_coins:
        return _method1_correction(outcome, spec.m, spec.k)
    if kd is ProtocolKind.MERGE_METHOD_2 and not spec.retain_coins:
        return _method2_correction(outcome, spec.m, spec.k)

    if kd is ProtocolKind.BELL_SWAP_D:
        bm, bn, bp, bq = spec.bell_labels
        k0, u0 = outcome
        mm = (bm + bp - k0) % d
        nn = (bn + bq - u0) % d
        op = label_shift_op(d, mm, nn)
        return CorrectionOp(ops=((0, f"U[{mm},{nn}]", op),),
                            label=f"U[{mm},{nn}]@0")

    if kd is ProtocolKind.GHZ_PARALLEL_D:
        k = spec.k
        if spec.retain_coins:
            u0 = outcome[0]
            t = 0
            b_sites = range(spec.m, spec.m + spec.n - k)
        else:
            t = sum(outcome[:k]) % d
            u0 = outcome[k]
            b_sites = range(spec.m - k, spec.m - k + spec.n - k)
        return _shift_phase_correction(d, 0, {s: u0 for s in b_sites}, t)

    if kd in (ProtocolKind.GHZ_SWAP_D, ProtocolKind.GHZ_MULTI_COIN_D):
        coins, u0 = outcome[:-1], outcome[-1]
        t = coins[0] if coins else 0
        n_out = 3 if kd is ProtocolKind.GHZ_SWAP_D else spec.n
        return _shift_phase_correction(d, n_out,
                                       {s: u0 for s in range(1, n_out)}, t)

    if kd is ProtocolKind.GHZ_FROM_BELLS_D:
        M = spec.bells
        shifts = {j: outcome[j] for j in range(M)}
        return _shift_phase_correction(d, M + 1, shifts, outcome[M],
                                       phase_site=M)

    if kd is ProtocolKind.TRIANGLE_MERGE_D:
        p1, u1, p2, p3, u2, u3 = outcome
        return _shift_phase_correction(
            d, 3, {1: u1, 2: (-u2) % d}, (p1 + p2 + p3) % d)

    return None  # combined merge, triangle-2d, method-1 retain: derive from state


def _expected_outcome_len(spec: ProtocolSpec) -> int:
    kd = spec.kind
    if kd in (ProtocolKind.BELL_SWAP_2D, ProtocolKind.BELL_SWAP_D):
        return 2
    if kd in (ProtocolKind.GHZ_SWAP_2D, ProtocolKind.GHZ_SWAP_D):
        return 3
    if kd is ProtocolKind.MERGE_METHOD_1:
        return spec.k if spec.retain_coins else spec.k + 1
    if kd in (ProtocolKind.MERGE_METHOD_2, ProtocolKind.GHZ_PARALLEL_D):
        return spec.k if spec.retain_coins else 2 * spec.k
    if kd is ProtocolKind.MERGE_COMBINED:
        return spec.k + spec.l
    if kd is ProtocolKind.GHZ_MULTI_COIN_D:
        return spec.m
    if kd is ProtocolKind.GHZ_FROM_BELLS_D:
        return spec.bells + 1
    return 6  # triangle merges


def _validate_outcome(spec: ProtocolSpec, outcome: tuple[int, ...]) -> None:
    d, kd = spec.d, spec.kind
    if len(outcome) != _expected_outcome_len(spec):
        raise ValueError(f"outcome length {len(outcome)} wrong for {kd.value}")
    if any(not 0 <= v < d for v in outcome):
        raise ValueError("outcome digit out of range")
    # structural zero-probability patterns
    if kd is ProtocolKind.GHZ_SWAP_D and outcome[0] != outcome[1]:
        raise ValueError("coin results always coincide; outcome impossible")
    if kd is ProtocolKind.GHZ_MULTI_COIN_D and len(set(outcome[:-1])) > 1:
        raise ValueError("coin results always coincide; outcome impossible")
    if kd in (ProtocolKind.MERGE_METHOD_2, ProtocolKind.GHZ_PARALLEL_D):
        b_vals = outcome if spec.retain_coins else outcome[spec.k:]
        if len(set(b_vals)) > 1:
            raise ValueError("position results always coincide; outcome impossible")
    if kd is ProtocolKind.TRIANGLE_MERGE_D:
        _, u1, _, _, u2, u3 = outcome
        if (u1 + u2 - u3) % d:
            raise ValueError("position results violate u1+u2=u3; outcome impossible")


def correction_for(kind: ProtocolKind, d: int, outcome: tuple[int, ...],
                   spec: ProtocolSpec | None = None) -> CorrectionOp:
    """Correction for one protocol outcome.

    Qubit table kinds return the tabulated operator; d-dimensional kinds
    return the shift/clock correction read off the closed-form residual.
    Kinds without either (combined merge, qubit triangle merge, method-1
    coin retention) derive the correction from the simulated residual state.
    """
    spec = spec or ProtocolSpec(kind=kind, d=d)
    if spec.kind is not kind or spec.d != d:
        raise ValueError("spec disagrees with kind/d arguments")
    spec.validate()
    outcome = tuple(outcome)
    _validate_outcome(spec, outcome)
    corr = _closed_form_correction(spec, outcome)
    if corr is not None:
        return corr
    for br in run_protocol(spec).branches:
        if br.outcome == tuple(outcome):
            return br.correction
    raise ValueError(f"outcome {outcome} has zero probability for {kind.value}")


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

def run_protocol(spec: ProtocolSpec) -> ProtocolResult:
    """Execute a protocol exhaustively over all measurement branches.

    Each branch record carries the pre-correction residual over the output
    particles, the correction, and the corrected state's fidelity against the
    canonical GHZ target (the labeled Bell state check for bell-swap-d is
    reported through bell_label / label_fidelity).
    """
    spec.validate()
    d = spec.d
    measured, outputs, raw = _build_branches(spec)
    result = ProtocolResult(spec=spec,
                            measured=tuple((lab, basis) for lab, basis in measured),
                            output_labels=outputs)
    n_out = len(outputs)
    target = canonical_ghz(d, n_out)

    from .qudit import fidelity as _fid

    for vals, prob, post in raw:
        state = post.state
        corr = _closed_form_correction(spec, vals)
        if corr is None:
            corr = derive_ghz_correction(state)
        corrected = corr.apply_to(state)
        fid = _fid(corrected, target)
        bell_label = None
        label_fid = None
        if spec.kind is ProtocolKind.BELL_SWAP_D:
            bm, bn, bp, bq = spec.bell_labels
            k0, u0 = vals
            bell_label = ((bm + bp - k0) % d, (bn + bq - u0) % d)
            label_fid = _fid(state, canonical_bell(d, *bell_label))
        result.branches.append(BranchResult(
            outcome=vals, probability=prob, post=state, correction=corr,
            fidelity=fid, bell_label=bell_label, label_fidelity=label_fid))
    return result
