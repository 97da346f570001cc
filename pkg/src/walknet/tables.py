"""Reference outcome/correction tables for the qubit protocols, plus a checker.

Six numbered tables pin down, row by row, the residual state left on the
output particles for each measurement outcome and the local correction that
recovers the canonical target:

  1  bell-swap-2d outcomes (particles 2,3), outputs (1,4)
  2  ghz-swap-2d outcomes (particles 2,3,4), outputs (1,5,6)
  3  merge-method-1, symbolic in the coin results x2..xk via y = sum(x) mod 2
  4  merge-method-2, symbolic via N = sum(x) mod 2
  5  ghz-swap-d at d=2 (outcomes with unequal coin results never occur)
  6  ghz-from-bells-d with two coin pairs at d=2, laid out on a six-qubit row
     q0..q5 with Bell pairs (q0,q1),(q2,q3),(q4,q5): the coins are q1 and q4,
     the shared position is q2, and the inverse Fourier lands on q3, so the
     outputs are (q0,q3,q5) and the outcome order is (q1,q2,q4)

Table 4 note: the conventional two-row layout of this table pairs its
correction entries the other way around, putting the flip-free entry next to
the branch whose residual actually needs the X flips (no single-site phase
can take a |0..01..1>-type state to the GHZ target).  The fixture stores both
pairings; verify_table checks the one the residual states force and reports
the transposition in its notes instead of failing.

verify_table simulates the owning protocol and checks every row twice: the
pre-correction residual against the listed state, and the listed correction
against the canonical target, both by phase-invariant fidelity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .protocols import (
    FIDELITY_TOL,
    ProtocolKind,
    ProtocolSpec,
    _op_product,
    _product_register,
    outcome_parity,
    run_protocol,
)
from .qudit import (
    Basis,
    QuditState,
    canonical_bell,
    canonical_ghz,
    fidelity,
    fourier_op,
)

TABLE_IDS = (1, 2, 3, 4, 5, 6)


def _ket_state(terms: list[tuple[float, str]]) -> QuditState:
    n = len(terms[0][1])
    amps = np.zeros(2**n, dtype=complex)
    for coeff, bits in terms:
        amps[int(bits, 2)] = coeff
    return QuditState(2, n, amps / np.linalg.norm(amps))


@dataclass
class RowReport:
    outcome: tuple[int, ...]
    listed_correction: str
    state_fidelity: float
    corrected_fidelity: float
    probability: float
    params: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (self.state_fidelity >= 1 - FIDELITY_TOL
                and self.corrected_fidelity >= 1 - FIDELITY_TOL)


@dataclass
class TableReport:
    table_id: int
    rows: list[RowReport] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "table": self.table_id,
            "rows_checked": len(self.rows),
            "rows_ok": sum(r.ok for r in self.rows),
            "all_ok": self.all_ok,
            "notes": self.notes,
            "rows": [
                {
                    "outcome": "".join(map(str, r.outcome)),
                    "correction": r.listed_correction,
                    "state_fidelity": r.state_fidelity,
                    "corrected_fidelity": r.corrected_fidelity,
                    "ok": r.ok,
                    **({"params": r.params} if r.params else {}),
                }
                for r in self.rows
            ],
        }


# (outcome) -> (state terms over outputs, [(site, op)...], sign, label)
TABLE_1 = {
    (0, 0): ([(1, "01"), (1, "10")], [(0, "X")], +1, "X1"),
    (0, 1): ([(1, "00"), (1, "11")], [], +1, "I1"),
    (1, 0): ([(1, "10"), (-1, "01")], [(0, "X"), (0, "Z")], +1, "Z1X1"),
    (1, 1): ([(1, "11"), (-1, "00")], [(0, "Z")], -1, "-Z1"),
}

TABLE_2 = {
    (0, 0, 0): ([(1, "011"), (1, "100")], [(0, "X")], +1, "X1"),
    (0, 0, 1): ([(1, "000"), (1, "111")], [], +1, "I1"),
    (0, 1, 0): ([(1, "000"), (-1, "111")], [(0, "Z")], +1, "Z1"),
    (0, 1, 1): ([(1, "011"), (-1, "100")], [(0, "Z"), (0, "X")], +1, "X1Z1"),
    (1, 0, 0): ([(-1, "011"), (1, "100")], [(0, "X"), (0, "Z")], +1, "Z1X1"),
    (1, 0, 1): ([(-1, "000"), (1, "111")], [(0, "Z")], -1, "-Z1"),
    (1, 1, 0): ([(-1, "000"), (-1, "111")], [], -1, "-I1"),
    (1, 1, 1): ([(-1, "011"), (-1, "100")], [(0, "X")], -1, "-X1"),
}

TABLE_5 = {
    (0, 0, 0): ([(1, "000"), (1, "111")], [], +1, "I1"),
    (0, 0, 1): ([(1, "011"), (1, "100")], [(0, "X")], +1, "X1"),
    (1, 1, 0): ([(1, "000"), (-1, "111")], [(0, "Z")], +1, "Z1"),
    (1, 1, 1): ([(1, "011"), (-1, "100")], [(0, "Z"), (0, "X")], +1, "X1Z1"),
}

# outputs ordered (q0, q3, q5) = particles (1, 4, 6)
TABLE_6 = {
    (0, 0, 0): ([(1, "000"), (1, "111")], [], +1, "I1"),
    (0, 0, 1): ([(1, "001"), (1, "110")], [(2, "X")], +1, "X6"),
    (0, 1, 0): ([(1, "000"), (-1, "111")], [(0, "Z")], +1, "Z1"),
    (0, 1, 1): ([(1, "001"), (-1, "110")], [(2, "X"), (2, "Z")], +1, "Z6X6"),
    (1, 0, 0): ([(1, "011"), (1, "100")], [(0, "X")], +1, "X1"),
    (1, 0, 1): ([(1, "010"), (1, "101")], [(1, "X")], +1, "X4"),
    (1, 1, 0): ([(-1, "011"), (1, "100")], [(0, "X"), (0, "Z")], +1, "Z1X1"),
    (1, 1, 1): ([(-1, "010"), (1, "101")], [(1, "Z"), (1, "X")], +1, "X4Z4"),
}

# Default parameter sets at which the symbolic tables 3 and 4 are expanded.
TABLE_3_PARAMS = ((3, 3, 2), (4, 4, 3), (5, 3, 2))
TABLE_4_PARAMS = ((3, 3, 2), (4, 4, 3), (4, 3, 2))


def _table3_row(m: int, n: int, k: int, outcome: tuple[int, ...]):
    a1, xs, b1 = outcome[0], outcome[1:-1], outcome[-1]
    y = outcome_parity(xs)
    sgn_y = -1 if y else 1
    flip_block = "0" * (m - k) + "1" * (n - 1)
    same_block = "0" * (m - k) + "0" * (n - 1)
    flips = [(j, "X") for j in range(m - k)]
    zy = [(0, "Z")] if y else []
    zy1 = [(0, "Z")] if (y + 1) % 2 else []
    if a1 == 0 and b1 == y:
        return ([(1, flip_block), (sgn_y, _invert(flip_block))], flips + zy, +1,
                "X(k+1..m)Z^y")
    if a1 == 0 and b1 != y:
        return ([(1, same_block), (sgn_y, _invert(same_block))], zy, +1, "Z^y")
    if a1 == 1 and b1 == y:
        return ([(-1, flip_block), (sgn_y, _invert(flip_block))], flips + zy1, -1,
                "-X(k+1..m)Z^(y+1)")
    return ([(-1, same_block), (sgn_y, _invert(same_block))], zy1, -1, "-Z^(y+1)")


def _invert(bits: str) -> str:
    return "".join("1" if c == "0" else "0" for c in bits)


def _table4_row(m: int, n: int, k: int, outcome: tuple[int, ...]):
    xs, b = outcome[:k], outcome[-1]
    nn = outcome_parity(xs)
    sgn = -1 if nn else 1
    z = [(0, "Z")] if nn else []
    flips = [(j, "X") for j in range(m - k)]
    if b == 0:
        terms = [(sgn, "0" * (m - k) + "1" * (n - k)), (1, "1" * (m - k) + "0" * (n - k))]
        return terms, flips + z, sgn, "X(k+1..m)(-Z)^N", "(-Z)^N"
    terms = [(sgn, "0" * (m + n - 2 * k)), (1, "1" * (m + n - 2 * k))]
    return terms, z, sgn, "(-Z)^N", "X(k+1..m)(-Z)^N"


def _check_rows(report, result, rows, target, params=None):
    seen = set()
    for br in result.branches:
        entry = rows.get(br.outcome)
        if entry is None:
            report.notes.append(
                f"unlisted outcome {br.outcome} with probability {br.probability:.3g}")
            continue
        seen.add(br.outcome)
        terms, site_ops, sign, label = entry
        listed = _ket_state(terms)
        corr = _op_product(2, site_ops, sign)
        report.rows.append(RowReport(
            outcome=br.outcome,
            listed_correction=label,
            state_fidelity=fidelity(br.post, listed),
            corrected_fidelity=fidelity(corr.apply_to(br.post), target),
            probability=br.probability,
            params=params or {},
        ))
    for outcome in rows:
        if outcome not in seen:
            report.notes.append(f"listed outcome {outcome} never occurred")
            report.rows.append(RowReport(outcome, rows[outcome][3], 0.0, 0.0, 0.0,
                                         params or {}))


def _verify_table_6() -> TableReport:
    report = TableReport(6)
    h = fourier_op(2)
    reg = _product_register(2, [
        (canonical_bell(2, 0, 0), ["q0", "q1"]),
        (canonical_bell(2, 0, 0), ["q2", "q3"]),
        (canonical_bell(2, 0, 0), ["q4", "q5"]),
    ])
    reg = reg.walk("q1", "q2", h)
    reg = reg.walk("q4", "q2", h)
    measured = [("q1", Basis.FOURIER), ("q2", Basis.COMPUTATIONAL),
                ("q4", Basis.FOURIER)]
    target = canonical_ghz(2, 3)
    for vals, prob, post in reg.measure(measured):
        post = post.apply(h.dagger(), ["q3"])
        entry = TABLE_6.get(vals)
        if entry is None:
            report.notes.append(f"unlisted outcome {vals} with probability {prob:.3g}")
            continue
        terms, site_ops, sign, label = entry
        corr = _op_product(2, site_ops, sign)
        report.rows.append(RowReport(
            outcome=vals,
            listed_correction=label,
            state_fidelity=fidelity(post.state, _ket_state(terms)),
            corrected_fidelity=fidelity(corr.apply_to(post.state), target),
            probability=prob,
        ))
    return report


def verify_table(table_id: int) -> TableReport:
    """Simulate the protocol behind one reference table and check every row.

    Mismatches land in the report (rows with ok=False plus notes); the call
    itself never raises on content.
    """
    if table_id == 1:
        report = TableReport(1)
        result = run_protocol(ProtocolSpec(ProtocolKind.BELL_SWAP_2D))
        _check_rows(report, result, TABLE_1, canonical_bell(2, 0, 0))
        return report

    if table_id == 2:
        report = TableReport(2)
        result = run_protocol(ProtocolSpec(ProtocolKind.GHZ_SWAP_2D))
        _check_rows(report, result, TABLE_2, canonical_ghz(2, 3))
        return report

    if table_id == 3:
        report = TableReport(3)
        for m, n, k in TABLE_3_PARAMS:
            result = run_protocol(ProtocolSpec(ProtocolKind.MERGE_METHOD_1, m=m, n=n, k=k))
            rows = {br.outcome: _table3_row(m, n, k, br.outcome)
                    for br in result.branches}
            _check_rows(report, result, rows, canonical_ghz(2, m + n - k - 1),
                        params={"m": m, "n": n, "k": k})
        return report

    if table_id == 4:
        report = TableReport(4)
        report.notes.append(
            "correction column entries verified with their row association "
            "transposed relative to the conventional layout (see module docstring)")
        for m, n, k in TABLE_4_PARAMS:
            result = run_protocol(ProtocolSpec(ProtocolKind.MERGE_METHOD_2, m=m, n=n, k=k))
            rows = {}
            for br in result.branches:
                terms, ops, sign, label, conventional = _table4_row(m, n, k, br.outcome)
                rows[br.outcome] = (terms, ops, sign, f"{label} (conventional: {conventional})")
            _check_rows(report, result, rows, canonical_ghz(2, m + n - 2 * k),
                        params={"m": m, "n": n, "k": k})
        return report

    if table_id == 5:
        report = TableReport(5)
        result = run_protocol(ProtocolSpec(ProtocolKind.GHZ_SWAP_D, d=2))
        _check_rows(report, result, TABLE_5, canonical_ghz(2, 3))
        return report

    if table_id == 6:
        return _verify_table_6()

    raise ValueError(f"no table {table_id}")


def verify_all_tables() -> dict[int, TableReport]:
    return {tid: verify_table(tid) for tid in TABLE_IDS}
