"""Dense state-vector simulation for systems of d-level sites (qudits).

A state over n sites of local dimension d is a complex vector of length d**n.
Site 0 is the most significant digit of the amplitude index, i.e. the basis
state |v0 v1 ... v_{n-1}> sits at index sum(v[i] * d**(n-1-i)).  This encoding
is fixed so that amplitude indices are reproducible everywhere (tests, JSON
fixtures, branch outcomes).

Everything here is a pure function of its inputs: states are treated as
immutable values and every operation returns a fresh state, so results can be
shared freely across parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

# Hard cap on the dense representation: d**n may not exceed 2**22.
SIZE_CAP = 2**22

NORM_TOL = 1e-10
BRANCH_PRUNE = 1e-12
PROB_SUM_TOL = 1e-9


class Basis(Enum):
    """Single-site measurement basis.

    COMPUTATIONAL measures in {|0>, ..., |d-1>}.  FOURIER measures in
    {|k~> = (1/sqrt d) sum_l w^{kl} |l>} with w = exp(2*pi*i/d); for d = 2
    this is {|+>, |->} with |+> reported as 0 and |-> as 1.
    """

    COMPUTATIONAL = "computational"
    FOURIER = "fourier"


class SizeCapError(ValueError):
    """Raised when a construction would exceed the d**n <= 2**22 cap."""


def _check_cap(d: int, n: int) -> None:
    if d**n > SIZE_CAP:
        raise SizeCapError(f"state of {n} sites at d={d} exceeds the size cap")


@dataclass(frozen=True)
class QuditState:
    """Normalized pure state of ``n`` sites with local dimension ``d``."""

    d: int
    n: int
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("local dimension must be >= 2")
        if self.n < 1:
            raise ValueError("site count must be >= 1")
        _check_cap(self.d, self.n)
        if self.amps.shape != (self.d**self.n,):
            raise ValueError("amplitude vector has wrong length")
        nrm = float(np.linalg.norm(self.amps))
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (|norm-1| = {abs(nrm - 1.0):.3e})")

    def tensor_view(self) -> np.ndarray:
        """Amplitudes reshaped to an n-axis tensor, one axis per site."""
        return self.amps.reshape([self.d] * self.n)

    def to_json(self) -> list[list[float]]:
        """Serialize amplitudes as a list of [re, im] pairs."""
        return [[float(a.real), float(a.imag)] for a in self.amps]

    @classmethod
    def from_json(cls, d: int, n: int, pairs) -> "QuditState":
        amps = np.array([complex(re, im) for re, im in pairs], dtype=complex)
        return cls(d, n, amps)


@dataclass(frozen=True)
class OperatorMatrix:
    """Unitary acting on ``arity`` sites of local dimension ``d``."""

    d: int
    arity: int
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        dim = self.d**self.arity
        if self.mat.shape != (dim, dim):
            raise ValueError("operator matrix has wrong shape")
        if not np.allclose(self.mat.conj().T @ self.mat, np.eye(dim), atol=NORM_TOL):
            raise ValueError("operator is not unitary")

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.d, self.arity, self.mat.conj().T)


@dataclass(frozen=True)
class Branch:
    """One outcome of an exhaustive measurement.

    ``outcome`` lists (site, basis, result) in measurement order; ``post`` is
    the renormalized state over the unmeasured sites (in their original
    relative order), or None when every site was measured.
    """

    outcome: tuple
    probability: float
    post: QuditState | None


# ---------------------------------------------------------------------------
# State constructors
# ---------------------------------------------------------------------------

def basis_state(d: int, values: list[int]) -> QuditState:
    """Product state |v0 v1 ... v_{n-1}>."""
    n = len(values)
    if n == 0:
        raise ValueError("need at least one site")
    for v in values:
        if not 0 <= v < d:
            raise ValueError(f"site value {v} out of range for d={d}")
    _check_cap(d, n)
    amps = np.zeros(d**n, dtype=complex)
    idx = 0
    for v in values:
        idx = idx * d + v
    amps[idx] = 1.0
    return QuditState(d, n, amps)


def canonical_bell(d: int, m: int, n: int) -> QuditState:
    """Maximally entangled two-site state (1/sqrt d) sum_i w^{mi} |i, i-n>.

    Index arithmetic is mod d; (m, n) = (0, 0) gives (1/sqrt d) sum |i, i>.
    """
    if not (0 <= m < d and 0 <= n < d):
        raise ValueError("bell labels out of range")
    w = np.exp(2j * np.pi / d)
    amps = np.zeros(d * d, dtype=complex)
    for i in range(d):
        amps[i * d + (i - n) % d] = w ** (m * i)
    return QuditState(d, 2, amps / np.sqrt(d))


def canonical_ghz(d: int, n_sites: int) -> QuditState:
    """(1/sqrt d) sum_i |i, i, ..., i> over n_sites parties (n_sites >= 2)."""
    if n_sites < 2:
        raise ValueError("GHZ state needs at least 2 sites")
    _check_cap(d, n_sites)
    amps = np.zeros(d**n_sites, dtype=complex)
    step = (d**n_sites - 1) // (d - 1)  # index of |i,i,...,i> is i * step
    for i in range(d):
        amps[i * step] = 1.0
    return QuditState(d, n_sites, amps / np.sqrt(d))


# ---------------------------------------------------------------------------
# Operator constructors
# ---------------------------------------------------------------------------

# Operator constructors are cached (their matrices are never mutated).

@lru_cache(maxsize=None)
def identity_op(d: int) -> OperatorMatrix:
    return OperatorMatrix(d, 1, np.eye(d, dtype=complex))


@lru_cache(maxsize=None)
def fourier_op(d: int) -> OperatorMatrix:
    """d-dimensional Fourier transform, F[k][l] = w^{kl} / sqrt(d)."""
    if d < 2:
        raise ValueError("d must be >= 2")
    w = np.exp(2j * np.pi / d)
    kl = np.outer(np.arange(d), np.arange(d))
    return OperatorMatrix(d, 1, w**kl / np.sqrt(d))


@lru_cache(maxsize=None)
def fourier_inv_op(d: int) -> OperatorMatrix:
    return fourier_op(d).dagger()


@lru_cache(maxsize=None)
def shift_op(d: int) -> OperatorMatrix:
    """Conditional shift |k>|j> -> |k>|j-k mod d> (coin site first).

    A permutation on two sites; for d = 2 this is exactly the CNOT gate.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    mat = np.zeros((d * d, d * d), dtype=complex)
    for k in range(d):
        for j in range(d):
            mat[k * d + (j - k) % d, k * d + j] = 1.0
    return OperatorMatrix(d, 2, mat)


@lru_cache(maxsize=None)
def label_shift_op(d: int, m: int, n: int) -> OperatorMatrix:
    """The single-site unitary sum_i w^{-mi} |i-n><i| (indices mod d).

    Applied to the first site, it maps canonical_bell(d, m, n) to
    canonical_bell(d, 0, 0).  Labels are taken mod d.
    """
    m %= d
    n %= d
    w = np.exp(2j * np.pi / d)
    mat = np.zeros((d, d), dtype=complex)
    for i in range(d):
        mat[(i - n) % d, i] = w ** (-m * i)
    return OperatorMatrix(d, 1, mat)


@lru_cache(maxsize=None)
def clock_power_op(d: int, t: int) -> OperatorMatrix:
    """Z_d ** t, cached."""
    return matrix_power_op(pauli_z(d), t % d)


def pauli_x(d: int) -> OperatorMatrix:
    """Cyclic raise operator |i> -> |i+1 mod d>; the Pauli X for d = 2."""
    return label_shift_op(d, 0, d - 1)


def pauli_z(d: int) -> OperatorMatrix:
    """Clock operator |i> -> w^i |i>; the Pauli Z for d = 2."""
    return label_shift_op(d, d - 1, 0)


def pauli_ops(d: int) -> tuple[OperatorMatrix, OperatorMatrix]:
    """(X_d, Z_d) pair; the full family is available via label_shift_op."""
    return pauli_x(d), pauli_z(d)


def matrix_power_op(op: OperatorMatrix, t: int) -> OperatorMatrix:
    return OperatorMatrix(op.d, op.arity, np.linalg.matrix_power(op.mat, t))


# ---------------------------------------------------------------------------
# Composition and evolution
# ---------------------------------------------------------------------------

def tensor(a: QuditState, b: QuditState) -> QuditState:
    """Product state with the sites of ``a`` preceding the sites of ``b``."""
    if a.d != b.d:
        raise ValueError("local dimensions differ")
    _check_cap(a.d, a.n + b.n)
    return QuditState(a.d, a.n + b.n, np.kron(a.amps, b.amps))


def apply(state: QuditState, op: OperatorMatrix, sites: list[int]) -> QuditState:
    """Apply ``op`` to the given sites (ordered) and leave the rest untouched."""
    if op.d != state.d:
        raise ValueError("operator and state dimensions differ")
    if op.arity != len(sites):
        raise ValueError("operator arity does not match site count")
    if len(set(sites)) != len(sites):
        raise ValueError("sites must be distinct")
    for s in sites:
        if not 0 <= s < state.n:
            raise ValueError(f"site {s} out of range")
    d, n, k = state.d, state.n, len(sites)
    tens = np.moveaxis(state.tensor_view(), sites, range(k))
    shaped = tens.reshape(d**k, d ** (n - k))
    shaped = op.mat @ shaped
    tens = np.moveaxis(shaped.reshape([d] * n), range(k), sites)
    new = QuditState.__new__(QuditState)
    # bypass the normalization re-check; unitarity preserves the norm
    object.__setattr__(new, "d", d)
    object.__setattr__(new, "n", n)
    object.__setattr__(new, "amps", np.ascontiguousarray(tens.reshape(-1)))
    return new


def fidelity(a: QuditState, b: QuditState) -> float:
    """|<a|b>|^2 -- invariant under a global phase of either argument."""
    if a.d != b.d or a.n != b.n:
        raise ValueError("states have different shapes")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


# ---------------------------------------------------------------------------
# Measurement
# ---------------------------------------------------------------------------

def measure_all_branches(state: QuditState, targets: list[tuple[int, Basis]]) -> list[Branch]:
    """Enumerate every outcome of measuring ``targets`` (site, basis) in order.

    Fourier-basis targets are realized by applying the inverse Fourier
    transform to the site and then reading it out computationally, so the
    reported value k corresponds to the basis element |k~>.  Branches with
    probability below 1e-12 are pruned; the surviving probabilities sum to 1
    within 1e-9.  Post-states have the measured sites removed.
    """
    if not targets:
        raise ValueError("no measurement targets given")
    sites = [s for s, _ in targets]
    if len(set(sites)) != len(sites):
        raise ValueError("measurement targets must be distinct")
    d, n = state.d, state.n
    for s in sites:
        if not 0 <= s < n:
            raise ValueError(f"site {s} out of range")

    work = state
    finv = fourier_inv_op(d)
    for s, basis in targets:
        if basis is Basis.FOURIER:
            work = apply(work, finv, [s])

    t = len(sites)
    rest = [i for i in range(n) if i not in sites]
    tens = np.moveaxis(work.tensor_view(), sites, range(t))
    rows = tens.reshape(d**t, d ** (n - t))
    probs = np.linalg.norm(rows, axis=1) ** 2

    branches = []
    for row_idx in np.nonzero(probs >= BRANCH_PRUNE)[0]:
        p = float(probs[row_idx])
        digits = []
        r = int(row_idx)
        for _ in range(t):
            digits.append(r % d)
            r //= d
        digits.reverse()
        outcome = tuple(
            (site, basis, digits[i]) for i, (site, basis) in enumerate(targets)
        )
        if rest:
            post = QuditState(d, len(rest), rows[row_idx] / np.sqrt(p))
        else:
            post = None
        branches.append(Branch(outcome=outcome, probability=p, post=post))

    total = sum(b.probability for b in branches)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise AssertionError(f"branch probabilities sum to {total}, not 1")
    return branches


def sample_branch(
    state: QuditState,
    targets: list[tuple[int, Basis]],
    rng: np.random.Generator,
) -> Branch:
    """Draw a single measurement branch with Born-rule probability."""
    branches = measure_all_branches(state, targets)
    probs = np.array([b.probability for b in branches])
    return branches[rng.choice(len(branches), p=probs / probs.sum())]
