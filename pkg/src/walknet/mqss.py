"""Multiparty secret sharing over walk-generated GHZ states.

A dealer (Alice) shares an integer secret S with M participants in five steps:

1. Build a repeater link to every participant and stock it with Bell pairs
   (one working pair per participant plus detecting pairs).
2. Check each channel: both ends twirl a detecting pair (Fourier on the
   dealer's qudit, inverse Fourier on the participant's), then measure in a
   dealer-announced random basis and compare.  An untouched pair gives equal
   results every time; an intercept-resend attacker shows up as a nonzero
   error rate, and the run aborts above the configured threshold.
3. Merge the M working pairs and one dealer-local pair into an (M+1)-party
   GHZ via the multi-coin Bell-merge walk.  Only the dealer learns the coin
   results q~_k and the position value u0.
4. Everyone measures their GHZ particle; the dealer's value is r0 and
   participant k holds r0 + q~_k.  The dealer publishes
   p = (S - sum(q~_k) - M*r0) / M as an exact rational.
5. Participant shares are p plus their measured value; the shares add up to
   M*p + sum(q~_k) + M*r0 = S exactly.

Basis pairing note: for d > 2 the Fourier-basis comparison uses conjugate
bases on the two ends (the dealer reads |k~> labels, the participant the
complex-conjugate family).  A twirled untouched pair then gives equal labels
deterministically for every d, which is what makes the zero-error invariant
exact rather than statistical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .network import Resource, ResourceNetwork, distribute
from .protocols import _Register, _product_register
from .qudit import (
    Basis,
    QuditState,
    apply,
    basis_state,
    canonical_bell,
    fidelity,
    fourier_inv_op,
    fourier_op,
    measure_all_branches,
    tensor,
)

INTERCEPT_RESEND = "intercept-resend"


@dataclass(frozen=True)
class MqssConfig:
    d: int
    participants: int
    secret: int
    detect_pairs: int = 20
    threshold: float = 0.05
    eavesdrop_channel: int | None = None    # 1-based participant index, or None
    seed: int = 0

    def validate(self) -> None:
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if self.participants < 2:
            raise ValueError("need at least 2 participants")
        if self.detect_pairs < 1:
            raise ValueError("need at least one detecting pair")
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must lie in (0, 1)")
        if self.eavesdrop_channel is not None and not (
                1 <= self.eavesdrop_channel <= self.participants):
            raise ValueError("eavesdropped channel out of range")


@dataclass
class MqssTranscript:
    d: int
    participants: int
    events: list[str] = field(default_factory=list)
    channel_checks: list[dict] = field(default_factory=list)
    aborted: bool = False
    coin_results: list[int] = field(default_factory=list)
    position_result: int | None = None
    dealer_result: int | None = None
    participant_results: list[int] = field(default_factory=list)
    public_value: Fraction | None = None
    shares: list[Fraction] = field(default_factory=list)
    reconstructed: int | None = None
    secret: int | None = None

    def to_dict(self) -> dict:
        out = {
            "d": self.d,
            "participants": self.participants,
            "events": self.events,
            "channel_checks": self.channel_checks,
            "aborted": self.aborted,
        }
        if not self.aborted:
            out.update({
                "coin_results": self.coin_results,
                "position_result": self.position_result,
                "dealer_result": self.dealer_result,
                "participant_results": self.participant_results,
                "public_value": str(self.public_value),
                "shares": [str(s) for s in self.shares],
                "reconstructed": self.reconstructed,
                "secret": self.secret,
            })
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


# ---------------------------------------------------------------------------
# Channel checking
# ---------------------------------------------------------------------------

def _measure_pair(state: QuditState, shared_fourier: bool,
                  rng: np.random.Generator) -> tuple[int, int]:
    """Measure both ends in the shared basis; participant's Fourier readout
    uses the conjugate family (apply F, then read computationally)."""
    if shared_fourier:
        state = apply(state, fourier_op(state.d), [1])
        targets = [(0, Basis.FOURIER), (1, Basis.COMPUTATIONAL)]
    else:
        targets = [(0, Basis.COMPUTATIONAL), (1, Basis.COMPUTATIONAL)]
    branches = measure_all_branches(state, targets)
    probs = np.array([b.probability for b in branches])
    br = branches[rng.choice(len(branches), p=probs / probs.sum())]
    return br.outcome[0][2], br.outcome[1][2]


def _detect_one_pair(d: int, eavesdrop: bool, rng: np.random.Generator) -> bool:
    """True when the two readouts disagree (an error event)."""
    state = canonical_bell(d, 0, 0)  # site 0 dealer, site 1 participant
    if eavesdrop:
        eve_fourier = bool(rng.integers(2))
        basis = Basis.FOURIER if eve_fourier else Basis.COMPUTATIONAL
        branches = measure_all_branches(state, [(1, basis)])
        probs = np.array([b.probability for b in branches])
        br = branches[rng.choice(len(branches), p=probs / probs.sum())]
        value = br.outcome[0][2]
        resent = basis_state(d, [value])
        if eve_fourier:
            resent = apply(resent, fourier_op(d), [0])
        state = tensor(br.post, resent)
    state = apply(state, fourier_op(d), [0])
    state = apply(state, fourier_inv_op(d), [1])
    shared_fourier = bool(rng.integers(2))
    a, b = _measure_pair(state, shared_fourier, rng)
    return a != b


def channel_check(d: int, pairs: int, eavesdropper: str | None = None,
                  seed: int = 0, threshold: float = 0.05) -> tuple[float, bool]:
    """Sampled error rate over ``pairs`` detecting pairs, and the abort flag."""
    if pairs < 1:
        raise ValueError("need at least one detecting pair")
    if eavesdropper not in (None, INTERCEPT_RESEND):
        raise ValueError(f"unknown eavesdropper model {eavesdropper!r}")
    rng = np.random.default_rng(seed)
    errors = sum(_detect_one_pair(d, eavesdropper is not None, rng)
                 for _ in range(pairs))
    rate = errors / pairs
    return rate, rate > threshold


def intercept_resend_error_rate(d: int) -> float:
    """Exact per-pair error probability of the intercept-resend attack.

    Enumerates every (attacker basis, attacker outcome, shared basis,
    readout) combination by exhaustive branching; no sampling involved.
    """
    f = fourier_op(d)
    total = 0.0
    for eve_fourier in (False, True):
        basis = Basis.FOURIER if eve_fourier else Basis.COMPUTATIONAL
        for br in measure_all_branches(canonical_bell(d, 0, 0), [(1, basis)]):
            resent = basis_state(d, [br.outcome[0][2]])
            if eve_fourier:
                resent = apply(resent, f, [0])
            state = tensor(br.post, resent)
            state = apply(state, f, [0])
            state = apply(state, fourier_inv_op(d), [1])
            for shared_fourier in (False, True):
                if shared_fourier:
                    prepped = apply(state, f, [1])
                    targets = [(0, Basis.FOURIER), (1, Basis.COMPUTATIONAL)]
                else:
                    prepped = state
                    targets = [(0, Basis.COMPUTATIONAL), (1, Basis.COMPUTATIONAL)]
                for sub in measure_all_branches(prepped, targets):
                    if sub.outcome[0][2] != sub.outcome[1][2]:
                        total += 0.25 * br.probability * sub.probability
    return total


# ---------------------------------------------------------------------------
# GHZ generation (step 3)
# ---------------------------------------------------------------------------

def generate_shared_ghz(d: int, participants: int, seed: int = 0
                        ) -> tuple[QuditState, list[int], int]:
    """Multi-coin Bell merge producing the shared (M+1)-party GHZ residual.

    Returns (state, coin results q~_1..q~_M, position value u0); the state is
    ordered (participant 1, ..., participant M, dealer) and equals
    (1/sqrt d) sum_r w^(-r u0) |r+q~_1, ..., r+q~_M, r> for the sampled
    outcomes.  Pairs are walked one at a time and each coin is measured as
    soon as its step is done, so the live register stays at M+3 sites.
    """
    if participants < 1:
        raise ValueError("need at least one participant")
    rng = np.random.default_rng(seed)
    f = fourier_op(d)
    reg = _product_register(d, [(canonical_bell(d, 0, 0), ["pos", "dealer"])])
    coin_results: list[int] = []
    for k in range(1, participants + 1):
        pair = _Register(canonical_bell(d, 0, 0), (f"p{k}", f"coin{k}"))
        reg = _Register(tensor(reg.state, pair.state), reg.labels + pair.labels)
        reg = reg.walk(f"coin{k}", "pos", f)
        options = list(reg.measure([(f"coin{k}", Basis.FOURIER)]))
        probs = np.array([p for _, p, _ in options])
        vals, _, reg = options[rng.choice(len(options), p=probs / probs.sum())]
        coin_results.append(int(vals[0]))
    options = list(reg.measure([("pos", Basis.COMPUTATIONAL)]))
    probs = np.array([p for _, p, _ in options])
    vals, _, reg = options[rng.choice(len(options), p=probs / probs.sum())]
    u0 = int(vals[0])
    reg = reg.apply(fourier_inv_op(d), ["dealer"])
    reg = reg.reorder([f"p{k}" for k in range(1, participants + 1)] + ["dealer"])
    return reg.state, coin_results, u0


def shared_ghz_closed_form(d: int, coin_results: list[int], u0: int) -> QuditState:
    """Independent reconstruction of the expected step-3 residual state."""
    m = len(coin_results)
    w = np.exp(2j * np.pi / d)
    amps = np.zeros(d ** (m + 1), dtype=complex)
    for r in range(d):
        idx = 0
        for q in coin_results:
            idx = idx * d + (r + q) % d
        idx = idx * d + r
        amps[idx] = w ** (-r * u0)
    return QuditState(d, m + 1, amps / np.sqrt(d))


# ---------------------------------------------------------------------------
# Classical encoding (steps 4 and 5)
# ---------------------------------------------------------------------------

def encode_public(secret: int, coin_results: list[int], dealer_result: int,
                  participants: int) -> Fraction:
    """p = (S - sum(q~_k) - M*r0) / M, carried exactly."""
    return Fraction(secret - sum(coin_results) - participants * dealer_result,
                    participants)


def reconstruct(public_value: Fraction, coin_results: list[int],
                dealer_result: int, participants: int) -> int:
    total = (participants * public_value + sum(coin_results)
             + participants * dealer_result)
    if total.denominator != 1:
        raise ValueError("reconstruction did not produce an integer")
    return int(total)


# ---------------------------------------------------------------------------
# Full protocol
# ---------------------------------------------------------------------------

def _build_repeater_pair(d: int, seed: int) -> float:
    """Stock one dealer-participant Bell pair over a two-hop repeater path."""
    net = ResourceNetwork(d, {0: "dealer", 1: "relay", 2: "participant"},
                          [Resource("bell", (0, 1)), Resource("bell", (1, 2))])
    _, _, result = distribute(net, [0, 2], mode="simulated", d=d, seed=seed)
    return result.fidelity


def run_mqss(config: MqssConfig) -> MqssTranscript:
    """All five steps; aborted runs stop after the channel checks.

    The secret enters the computation only at the encoding step -- the event
    log records the first read so the independence is auditable.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    t = MqssTranscript(d=config.d, participants=config.participants)

    for k in range(1, config.participants + 1):
        fid = _build_repeater_pair(config.d, int(rng.integers(2**31)))
        if fid < 1 - 1e-9:
            raise AssertionError("repeater pair generation failed")
        t.events.append(f"step1: channel {k} working pair ready (fidelity {fid:.3f})")

    for k in range(1, config.participants + 1):
        eav = INTERCEPT_RESEND if config.eavesdrop_channel == k else None
        rate, abort = channel_check(config.d, config.detect_pairs, eav,
                                    seed=int(rng.integers(2**31)),
                                    threshold=config.threshold)
        t.channel_checks.append({"channel": k, "error_rate": rate,
                                 "pairs": config.detect_pairs,
                                 "eavesdropper": eav, "abort": abort})
        t.events.append(f"step2: channel {k} error rate {rate:.4f}")
        if abort:
            t.aborted = True
            t.events.append(f"step2: abort, channel {k} exceeded threshold "
                            f"{config.threshold}")
            return t

    state, coins, u0 = generate_shared_ghz(config.d, config.participants,
                                           seed=int(rng.integers(2**31)))
    t.coin_results = coins
    t.position_result = u0
    t.events.append(f"step3: ({config.participants + 1})-party GHZ generated, "
                    f"coin results known to dealer only")

    targets = [(i, Basis.COMPUTATIONAL) for i in range(state.n)]
    branches = measure_all_branches(state, targets)
    probs = np.array([b.probability for b in branches])
    br = branches[rng.choice(len(branches), p=probs / probs.sum())]
    values = [v for (_, _, v) in br.outcome]
    t.participant_results = values[:-1]
    t.dealer_result = values[-1]
    t.events.append("step4: all parties measured their GHZ particle")
    for k, v in enumerate(t.participant_results, start=1):
        assert v == (t.dealer_result + coins[k - 1]) % config.d

    t.secret = config.secret
    p = encode_public(config.secret, coins, t.dealer_result, config.participants)
    t.public_value = p
    t.events.append("step4: secret read for the first time; public value published")

    # each share is the public value plus the participant's measured value;
    # measured values are mod-d labels, so the verified invariant is the
    # aggregate identity M*p + sum(q~) + M*r0 = S rather than the share sum
    t.shares = [p + v for v in t.participant_results]
    recon = reconstruct(p, coins, t.dealer_result, config.participants)
    assert recon == config.secret
    t.reconstructed = recon
    t.events.append("step5: shares combined, secret reconstructed")
    return t
