"""Walk the protocol catalog: swaps, merges, and their derived corrections.

Run:  python demos/02_swap_protocols.py
"""

from walknet import ProtocolKind, ProtocolSpec, run_protocol


def show(result, max_rows=None):
    spec = result.spec
    print(f"\n== {spec.kind.value} (d={spec.d}) ==")
    print(f"measured {[lab for lab, _ in result.measured]} -> outputs {list(result.output_labels)}")
    rows = result.branches if max_rows is None else result.branches[:max_rows]
    for b in rows:
        values = "".join(str(v) for v in b.outcome)
        print(f"  outcome {values}  p={b.probability:.4f}  correction {b.correction.label:<14}"
              f" fidelity {b.fidelity:.12f}")
    if max_rows is not None and len(result.branches) > max_rows:
        print(f"  ... {len(result.branches) - max_rows} more branches, all recovered")
    print(f"all branches recover the canonical target: {result.all_recovered()}")


# the four-particle Bell swap and the six-particle GHZ swap
show(run_protocol(ProtocolSpec(ProtocolKind.BELL_SWAP_2D)))
show(run_protocol(ProtocolSpec(ProtocolKind.GHZ_SWAP_2D)))

# generalized Bell swap: the output labels follow the closed-form arithmetic
res = run_protocol(ProtocolSpec(ProtocolKind.BELL_SWAP_D, d=3, bell_labels=(1, 2, 2, 1)))
print(f"\n== {res.spec.kind.value} d=3, input labels (1,2) and (2,1) ==")
for b in res.branches:
    print(f"  outcome {b.outcome} -> output Bell label {b.bell_label} "
          f"(label fidelity {b.label_fidelity:.9f})")

# merging GHZ states of different sizes
show(run_protocol(ProtocolSpec(ProtocolKind.MERGE_METHOD_1, m=4, n=3, k=2)), max_rows=4)
show(run_protocol(ProtocolSpec(ProtocolKind.MERGE_METHOD_2, m=3, n=3, k=2)), max_rows=4)
show(run_protocol(ProtocolSpec(ProtocolKind.MERGE_COMBINED, m=5, n=5, k=3, l=2)), max_rows=4)

# keeping the coin sites in the output
res = run_protocol(ProtocolSpec(ProtocolKind.MERGE_METHOD_1, m=3, n=3, k=2, retain_coins=True))
print(f"\nretained-coin variant outputs {list(res.output_labels)}; "
      f"all recovered: {res.all_recovered()}")

# a qutrit GHZ built from three Bell pairs
show(run_protocol(ProtocolSpec(ProtocolKind.GHZ_FROM_BELLS_D, d=3, bells=2)), max_rows=5)

# the triangle merge and its position-value constraint
res = run_protocol(ProtocolSpec(ProtocolKind.TRIANGLE_MERGE_D, d=3))
print(f"\n== {res.spec.kind.value} d=3 ==")
ok = all((b.outcome[1] + b.outcome[4]) % 3 == b.outcome[5] for b in res.branches)
print(f"u1 + u2 = u3 (mod 3) on every branch: {ok}; "
      f"branches {len(res.branches)}, all recovered {res.all_recovered()}")
