"""Distribute a GHZ state to six terminals of the bundled 14-node network.

Run:  python demos/04_network_distribution.py
"""

from walknet import (
    bundled_network_path,
    execute_schedule,
    load_network,
    plan_distribution,
    steiner_tree,
)

net = load_network(bundled_network_path())
terminals = [1, 2, 5, 12, 13, 14]
print(f"network: {len(net.nodes)} nodes, {len(net.resources)} Bell resources")
print(f"terminals: {terminals}")

tree = steiner_tree(net, terminals)
exact = steiner_tree(net, terminals, exact=True)
print(f"\nSteiner tree: {len(tree.edges)} edges, extra nodes {sorted(tree.steiner_nodes)}")
print(f"exhaustive optimum also uses {len(exact.edges)} edges")

schedule = plan_distribution(tree, net)
print("\nmerge plan:")
for step in schedule.steps:
    ins = list(step.coin_inputs) + ([step.position_input] if step.position_input else [])
    print(f"  node {step.node:>2}: {step.action:<10} consumes {ins} "
          f"-> {step.output_id} over nodes {list(step.output_parties)}")

for d in (2, 3):
    result = execute_schedule(schedule, mode="simulated", d=d, seed=7)
    print(f"\nsimulated at d={d}: fidelity {result.fidelity:.12f} "
          f"over parties {sorted(result.final_parties)}")
    for row in result.outcomes:
        print(f"  node {row['node']:>2} {row['action']:<10} outcome {row['outcome']} "
              f"correction {row['correction']}")

sym = execute_schedule(schedule, mode="symbolic", d=2)
print(f"\nsymbolic ledger: {sym.step_count} steps, "
      f"{sym.resources_consumed} resources consumed, "
      f"final parties {sorted(sym.final_parties)}")
