"""Machine-check every row of the six reference correction tables.

Run:  python demos/03_table_verification.py
"""

from walknet import verify_all_tables

reports = verify_all_tables()
for tid, rep in reports.items():
    ok = sum(r.ok for r in rep.rows)
    print(f"table {tid}: {ok}/{len(rep.rows)} rows verified")
    for note in rep.notes:
        print(f"  note: {note}")
    for row in rep.rows[:4]:
        values = "".join(str(v) for v in row.outcome)
        print(f"    outcome {values:<8} correction {row.listed_correction:<28}"
              f" state fid {row.state_fidelity:.10f}  corrected fid {row.corrected_fidelity:.10f}")
    if len(rep.rows) > 4:
        print(f"    ... {len(rep.rows) - 4} more rows")

print()
if all(rep.all_ok for rep in reports.values()):
    print("Tables 1-6: all rows verified")
else:
    print("verification FAILED")
