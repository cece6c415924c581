"""Map the success/failure boundary in the (channels, sources) plane.

For a fixed n, recovery succeeds when s * r is small relative to the
sample budget and fails beyond it.  This scaled-down sweep (fewer trials,
a coarse grid) finishes in well under a minute; the command-line tool
`blindsr phase-sr` runs the full 12x12 grid.
"""

from blindsr import ExperimentSpec, phase_transition

spec = ExperimentSpec(
    kind="phase-sr",
    n_values=(64,),
    s_values=(1, 2, 4, 8, 12),
    r_values=(1, 2, 4, 8, 12),
    trials=5,
    seed=0,
    separation="1overn",
)
results, path = phase_transition(spec, "out/phase_demo")
print(f"cells written to {path}\n")

print("success rate by (s, r):")
print("       " + "".join(f"r={r:<5d}" for r in spec.r_values))
for s in spec.s_values:
    cells = {c.r: c for c in results if c.s == s}
    row = "".join(
        f"{cells[r].success_rate:<7.2f}" if r in cells else "  --   "
        for r in spec.r_values
    )
    print(f"s={s:<4d} {row}")
