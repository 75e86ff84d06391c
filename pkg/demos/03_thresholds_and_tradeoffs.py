"""Recovery thresholds against published baselines, and cost tradeoff curves."""

from psdmm import baseline_thresholds, tradeoff_curve
from psdmm.exponents import LITERATURE_R_STAR
from psdmm.simulator import tradeoff_csv

print(f"{'p,m,n':>7} {'R*':>4} {'Yu':>5} {'new':>5} {'saving':>7}")
for (p, m, n), r_star in sorted(LITERATURE_R_STAR.items()):
    row = baseline_thresholds(p, m, n, r_star=r_star)
    print(f"{f'{p},{m},{n}':>7} {r_star:>4} {row.yu:>5} {row.replicated:>5} {row.improvement_pct:>6.2f}%")

# with p = 1 the new threshold sits exactly one below Kim-Lee
for m, n in [(2, 2), (3, 4)]:
    row = baseline_thresholds(1, m, n)
    print(f"\np=1, m={m}, n={n}: Kim-Lee {row.kim_lee}, new {row.replicated}")

# normalized upload/download with N = R_c, so every server's answer is used
ours = tradeoff_curve("new", 2, [(p, m, 1) for p in (1, 2, 3) for m in (1, 2, 3)])
theirs = tradeoff_curve("chang-tandon", 2, [(m, 11) for m in range(1, 11)])
print()
print(tradeoff_csv(ours + theirs))
