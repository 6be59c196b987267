"""Print contributing-term counts and partition-group counts for small S and m."""
from cohstate.coherent import collect_partitions, count_contributing

print("S  " + "".join(f"{m}-body".rjust(9) for m in range(1, 5)))
for S in range(2, 6):
    print(f"{S}  " + "".join(str(count_contributing(S, m)).rjust(9) for m in range(1, 5)))
print()
print("partition groups (nu', nu) pairs")
for S in range(1, 6):
    print(f"{S}  " + "".join(str(len(collect_partitions(S, m))).rjust(9) for m in range(1, 5)))
