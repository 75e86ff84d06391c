"""MDS-coded library.

Each server now holds one coded piece g_t(a_i) of every library matrix,
1/(pn) of the replicated storage.  Any pn servers can rebuild the library.
"""

import itertools

from psdmm import Modulus, make_rng, mds_plan, mds_plan_large_field, random_matrix, sample_distinct_points
from psdmm.mds import encode_storage, make_mds_queries, mds_decode, mds_server_compute, reconstruct_library
from psdmm.replicated import ServerResponse

q = Modulus((1 << 61) - 1)
rng = make_rng(7, "mds-demo")
L, theta = 3, 2

for plan in (mds_plan(2, 2, 2), mds_plan_large_field(2, 2, 2)):
    N = plan.recovery_threshold + 2
    A = random_matrix(4, 4, rng, q)
    library = [random_matrix(4, 4, rng, q) for _ in range(L)]
    points = sample_distinct_points(N, rng, q)
    stores = encode_storage(library, plan, points)
    print(f"[{plan.variant.value}] N={N}, R_c={plan.recovery_threshold}, "
          f"elements per server: {stores[0].element_count} (replicated would hold {L * 16})")

    # the decoys S_j are shared by all servers, only the masked share moves with theta
    queries = make_mds_queries(A, theta, L, plan, points, rng)
    responses = [ServerResponse(i, points[i], mds_server_compute(stores[i], queries[i]))
                 for i in range(N)]
    print("  decoded correctly:", mds_decode(responses[2:], plan) == A @ library[theta])

plan = mds_plan(2, 1, 2)
points = sample_distinct_points(7, rng, q)
library = [random_matrix(4, 4, rng, q) for _ in range(2)]
stores = encode_storage(library, plan, points, validate=True)
ok = all(reconstruct_library(sub, plan) == library for sub in itertools.combinations(stores, 4))
print("\nevery 4 of 7 servers rebuild the library:", ok)
