"""Replicated library walkthrough.

A user holds A and wants A @ B[theta] from servers that each store the whole
library B[0..L-1].  Servers must learn neither A nor theta.
"""

from psdmm import (Modulus, make_rng, random_matrix, replicated_plan, verify_plan)
from psdmm.replicated import (ServerResponse, decode, encode_share, make_queries,
                              server_compute, server_encode_library)

q = Modulus((1 << 61) - 1)
rng = make_rng(2024, "walkthrough")

# A is 4x4, split into a 2x2 grid of blocks; each library matrix likewise
p, m, n, L, theta = 2, 2, 2, 2, 1
plan = replicated_plan(p, m, n)
print("alpha grid:", plan.alpha)
print("beta grid: ", plan.beta)
print("useful exponents:", list(plan.useful))
print("recovery threshold:", plan.recovery_threshold)
print("plan checks pass:", verify_plan(plan).passed)

A = random_matrix(4, 4, rng, q)
library = [random_matrix(4, 4, rng, q) for _ in range(L)]

# one fresh mask per multiplication
Z = random_matrix(2, 2, rng, q)

N = plan.recovery_threshold + 2
queries, points = make_queries(theta, N, L, rng, q)
print(f"\nserver 0 receives query {[int(a) for a in queries[0].entries]}")
print(f"server 1 receives query {[int(a) for a in queries[1].entries]}")
# only the desired position differs between servers; each server sees one
# tuple of distinct random points and cannot tell which slot is special

responses = []
for i in range(N):
    share = encode_share(A, Z, plan, points[i])
    g = server_encode_library(library, queries[i], plan)
    responses.append(ServerResponse(i, points[i], server_compute(share, g)))

# two servers straggle; the rest are enough
arrived = responses[2:]
C = decode(arrived, plan)
print("\ndecoded == A @ B[theta]:", C == A @ library[theta])
print("decoded from a different subset agrees:", decode(responses[:-2], plan) == C)
