"""Statistical audits of what a single server sees.

A uniform share means the server learns nothing about A; matching view
distributions under two indices means it learns nothing about theta.  The
negative controls break the scheme on purpose and should be caught.
"""

from psdmm.audit import query_indistinguishability_test, share_uniformity_test

for scheme in ("replicated", "mds"):
    print(f"--- {scheme}")
    for rep in (
        share_uniformity_test(scheme, samples=100_000, seed=0),
        share_uniformity_test(scheme, samples=100_000, seed=0, mask=False),
        query_indistinguishability_test(scheme, samples=100_000, seed=0),
        query_indistinguishability_test(scheme, samples=100_000, seed=0, skew=True),
    ):
        verdict = "pass" if rep.passed else "FAIL"
        extra = f" p={rep.p_value:.3g}" if rep.p_value is not None else ""
        print(f"{rep.test_name:<36} stat={rep.statistic:<10.4g}{extra:<12} {verdict}")
