"""Smoke test for the rdsim Python extension.

Build and install first, e.g.

    maturin build --release -m crates/py/Cargo.toml
    pip install target/wheels/rdsim-*.whl
"""

import math

import rdsim


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    # statistics on a 3-node path 0-1-2 with z = (1, 1, 0)
    g = rdsim.Graph(3, [(0, 1), (1, 2)])
    z = [1, 1, 0]
    assert g.node_count == 3 and g.edge_count == 2
    assert rdsim.mixing_counts(g, z) == (1, 0, 1)
    assert close(rdsim.homophily_r(g, z), 1.0)
    assert close(rdsim.homophily_newman(g, z), -1 / 3)
    try:
        rdsim.homophily_r(rdsim.Graph(2, [(0, 1)]), [1, 1])
    except rdsim.UndefinedError:
        pass
    else:
        raise AssertionError("R without cross edges should be undefined")

    h = rdsim.h_from_r(0.40, 0.33, 1.16)
    assert abs(h + 0.196) < 1e-3, h
    assert close(rdsim.r_from_h(h, 0.33, 1.16), 0.40, 1e-6)

    sol = rdsim.solve_edge_targets(1000, 0.5, 10.0, 1.0, 1.0)
    assert close(sol["e11"], 5000 / 3, 1e-6) and close(sol["e10"], 5000 / 3, 1e-6)
    try:
        rdsim.solve_edge_targets(1000, 0.1, 99.9, 4.0, 5.0)
    except rdsim.InfeasibleError as e:
        assert "q11" in str(e)
    else:
        raise AssertionError("expected infeasible targets")

    pop, attr = rdsim.generate_network(1000, 0.3, 20.0, 2.0, 3.0, seed=1)
    assert pop.node_count == 1000 and sum(attr) == 300
    again, _ = rdsim.generate_network(1000, 0.3, 20.0, 2.0, 3.0, seed=1)
    assert pop.edges() == again.edges()
    print("network:", pop, "D_a =", round(rdsim.differential_activity(pop, attr), 3))

    forest = rdsim.run_rds(pop, {"z": attr}, seeds=5, coupons=2, sample_size=200, seed=3)
    assert len(forest) == 200
    assert all(pop.has_edge(a, b) for a, b in forest.recruitment_edges())
    est = rdsim.estimate(forest, "z")
    print("estimates:", {k: v for k, v in est.items()})
    assert est["sample_size"] == 200 and 0 < est["rds2_prevalence"] < 1
    assert -1 <= rdsim.induced_homophily(forest, pop, "z") <= 1

    census = rdsim.run_rds(pop, attr, seeds=1, coupons=None, sample_size=1000, seed=4)
    assert close(rdsim.estimate(census)["d_a"], rdsim.differential_activity(pop, attr), 1e-12)

    cov = rdsim.generate_covariates([0.4, 0.2], [[1.0, 0.3], [0.3, 1.0]], 20000, seed=2, names=["a", "b"])
    assert list(cov) == ["a", "b"]
    assert abs(sum(cov["a"]) / 20000 - 0.4) < 0.02

    plan = """
[network]
n = 300
mean_degree = 10
p = 0.5
diff_activity = 1
homophily_r = 1

[rds]
sample_size = 60

[experiment]
replicates = 5
"""
    summary, replicates = rdsim.run_experiment(plan, seed=9)
    assert len(replicates.strip().splitlines()) == 6
    assert rdsim.run_experiment(plan, seed=9)[1] == replicates
    da = next(r for r in summary if r["estimand"] == "d_a")
    assert da["count"] + da["undefined"] + da["skipped"] == 5
    assert not math.isnan(da["median"])
    print("experiment: median RB(D_a) =", round(da["median"], 4))

    summary, _ = rdsim.run_engage_mimic("[experiment]\nreplicates = 2\n")
    assert {r["attribute"] for r in summary} == {"CAS", "CIR", "HIV+"}
    print("smoke test passed, rdsim", rdsim.__version__)


if __name__ == "__main__":
    main()
