"""Strichartz ratio R(N) = ||e^{it Lap} P_N f||_{L^4} / ||f||_{L^2} on R x T^2.

A reduced version of the ``strichartz`` experiment: a small ensemble and
N up to 8, so it finishes in well under a minute.  Random members stay
near a fixed level as N grows.  The all-ones Dirichlet candidate sits well
above them and sets the sup, which still grows far more slowly than the
N^{3/4} envelope.
"""
from waveguide_nls.experiments import parse_config, run_experiment

cfg = parse_config({"kind": "strichartz", "ensemble": 8, "sweep": {"N": [2, 4, 8], "p": [4.0]}})
report = run_experiment(cfg)

for N in cfg.sweep["N"]:
    rows = [r for r in report.records if r["N"] == N]
    rand = [r["ratio"] for r in rows if r["data"] == "random"]
    dirichlet = [r["ratio"] for r in rows if r["data"] == "dirichlet"]
    print(f"N={N:2d}  random max {max(rand):.4f}  dirichlet {dirichlet[0]:.4f}")

fit = report.summary["fits"][0]
print(f"fitted slope {fit['slope']:.3f} (theory {fit['theory']:.2f}, threshold {fit['threshold']:.2f})")
