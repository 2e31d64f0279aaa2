"""Check identities on a metric written in a YAML file rather than taken from the catalog."""

from __future__ import annotations

from pathlib import Path

from ril.catalog import SamplePlan, load_family_file, sample_points
from ril.identities import REGISTRY
from ril.runner import evaluate_point

fam = load_family_file(Path(__file__).parent / "families" / "berger-like-3.yaml")
cases = [c for c in REGISTRY.values() if c.applicability(fam) is None and c.asserted]
pairs = [(c, c.order) for c in cases]
worst: dict[str, float] = {}
for p in sample_points(fam, SamplePlan(3, seed=0)):
    for cid, res in evaluate_point(fam, p, pairs, "dual").items():
        worst[cid] = max(worst.get(cid, 0.0), res.residual if res.residual is not None else float("inf"))

print(f"{fam.name}: {len(cases)} applicable cases")
for cid, r in worst.items():
    tol = REGISTRY[cid].tolerance
    print(f"  {'ok ' if r < tol else 'BAD'} {cid:32s} {r:.1e}")
