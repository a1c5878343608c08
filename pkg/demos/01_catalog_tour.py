"""
Tour of the model catalog
=========================

Every named local model carries its own verification battery: rank gaps for
the distribution conditions, slope residuals for boundary tori, and foliation
checks for declared surfaces. This script runs all of them and prints the
resulting margins.
"""

from engelbook.models import list_models, model_catalog

# each entry is (name, one-line summary)
for name, summary in list_models():
    print(f"{name:24s} {summary}")
print()

# run the full battery on every model; min_points controls grid density
for name, _ in list_models():
    model = model_catalog(name)
    reports = model.checks(min_points=500)
    worst = min(rep.min_gap for rep in reports if rep.n_points > 1)
    status = "ok" if all(rep.passed for rep in reports) else "FAILED"
    print(f"{name:24s} {len(reports):2d} checks  smallest gap {worst:9.3e}  {status}")

print()

# zoom in on one model: the even contact neighborhood of a binding circle
model = model_catalog("binding_Eb")
print(model.summary)
for rep in model.checks(min_points=1000):
    print(f"  {rep.name:44s} pts={rep.n_points:<5d} gap={rep.min_gap:.3e} pass={rep.passed}")

# parameters are keyword overrides; the spin model accepts any positive k
spin = model_catalog("engel_prolongation_Dk", k=4)
piece = spin.pieces[0]
print()
print(f"{spin.name} with k=4 spins the frame field {piece.params['k']} times per fiber circle")
assert all(rep.passed for rep in spin.checks(min_points=500))
print("all checks pass")
