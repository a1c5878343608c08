"""
Characteristic foliation of the twisted disk form
=================================================

Extending the boundary structure over the binding disk forces singular points
on the page: the constructed disk form for odd k produces (k + 1) / 2 positive
elliptic points and (k - 1) / 2 negative hyperbolic points, and the direction
field winds k times along the rim. The script classifies the zeros for a few
values of k and writes a portrait of the k = 3 line field as CSV and SVG.
"""

from pathlib import Path

from engelbook.foliation import classifier_boundary_winding, construct_xi_prime
from engelbook.reports import portrait_rows, render_csv, render_svg

for k in (1, 3, 5, 7):
    disk = construct_xi_prime(k)
    report = disk.singularities
    print(f"k = {k}: relative euler number {report.relative_euler}, "
          f"counts {report.counts}, passed = {disk.passed}")
    for zero in report.zeros:
        print(f"    {zero['type']:10s} sign {zero['sign']:+d} "
              f"at ({zero['p']:+.4f}, {zero['q']:+.4f}) residual {zero['residual']:.1e}")

# near the rim the classifier is normalized, so its own boundary winding is 1;
# the k-fold turning lives in the frame comparison recorded by the invariants
disk = construct_xi_prime(3)
turns = classifier_boundary_winding(disk.classifier, 0.95)
print(f"\nclassifier turns at r = 0.95: {turns:.6f}")
print(f"certified contact margin: {disk.certificates['contact_min']:.4f}")

# dump the line field on a grid; the CSV has one row per sample point
out_dir = Path(__file__).resolve().parent
rows = portrait_rows(disk, grid_n=41)
(out_dir / "portrait_k3.csv").write_text(render_csv(rows))
(out_dir / "portrait_k3.svg").write_text(render_svg(disk, grid_n=25))
print(f"\nwrote portrait_k3.csv ({len(rows)} samples) and portrait_k3.svg to {out_dir}")
