"""A length whose wave-trace contribution may cancel.

On SU(2) x SO(3), with the SU(2) factor scaled by 1/4, two geodesic classes
have squared length 5/2.  Their fixed sets have the same dimension but their
Morse indices differ by 2 mod 4, so the leading wave terms carry opposite
signs and nothing certifies that 5/2 is in the singular support.
"""

from fractions import Fraction
from pathlib import Path

from artifact.cli import build_space, load_config
from artifact.exact import fmt_rational, fmt_vec
from artifact.symspec import enumerate_spectrum, wave_analysis

space, metric = build_space(load_config(str(Path(__file__).parent / "configs" / "su2_x_so3.toml")))
report = enumerate_spectrum(space, metric, Fraction(3))

for len2 in report.lengths:
    for cls in report.classes[len2]:
        print(f"len2 {fmt_rational(len2):>4}  v = {[fmt_vec(c) for c in cls.v[1:]]}"
              f"  dim Fix = {cls.dim_fix}  Morse = {cls.morse}")

print()
for term in wave_analysis(report):
    verdict = "certified" if term.certified_nonzero else "may cancel"
    print(f"len2 {fmt_rational(term.len2):>4}: {verdict}")
