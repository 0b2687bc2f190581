"""Word-level edit alignment: traces, shifts, and edit rates.

Run: python demos/01_edit_alignment.py
"""

from apesynth import edit_rate, levenshtein_align, ter_align

hyp = "the cat sat on on mat".split()
ref = "the cat sat on the mat".split()

a = levenshtein_align(hyp, ref)
print(f"hyp: {' '.join(hyp)}")
print(f"ref: {' '.join(ref)}")
print(f"distance = {a.distance}")
for op in a.ops:
    print(f"  {op.kind.value:5s}  ref={op.ref_token!r:10} hyp={op.hyp_token!r}")

# A rotated sentence: a block shift repairs it for one edit instead of two.
hyp2 = "tonight we dine in hell".split()
rotated = hyp2[2:] + hyp2[:2]
plain = levenshtein_align(rotated, hyp2)
shifted = ter_align(rotated, hyp2, allow_shifts=True)
print()
print(f"rotated: {' '.join(rotated)}")
print(f"plain distance   = {plain.distance}")
print(f"with shifts      = {shifted.distance} ({shifted.shift_count} shift)")

# Edit rate normalizes by reference length and may exceed 1.
r = edit_rate("completely different words entirely and then some".split(), "short ref".split())
print()
print(f"edits={r.edits} ref_len={r.ref_len} rate={r.rate:.2f}")
