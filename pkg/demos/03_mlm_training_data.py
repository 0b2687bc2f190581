"""Building masked-LM training records from translation triplets.

Each record aligns mt against pe, masks error positions (subs and
insertions), and keeps the erroneous mt token as the training target. When
the pair is noisier than a rate drawn from the gold distribution, only a
random cap of ceil(|pe| * rate) sites is masked.

Run: python demos/03_mlm_training_data.py
"""

from apesynth import EditRateDist, Triplet, build_mlm_record
from apesynth.seeding import record_rng

t = Triplet(
    id=0,
    src="how to choose the right trainee ?".split(),
    mt="wie bis wählt man den richtig Azubi ?".split(),
    pe="wie wählt man den richtigen Praktikanten ?".split(),
)

print("src:", " ".join(t.src))
print("mt: ", " ".join(t.mt))
print("pe: ", " ".join(t.pe))

for label, rate in [("generous budget (rate 1.0)", 1.0), ("tight budget (rate 0.15)", 0.15)]:
    dist = EditRateDist.from_samples([rate])
    rec = build_mlm_record(t, dist, record_rng(5, t.id))
    print(f"\n{label}")
    print("  y_mask :", " ".join(rec.y_mask))
    print("  y_noise:", " ".join(rec.y_noise))
    print(f"  masks  : {rec.mask_count}")
