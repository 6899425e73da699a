"""Regenerates census.csv, a small seeded table with numeric and categorical
columns, a binary sensitive attribute and a task label."""

import csv
import math
import random

SEED = 20240611
ROWS = 800

rng = random.Random(SEED)
with open("census.csv", "w", newline="") as fh:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["age", "hours", "experience", "capital", "education", "sex", "income"])
    for _ in range(ROWS):
        sex = rng.choice(["female", "male"])
        male = sex == "male"
        age = round(rng.gauss(41 if male else 37, 11), 1)
        hours = round(rng.gauss(44 if male else 36, 8), 1)
        experience = round(max(0.0, 0.6 * (age - 20) + rng.gauss(0, 4)), 1)
        capital = round(rng.lognormvariate(1.5 if male else 1.1, 0.8), 2)
        education = rng.choices(["hs", "college", "grad"], weights=[5, 3, 2] if male else [4, 4, 2])[0]
        score = (
            0.04 * (age - 39)
            + 0.08 * (hours - 40)
            + 0.03 * experience
            + 0.15 * math.log(capital)
            + {"hs": -0.8, "college": 0.2, "grad": 0.9}[education]
            + rng.gauss(0, 0.8)
        )
        w.writerow([age, hours, experience, capital, education, sex, ">50k" if score > 0.3 else "<=50k"])
