"""Build a synthetic COMTRADE-style export file whose USA NRCA values
reproduce the bundled NRCA table (values x 1e6).

Other reporters and the USA's non-textile exports are drawn from a seeded
generator; the USA's exports of the six textile codes are then solved so
that e_ij/e - e_j*e_i/e^2 equals the target for every year.

Usage: python3 scripts/gen_trade_fixture.py
"""
import csv
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
TABLE = ROOT / "crates/core/data/table1_nrca.csv"
OUT = ROOT / "crates/core/data/synthetic_trade.csv"

OTHERS = ["CHN", "DEU", "IND", "PAK", "TUR"]
FILLER = ["2709", "8471", "8703"]
# Six-digit splits exercise truncation to four digits.
SPLITS = {"5205": ["520511", "520512"], "8471": ["847130", "847150"]}


def main():
    rng = random.Random(20240601)
    rows = [l for l in TABLE.read_text().splitlines() if l and not l.startswith("#")]
    header = rows[0].split(",")
    codes = header[1:]
    table = {}
    for line in rows[1:]:
        parts = line.split(",")
        table[int(parts[0])] = dict(zip(codes, (float(v) * 1e-6 for v in parts[1:])))

    records = []
    for year in sorted(table):
        growth = 1.05 ** (year - 1996)
        other = {
            (c, j): rng.uniform(2e10, 6e10) * growth
            for c in OTHERS
            for j in codes
        }
        for c in OTHERS:
            for j in FILLER:
                other[(c, j)] = rng.uniform(2e11, 8e11) * growth
        usa_filler = {j: rng.uniform(2e11, 5e11) * growth for j in FILLER}

        known = sum(other.values()) + sum(usa_filler.values())
        s = sum(usa_filler.values())
        o_j = {j: sum(other[(c, j)] for c in OTHERS) for j in codes}
        x = {j: 0.0 for j in codes}
        for _ in range(200):
            big_x = sum(x.values())
            e = known + big_x
            e_i = s + big_x
            new = {
                j: (table[year][j] * e * e + o_j[j] * e_i) / (e - e_i)
                for j in codes
            }
            done = max(abs(new[j] - x[j]) for j in codes) < 1e-9
            x = new
            if done:
                break
        assert all(v > 0 for v in x.values()), year

        values = {("USA", j): v for j, v in x.items()}
        values.update({("USA", j): v for j, v in usa_filler.items()})
        values.update(other)
        for (c, j), v in sorted(values.items()):
            parts = SPLITS.get(j)
            if parts:
                share = rng.uniform(0.3, 0.7)
                records.append((c, year, parts[0], v * share))
                records.append((c, year, parts[1], v - v * share))
            else:
                records.append((c, year, j, v))

    with OUT.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["reporter", "year", "hs_code", "export_value"])
        for c, y, j, v in records:
            w.writerow([c, y, j, repr(v)])
    print(f"wrote {len(records)} records to {OUT}")


if __name__ == "__main__":
    main()
