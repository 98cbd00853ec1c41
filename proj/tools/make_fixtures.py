"""Regenerates the synthetic fixture CSVs under tests/fixtures.

The files mimic the column layouts of the satellite magnetic-field, dijet
and top-quark data; the values are synthetic and seeded.
"""

import csv
import math
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def write(name, header, rows, comment=None):
    with open(OUT / name, "w", newline="") as f:
        if comment:
            f.write(f"# {comment}\n")
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([f"{v:.10g}" if isinstance(v, float) else v for v in r])


def swarm(rng, n):
    # Polar-orbit track at roughly constant altitude; the field has a dipole-like
    # dependence on latitude plus noise, so it is symmetric about the pole axis.
    rows = []
    for i in range(n):
        lat = rng.uniform(-88.0, 88.0)
        lon = rng.uniform(-180.0, 180.0)
        radius = 6371.2 + 460.0 + rng.gauss(0.0, 2.0)
        field = 30000.0 * math.sqrt(1.0 + 3.0 * math.sin(math.radians(lat)) ** 2) + rng.gauss(0.0, 300.0)
        rows.append((lat, lon, radius, field))
    return rows


def dijet(rng, n):
    rows = []
    for _ in range(n):
        phi = rng.uniform(-math.pi, math.pi)
        pt1 = rng.expovariate(1.0 / 400.0) + 50.0
        pt2 = pt1 * rng.uniform(0.3, 1.0)
        rows.append((pt1, phi, pt2, math.remainder(phi + math.pi + rng.gauss(0.0, 0.3), 2 * math.pi)))
    return rows


def top_quark(rng, n):
    rows = []
    for _ in range(n):
        row = []
        e_first = 0.0
        for k in range(2):
            p = [rng.gauss(0.0, 120.0) for _ in range(3)]
            m = rng.uniform(0.0, 80.0)
            e = math.sqrt(m * m + sum(c * c for c in p))
            if k == 0:
                e_first = e
            row += [e] + p
        label = 1 if rng.random() < (0.9 if e_first >= 200.0 else 0.1) else 0
        rows.append(tuple(row) + (label,))
    return rows


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240229)
    write("basic.csv", ["a", "b"], [(1.0, 2.0), (3.0, 4.0), (5.0, 6.5)])
    bad = [(float(i), float(2 * i)) for i in range(1, 10)]
    bad[6] = ("abc", 14.0)
    write("bad_cell.csv", ["x", "y"], bad)
    write("swarm_sample.csv", ["lat", "lon", "radius", "field"], swarm(rng, 600),
          "synthetic satellite track: latitude deg, longitude deg, radius km, field nT")
    flat = [(lat, lon, r, 100.0) for lat, lon, r, _ in swarm(rng, 10)]
    write("swarm_constant_field.csv", ["lat", "lon", "radius", "field"], flat)
    write("dijet_sample.csv", ["pt1", "phi1", "pt2", "phi2"], dijet(rng, 600),
          "synthetic leading-constituent pairs: pT GeV, phi rad")
    names = [f"{c}{k}" for k in (1, 2) for c in ("E", "px", "py", "pz")]
    write("top_quark_sample.csv", names + ["label"], top_quark(rng, 600),
          "synthetic two-particle events with energy-threshold labels")


if __name__ == "__main__":
    main()
