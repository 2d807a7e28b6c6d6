"""Writes the signal fixtures used by the CLI tests."""
import json
import math

N = 2048
X0 = -20.0
DX = 40.0 / N

S1 = [(1.0, 0.3, 1.5)]
S2 = [(1.0, -2.0, 2.2), (0.8, 3.2, 1.7)]
S3 = [(1.0, -5.0, 1.4), (-0.5, 0.6, 1.0), (0.7, 5.5, 1.8)]


def bumps(spec, x):
    return sum(a * math.exp(-0.5 * ((x - m) / s) ** 2) for a, m, s in spec)


def affine(spec, a, b, c):
    # a * f(b x + c) is again a sum of bumps
    return [(a * h, (m - c) / b, s / b) for h, m, s in spec]


def write_json(name, spec, n=N, x0=X0, dx=DX):
    samples = [bumps(spec, x0 + i * dx) for i in range(n)]
    with open(name, "w") as f:
        json.dump({"x0": x0, "dx": dx, "samples": samples}, f)
        f.write("\n")


def write_csv(name, rows):
    with open(name, "w") as f:
        f.write("x,value\n")
        for x, v in rows:
            f.write(f"{x!r},{v!r}\n")


write_json("s1.json", S1)
write_json("s2.json", S2)
write_json("s3.json", S3)
write_json("s2_affine.json", affine(S2, 2.0, 1.5, 0.3))
write_json("s2_window10.json", S2, n=1024, x0=-10.0)
write_csv("s1.csv", [(X0 + i * DX, bumps(S1, X0 + i * DX)) for i in range(N)])
write_csv("jittered.csv", [(X0 + i * DX + (1e-4 * DX if i == 700 else 0.0), bumps(S1, X0 + i * DX)) for i in range(N)])
