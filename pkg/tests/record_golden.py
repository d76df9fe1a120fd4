"""Record golden files from the independent oracles.

Run once (before trusting the region sweeps) and commit the outputs:

    python3 tests/record_golden.py

Writes tests/golden/fig2.json, tests/golden/fig2_frontier.csv and
tests/golden/wtc_fixed.json for the 2x2 example channel with gains
G1 = [[0.3, 2.5], [2.2, 1.8]], G2 = [[1.3, 1.2], [1.5, 3.9]].
"""

import json
import pathlib
import time

import numpy as np

from oracles import fig2_oracle, wtc_oracle_fixed

G1 = [[0.3, 2.5], [2.2, 1.8]]
G2 = [[1.3, 1.2], [1.5, 3.9]]
POWER = 12.0


def main():
    out = pathlib.Path(__file__).parent / "golden"
    out.mkdir(exist_ok=True)

    start = time.time()
    # 4x the default single-level resolution (256 angles, 129 scalings).
    wtc = wtc_oracle_fixed(G1, G2, np.diag([6.0, 6.0]), 256, 129)
    print(f"wtc fixed-cov golden: {wtc:.9f}  ({time.time() - start:.0f} s)")
    (out / "wtc_fixed.json").write_text(
        json.dumps(
            {"g1": G1, "g2": G2, "k": [[6.0, 0.0], [0.0, 6.0]], "value": wtc},
            indent=2,
        )
        + "\n"
    )

    start = time.time()
    fig2 = fig2_oracle(G1, G2, POWER)
    print(
        f"fig2 golden: max_r1_one={fig2['max_r1_one']:.6f} "
        f"max_r1_both={fig2['max_r1_both']:.6f} max_gap={fig2['max_gap']:.6f} "
        f"({time.time() - start:.0f} s)"
    )
    (out / "fig2.json").write_text(
        json.dumps(
            {
                "g1": G1,
                "g2": G2,
                "power": POWER,
                "max_r1_one": fig2["max_r1_one"],
                "max_r1_both": fig2["max_r1_both"],
                "max_gap": fig2["max_gap"],
            },
            indent=2,
        )
        + "\n"
    )
    lines = ["R1,R2"]
    for r1, r2 in zip(fig2["stair_r1"], fig2["stair_r2"]):
        lines.append(f"{r1:.6f},{r2:.6f}")
    (out / "fig2_frontier.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {out}/fig2.json, fig2_frontier.csv, wtc_fixed.json")


if __name__ == "__main__":
    main()
