"""Regenerate the DM sweep golden files from the pure-Python reference.

Run from the repository root: ``python3 tests/make_golden.py``.
"""

import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))
import oracles  # noqa: E402

DATA = Path(__file__).parent / "data"


def main():
    ch = json.loads((DATA / "channel_binary.json").read_text())["p_y1y2_given_x1x2"]
    for name, fn in (("inner", oracles.reference_inner_lines), ("outer", oracles.reference_outer_lines)):
        t0 = time.time()
        lines = fn(ch, k=2)
        (DATA / f"golden_{name}_k2.csv").write_text("\n".join(["R0,R1,R2", *lines]) + "\n")
        print(f"{name}: {len(lines)} points in {time.time() - t0:.1f} s")


if __name__ == "__main__":
    main()
