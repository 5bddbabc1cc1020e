"""Turn the COIL-20 image folder into the two pixel CSVs the CLI reads.

    python scripts/coil20_to_csv.py coil-20-proc/ out_dir/

Expects the processed archive layout ``obj{1..20}__{0..71}.png`` (128x128
gray, 5 degree pose steps). Each image is resized to 32x32 and flattened
row-major into columns ``p0..p1023`` scaled to [0, 1], plus an integer
``label`` column (object id - 1).

Split by pose quadrant:
  coil_c1.csv  poses 0-17 and 36-53   (0-85 and 180-265 degrees)
  coil_c2.csv  poses 18-35 and 54-71  (90-175 and 270-355 degrees)

Then, for example:
  mctl run --source out_dir/coil_c1.csv --target-train out_dir/coil_c2.csv \
      --target-test out_dir/coil_c2.csv --label-col label --kernel gaussian \
      --sigma 0.8 --preprocess l2 --mode source-only

Needs Pillow, which the package itself does not depend on.
"""
import argparse
import csv
import re
import sys
from pathlib import Path

import numpy as np
from PIL import Image

NAME = re.compile(r"obj(\d+)__(\d+)\.png$", re.IGNORECASE)
SIDE = 32


def quadrant_set(pose):
    """1 for the first and third pose quadrants, 2 otherwise."""
    return 1 if (pose // 18) % 2 == 0 else 2


def load(folder):
    rows = {1: [], 2: []}
    for path in sorted(Path(folder).iterdir()):
        m = NAME.search(path.name)
        if not m:
            continue
        obj, pose = int(m.group(1)), int(m.group(2))
        img = Image.open(path).convert("L").resize((SIDE, SIDE), Image.BILINEAR)
        pixels = np.asarray(img, dtype=np.float64).ravel() / 255.0
        rows[quadrant_set(pose)].append((pixels, obj - 1))
    return rows


def write(path, samples):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"p{i}" for i in range(SIDE * SIDE)] + ["label"])
        for pixels, label in samples:
            w.writerow([f"{v:.6f}" for v in pixels] + [label])


def main(argv=None):
    p = argparse.ArgumentParser(description="COIL-20 images to C1/C2 pixel CSVs")
    p.add_argument("images", help="folder with objN__P.png files")
    p.add_argument("out", help="output folder")
    args = p.parse_args(argv)
    rows = load(args.images)
    if not rows[1] or not rows[2]:
        sys.exit(f"no objN__P.png images found in {args.images}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for part in (1, 2):
        write(out / f"coil_c{part}.csv", rows[part])
        print(f"coil_c{part}.csv: {len(rows[part])} images")


if __name__ == "__main__":
    main()
