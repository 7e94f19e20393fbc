"""Extract the small benchmark datasets from the ``keel-ds`` wheel into CSV.

Usage::

    pip download keel-ds==0.2.5 --no-deps -d /tmp/keel
    python scripts/extract_keel.py /tmp/keel/keel_ds-0.2.5-py3-none-any.whl data/

KEEL ships the UCI files with the header stripped; a generic header
(``a1..aD,class``) is written so the label column can be selected by name.
"""
import csv
import sys
import zipfile
from pathlib import Path

# output name -> KEEL file stem
DATASETS = {
    "wbcd": "wisconsin",
    "heart": "heart",
    "teaching": "tae",
    "ionosphere": "ionosphere",
    "pima": "pima",
    "bupa": "bupa",
    "iris": "iris",
    "wine": "wine",
}


def main(wheel, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(wheel) as zf:
        for name, stem in DATASETS.items():
            text = zf.read(f"keel_ds/data/balanced/raw/{stem}.dat").decode("utf-8")
            rows = [
                [cell.strip() for cell in line.split(",")]
                for line in text.splitlines()
                if line.strip() and not line.startswith("@")
            ]
            n_attr = len(rows[0]) - 1
            with open(out / f"{name}.csv", "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow([f"a{i + 1}" for i in range(n_attr)] + ["class"])
                writer.writerows(rows)
            print(f"{name}: {len(rows)} rows, {n_attr} attributes")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
