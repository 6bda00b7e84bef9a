"""Download the 30-industry daily portfolio returns and reshape them to plain CSV.

    python3 scripts/fetch_french_30.py [--out data/ff30_daily.csv]

Source: Kenneth R. French Data Library, "30 Industry Portfolios [Daily]".
The archive holds one CSV with several stacked tables; only the first one,
value-weighted daily returns, is kept. The output has a ``date`` column
(YYYYMMDD) followed by one column per industry, returns in percent exactly
as published (the loss transform expects percent units). The library's
missing-value codes -99.99 and -999 are written as empty cells, so ingest
with ``--missing drop-row``.

This script needs network access and is not run by the test suite. When
the output file exists (or ``TRANSLINEAR_FF30_CSV`` points at it), the
conditional acceptance test for the financial application runs.
"""
import argparse
import csv
import io
import urllib.request
import zipfile
from pathlib import Path

URL = ("https://mba.tuck.dartmouth.edu/pages/faculty/ken.french/ftp/"
       "30_Industry_Portfolios_daily_CSV.zip")
MISSING = {"-99.99", "-999"}


def first_table(text):
    """Header and rows of the first table: the header starts with a comma."""
    lines = iter(text.splitlines())
    for line in lines:
        if line.startswith(","):
            header = [h.strip() for h in line.split(",")[1:]]
            break
    else:
        raise ValueError("no table header found")
    rows = []
    for line in lines:
        cells = [c.strip() for c in line.split(",")]
        if not cells[0].isdigit():
            break
        rows.append([cells[0]] + ["" if c in MISSING else c for c in cells[1:]])
    return header, rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data/ff30_daily.csv")
    ap.add_argument("--url", default=URL)
    args = ap.parse_args()
    with urllib.request.urlopen(args.url, timeout=60) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    name = next(n for n in archive.namelist() if n.lower().endswith(".csv"))
    header, rows = first_table(archive.read(name).decode("latin-1"))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date"] + header)
        w.writerows(rows)
    print(f"wrote {len(rows)} rows x {len(header)} industries to {out}")


if __name__ == "__main__":
    main()
