import argparse
from pathlib import Path

from ebcs.cli import write_csv


def parser(doc: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=doc)
    p.add_argument("--out-dir", default="results")
    p.add_argument("--quick", action="store_true", help="smaller horizons and fewer seeds")
    return p


def save(out_dir, name, header, rows):
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    with open(path / name, "w", encoding="utf-8", newline="") as fh:
        write_csv(header, rows, fh)
    print(f"wrote {path / name} ({len(rows)} rows)")
