"""Verify every gallery item and print one summary row per item.

    python3 scripts/run_gallery.py [--out-dir reports/]
"""

import argparse
import time
from pathlib import Path

from sigflip import analysis, config, gallery
from sigflip.cli import _json_text


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, help="write each verify report here as JSON")
    args = parser.parse_args()

    print(f"{'item':<14} {'H pts':>5} {'class':<11} {'induced':<10} {'round trip':>10} {'sec':>6}  verdict")
    for name in gallery.NAMES:
        cfg = config.load(f"gallery:{name}")
        start = time.perf_counter()
        report, passed = analysis.run_verify(cfg)
        elapsed = time.perf_counter() - start
        hs = report["h_points"]
        classes = ",".join(sorted({h["radical_class"] for h in hs})) or "-"
        induced = ",".join(sorted({str(tuple(h["induced_signature"])) for h in hs})) or "-"
        rt = report["verdicts"]["round_trip"]["max_deviation"]
        print(f"{name:<14} {len(hs):>5} {classes:<11} {induced:<10} {rt:>10.2e} {elapsed:>6.2f}  {'pass' if passed else 'FAIL'}")
        if args.out_dir:
            args.out_dir.mkdir(parents=True, exist_ok=True)
            (args.out_dir / f"{name}.json").write_text(_json_text(report))


if __name__ == "__main__":
    main()
