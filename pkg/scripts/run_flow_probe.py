"""Run every flow config in scripts/configs and write .csv/.json next to a results prefix."""
import argparse
import pathlib
import time

from grassbern import flow as fl

HERE = pathlib.Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--configs", nargs="*", default=sorted(str(p) for p in (HERE / "configs").glob("*.cfg")))
    ap.add_argument("--outdir", default="results/flow")
    args = ap.parse_args()
    out = pathlib.Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for path in args.configs:
        path = pathlib.Path(path)
        cfg = fl.parse_config(path.read_text())
        t0 = time.perf_counter()
        rep = fl.run_config(cfg)
        (out / f"{path.stem}.json").write_text(rep.to_json())
        (out / f"{path.stem}.csv").write_text(rep.to_csv())
        print(f"{path.stem:18s} {rep.classification:26s} steps={rep.steps:6d} "
              f"diam={rep.final_diameter:.2e} tension={rep.final_tension:.2e} "
              f"exit={rep.first_exit_step} ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
