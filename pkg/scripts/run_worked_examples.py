"""Run every analysis on the two worked feedback loops.

Writes configs, CSV/JSON results, and (when dirtylocus-plots is
installed) figures into ./out.  Usage:  python scripts/run_worked_examples.py
"""

import json
import pathlib
import shutil
import subprocess
import sys

OUT = pathlib.Path("out")

PROBLEMS = {
    # p = s^2, k = -2 - 3s: stable for every tau
    "stable": {"p": [0, 0, 1], "k": [-2, -3]},
    # p = s^2 - 3s, k = -1 - 5s: loses stability at tau ~ 0.291
    "destab": {"p": [0, -3, 1], "k": [-1, -5]},
}

# locus start must be a baseline root: -2 for the stable loop; the
# destabilizing loop's baseline (s+1)^2 puts a double root at -1, so its
# trace stops immediately with the bifurcation finding (exit 0)
LOCUS_START = {"stable": "-2", "destab": "-1"}

ANALYSES = [
    ("roots_tau0.csv", ["--command", "roots", "--tau", "0"]),
    ("roots_tau05.csv", ["--command", "roots", "--tau", "0.5"]),
    ("sweep.csv", ["--command", "sweep", "--tau-min", "0", "--tau-max", "0.5", "--steps", "24"]),
    ("critical_tau.json", ["--command", "critical-tau", "--tau-max", "10"]),
    ("locus.csv", ["--command", "locus", "--s0-re", "{s0}", "--tau-min", "0", "--tau-max", "0.05"]),
    ("nyquist_tau01.csv", ["--command", "nyquist", "--tau", "0.1", "--omega-min", "0.01",
                           "--omega-max", "100", "--points-per-decade", "40",
                           "--winding", "--sensitivity"]),
    ("certify_eps001.json", ["--command", "certify", "--epsilon", "0.01", "--tau-max", "1"]),
]

FIGURES = [
    ("sweep.png", "sweep", ["sweep.csv"]),
    ("nyquist.png", "nyquist", ["nyquist_tau01.csv"]),
    ("sensitivity.png", "sensitivity", ["nyquist_tau01.csv"]),
    ("locus.png", "locus", ["locus.csv"]),
]


def main():
    OUT.mkdir(exist_ok=True)
    for name, body in PROBLEMS.items():
        workdir = OUT / name
        workdir.mkdir(exist_ok=True)
        config = workdir / "config.json"
        config.write_text(json.dumps(body, indent=2))
        for out_name, args in ANALYSES:
            args = [a.format(s0=LOCUS_START[name]) for a in args]
            cmd = ["dirtylocus", str(config), *args, "--out", str(workdir / out_name)]
            result = subprocess.run(cmd)
            status = "ok" if result.returncode == 0 else f"exit {result.returncode}"
            print(f"{name}/{out_name}: {status}")
        if shutil.which("dirtylocus-plot"):
            for fig_name, kind, inputs in FIGURES:
                cmd = ["dirtylocus-plot", kind, *[str(workdir / i) for i in inputs],
                       "--out", str(workdir / fig_name)]
                result = subprocess.run(cmd)
                status = "ok" if result.returncode == 0 else f"exit {result.returncode}"
                print(f"{name}/{fig_name}: {status}")
        else:
            print("dirtylocus-plot not installed; skipping figures")


if __name__ == "__main__":
    sys.exit(main())
