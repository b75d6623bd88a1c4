"""Write the standard report suite twice (1 and 8 threads) and compare bytes."""
import argparse
import filecmp
import os
import subprocess
import sys


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="report")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget", default="24:100000")
    a = ap.parse_args(argv)
    dirs = []
    for threads in (1, 8):
        d = os.path.join(a.out, f"threads{threads}")
        subprocess.run([sys.executable, "-m", "randlab.cli", "report", "--out", d, "--threads", str(threads),
                        "--seed", str(a.seed), "--budget", a.budget], check=True)
        dirs.append(d)
    cmp = filecmp.dircmp(*dirs)
    same = not (cmp.diff_files or cmp.left_only or cmp.right_only)
    print("identical" if same else f"DIFFERENT: {cmp.diff_files + cmp.left_only + cmp.right_only}")
    return 0 if same else 1


if __name__ == "__main__":
    raise SystemExit(main())
