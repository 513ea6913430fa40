"""Line-protocol oracle: discrete expected shortfall at level k/n.

Usage: python3 des_oracle.py K
Reads one whitespace-separated sample per line, replies one number.
"""

import sys


def main() -> int:
    k = int(sys.argv[1]) if len(sys.argv) > 1 else 1
    for line in sys.stdin:
        parts = line.split()
        if not parts:
            continue
        values = sorted(float(p) for p in parts)
        kk = min(k, len(values))
        print(repr(-sum(values[:kk]) / kk), flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
