"""Rewrite the expected outputs next to every *.cfg in this directory.

Run after an intentional change in output:  python3 tests/golden/regen.py
"""

import pathlib
import sys

from frackin import cli

HERE = pathlib.Path(__file__).parent


def main() -> int:
    for cfg in sorted(HERE.glob("*.cfg")):
        fmt = "json" if "format = json" in cfg.read_text() else "csv"
        out = cfg.with_suffix(f".{fmt}")
        code = cli.main(["--config", str(cfg), "--out", str(out)])
        print(f"{cfg.name} -> {out.name} (exit {code})")
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
