#!/usr/bin/env python3
import sys
import hashlib
import logging
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')

from pshardy.main import main as cli_main


def run_once(experiment, config, out_dir, tag):
    out = Path(out_dir) / f"{experiment}.{tag}.out"
    code = cli_main([experiment, "--config", str(config), "--out", str(out)])
    return code, out.read_bytes() if out.exists() else b""


def main():
    if len(sys.argv) < 3:
        print("Usage: scripts/check_determinism.py <experiment> <config.json>", file=sys.stderr)
        sys.exit(2)
    experiment, config = sys.argv[1], sys.argv[2]

    with tempfile.TemporaryDirectory() as tmp:
        code_a, first = run_once(experiment, config, tmp, "a")
        code_b, second = run_once(experiment, config, tmp, "b")

    digest_a = hashlib.sha256(first).hexdigest()
    digest_b = hashlib.sha256(second).hexdigest()
    print("exit codes:", code_a, code_b)
    print("sha256:", digest_a, digest_b)
    if code_a != code_b or first != second:
        print("输出不一致", file=sys.stderr)
        sys.exit(1)
    print("两次运行输出逐字节一致")


if __name__ == '__main__':
    main()
