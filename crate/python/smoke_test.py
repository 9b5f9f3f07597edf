"""Smoke test for the wiretap_lab extension module.

Builds the cdylib, copies it next to this script and exercises each binding.
"""

import json
import math
import pathlib
import shutil
import subprocess
import sys

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-q", "-p", "wiretap-lab-py"],
        cwd=ROOT,
        check=True,
    )
    shutil.copy(ROOT / "target" / "release" / "libwiretap_lab.so", HERE / "wiretap_lab.so")


def main():
    build()
    sys.path.insert(0, str(HERE))
    import wiretap_lab

    h = wiretap_lab.binary_entropy(0.11)
    assert abs(h - 0.499916) < 1e-6, h

    family = (ROOT / "families" / "bsc_pair.json").read_text()
    c = wiretap_lab.capacity(family, "csi", 0)
    oracle = wiretap_lab.binary_entropy(0.3) - wiretap_lab.binary_entropy(0.1)
    assert abs(c - oracle) < 1e-4, (c, oracle)

    compound = (ROOT / "families" / "bsc_compound.json").read_text()
    t = json.loads(wiretap_lab.protocol(compound, 200, 9, trials=2000))
    assert t["union_bound_holds"], t
    assert t["overall_success"] >= 0.85, t["overall_success"]

    args = ["tau-net", "--tau", "3.9", "--budget", "20", "--seed", "1"]
    first = wiretap_lab.run_cli(args)
    assert first == wiretap_lab.run_cli(args)
    assert json.loads(first)["payload"]["size"] == 1

    try:
        wiretap_lab.capacity('{"kind": "classical", "states": []}')
    except ValueError as e:
        assert "states" in str(e), e
    else:
        raise AssertionError("empty family accepted")

    try:
        wiretap_lab.run_cli(["capacity", "--family", str(ROOT / "families" / "bsc_pair.json")])
    except ValueError as e:
        assert "seed" in str(e)
    else:
        raise AssertionError("missing seed accepted")

    assert math.isclose(wiretap_lab.binary_entropy(0.5), 1.0)
    print("smoke test ok")


if __name__ == "__main__":
    main()
