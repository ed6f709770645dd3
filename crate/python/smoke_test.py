#!/usr/bin/env python3
"""Smoke test for the charmat_py extension module.

Build and stage the module first (from the repository root):

    cargo build --release -p charmat-py
    cp target/release/libcharmat_py.so python/charmat_py.so

then run:

    python3 python/smoke_test.py
"""
import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import charmat_py as cm


def main() -> None:
    # field and algebra arithmetic
    alg = cm.Algebra(3, "nonsplit")
    assert alg.q() == 3
    assert alg.unit_group_order() == 8
    kernel = [u for u in alg.units() if alg.norm(u) == 1]
    assert len(kernel) == 4, "norm-one circle has q + 1 elements"
    m = alg.embed2x2(alg.units()[0])
    assert len(m) == 2 and len(m[0]) == 2

    split = cm.Algebra(3, "split")
    assert split.unit_group_order() == 4

    # group orders for the q = 3 configuration
    info = json.loads(cm.grp_info(1, 3, "nonsplit"))
    assert info == {"G": 48, "Gflat": 24, "H": 8, "Hflat": 4, "Hplus": 48}, info

    # class data with and without a materialized carrier
    cd = json.loads(cm.class_data("gl", 2, 3))
    assert cd["num_classes"] == 8
    big = json.loads(cm.class_data("gl", 4, 3))
    assert big["order"] == 24261120
    assert sum(c["size"] for c in big["classes"]) == big["order"]

    # exact character tables
    t = cm.character_table("gl", 2, 3)
    assert t.degrees() == [1, 1, 2, 2, 2, 3, 3, 4], t.degrees()
    assert t.value(0, 0) == "1"
    s = cm.character_table("sl", 2, 3)
    assert s.degrees() == [1, 1, 1, 2, 2, 2, 3]

    # the multiplicity formula at q = 3, both algebra kinds
    for kind in ("nonsplit", "split"):
        rep = json.loads(cm.verify_main(1, 3, kind))
        assert rep["pass"], rep
        assert rep["distinguished_count"] > 0

    # Clifford restriction data
    cliff = json.loads(cm.verify_clifford(3))
    assert cliff["pass"]

    # Grassmannian orbits of the nonsplit H on F_2^4 and F_3^4
    o2 = cm.orbits(2, 2)
    assert [size for size, _ in o2] == [5, 30]
    o3 = cm.orbits(2, 3)
    assert [size for size, _ in o3] == [10, 120]
    assert all(size * stab == 5760 for size, stab in o3)
    assert [size for size, _ in cm.orbits(1, 2)] == [15]

    # Mackey oracle at q = 2 (fast) and the (1,3) vanishing
    mk = json.loads(cm.mackey_verify("22", 2))
    assert mk["oracle_pass"] and mk["multiplicity_bound_pass"], mk
    p13 = json.loads(cm.mackey_verify("13", 2))
    assert p13["vanishing_pass"] and p13["direct_crosscheck"], p13

    # conjecture sweep: clean nonsplit, witness expected in the split control
    conj = json.loads(cm.conjecture(1, 3, "nonsplit"))
    assert conj["pass"] and conj["max_dim"] <= 1
    control = json.loads(cm.conjecture(1, 3, "split"))
    assert not control["pass"] and control["max_dim"] >= 2

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
