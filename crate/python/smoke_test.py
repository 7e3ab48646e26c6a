"""Smoke test for the pytiplan extension. Run after `pip install crates/py`."""

from fractions import Fraction

import pytiplan as tp


def main() -> None:
    g = tp.Graph.akerlof(6, "1/2")
    assert g.dist() > 0
    assert tp.cost_ratio(g, "1/2") == Fraction(16)
    cert = tp.certificate(g, Fraction(1, 2))
    assert cert["identities_hold"]
    assert cert["ratio_bound"] >= Fraction(16)

    again = tp.Graph.parse(g.to_text())
    assert again.nodes() == g.nodes() and again.edges() == g.edges()

    r = tp.Graph.random(8, 42, "1/2")
    assert r.to_text() == tp.Graph.random(8, 42, "1/2").to_text()
    walk = tp.simulate(r, "1/2")
    assert walk["nodes"][0] == "s"

    one = tp.Graph.parse("graph one\nnode s\nnode t\nedge s t 1\nstart s\ntarget t\n")
    assert tp.find_motivating_subgraph(one, "1/2", 1) is None
    assert tp.find_motivating_subgraph(one, "1/2", 2, minimal=True) == [("s", "t")]
    sol = tp.min_total_reward(one, "1/2", 1)
    assert sol["objective"] == Fraction(2) and sol["trajectory"]["reached"]
    assert tp.simulate(one, "1/2", rewards={"t": 2})["reached"]
    assert tp.min_total_reward(one, "1/2", 2, bound=1) is None

    cnf = "p cnf 4 2\n1 -2 3 0\n2 -3 4 0\n"
    assert tp.sat(cnf) is not None
    mms = tp.verify_mms(cnf, "9/10")
    assert mms["sat"] and mms["found"]
    assert not tp.verify_mms("p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n", "9/10")["found"]

    fwd = tp.mtr_forward(cnf, "1/2")
    assert fwd["reached"] and fwd["lead_to_hold"] and fwd["objective"] == fwd["budget"]
    _, relations = tp.mtr_gadget(cnf, "2/3")
    assert all(r[-1] for r in relations)

    for bad in (lambda: tp.cost_ratio(g, 0.5), lambda: tp.Graph.parse("nonsense")):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")
    print("smoke test ok")


if __name__ == "__main__":
    main()
