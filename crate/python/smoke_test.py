"""Smoke test for the pypsatz extension module."""

import pypsatz

WORKED = """
vars 1 x;
target matrix [[2, x], [x, 1 + x^2]];
"""

INTERVAL = """
vars 1;
constraint x1;
constraint 1 - x1;
target poly 2 + x1 - x1^2;
"""

TWO = """
vars 1;
target matrix [[2, 0], [0, 2]];
"""


def main():
    p = pypsatz.Poly("1 + x1^2", 1)
    q = pypsatz.Poly("x1 - 1", 1)
    assert str(p * q) == "x1^3 - x1^2 + x1 - 1", str(p * q)
    assert p.eval(["1/2"]) == "5/4"
    assert (q ** 2).degree() == 2

    m = pypsatz.MatPoly("[[2, x1], [x1, 1 + x1^2]]", 1)
    assert m.shape == (2, 2) and m.is_symmetric()
    assert m.eval(["3"]) == [["2", "3"], ["3", "10"]]

    cert = pypsatz.certify(WORKED)
    assert cert.kind == "matrix-krivine"
    assert cert.multiplier() == "8*x^4 + 40*x^2 + 48", cert.multiplier()
    assert cert.verify(WORKED)
    assert pypsatz.verify(WORKED, cert.text())
    tampered = cert.text().replace("term 40 [[x]]", "term 41 [[x]]")
    assert tampered != cert.text()
    assert not pypsatz.verify(WORKED, tampered)

    sc = pypsatz.scalar_certify(INTERVAL, strategy="numeric")
    assert sc.kind == "scalar-krivine" and sc.verify(INTERVAL)

    eps = pypsatz.eps_certify(TWO)
    assert eps.eps == "1" and eps.verify(TWO)

    k, l, c = pypsatz.lemma_bound("vars 1; target matrix [[x1, 1]];")
    assert l == 1 and c == f"{k}*x1^2 + {k}", (k, l, c)

    try:
        pypsatz.certify("vars 1; target matrix [[x1, 1], [2, x1]];")
    except ValueError:
        pass
    else:
        raise AssertionError("non-symmetric target accepted")

    print("pypsatz smoke test passed")


if __name__ == "__main__":
    main()
