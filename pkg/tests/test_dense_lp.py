"""Dense simplex used for the dual-side maximizations."""
import numpy as np
import pytest

import oracles
from wasserstat import dense_lp


class TestDualPolytopeMax:
    def test_closure_sensitive_instance(self):
        # squared line costs: the best potential for this direction leans on
        # the two-hop chain 0-1-2, not on the direct pair constraint alone
        c = np.array([[0.0, 1.0, 4.0], [1.0, 0.0, 1.0], [4.0, 1.0, 0.0]])
        g = np.array([0.3, 0.0, -0.3])
        got = dense_lp.max_over_dual_polytope(g, c)
        assert got == pytest.approx(0.6, abs=1e-10)

    def test_two_point_closed_form(self):
        c = np.array([[0.0, 3.0], [3.0, 0.0]])
        assert dense_lp.max_over_dual_polytope(np.array([0.4, -0.4]), c) == pytest.approx(1.2)

    def test_matches_reference_lp(self, rng):
        for _ in range(40):
            n = int(rng.integers(2, 8))
            c = oracles.random_cost(rng, n)
            g = oracles.random_balanced(rng, n)
            got = dense_lp.max_over_dual_polytope(g, c)
            want = oracles.dual_polytope_max(g, c)
            assert got == pytest.approx(want, abs=1e-8)


class TestDualFaceMax:
    def test_matches_reference_lp(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 6))
            c = oracles.random_cost(rng, n)
            r = oracles.random_measure(rng, n, floor=0.02)
            s = oracles.random_measure(rng, n, floor=0.02)
            wpp = oracles.vertex_minimum(r, s, c) if n <= 4 else oracles.transport_linprog(r, s, c)
            g = oracles.random_balanced(rng, n)
            h = oracles.random_balanced(rng, n)
            got = dense_lp.max_over_dual_face(g, h, r, s, c, wpp)
            want = oracles.dual_face_max(g, h, r, s, c, wpp)
            assert got == pytest.approx(want, abs=1e-7)
