import jax.numpy as jnp
import numpy as np
import pytest

from conftest import rect, unit_square
from oracles import lp_verdicts, random_convex_polygon, random_pair, true_gap
from parkopt.formulations import (ALL_KINDS, EQ18_DUAL_MAX, FormulationKind, Margins, ShapeMismatch,
                                  aux_count, aux_layout, build_block, build_containment, build_eq14,
                                  build_eq16, build_eq17, build_eq18, build_eq19, build_eq21,
                                  dual_certificate, initial_aux, point_certificate_feasible,
                                  residual_counts)
from parkopt.geometry import RigidTransform, sat_disjoint, transform
from parkopt.scenarios import builtin_scenario
from parkopt.vehicle import body_polygon

TINY = Margins(1e-6, 1e-6, 1e-6)


def _rows(P):
    return jnp.asarray(P.normals), jnp.asarray(P.offsets)


class TestCounts:
    @pytest.mark.parametrize("nv,no", [(3, 3), (4, 4), (5, 7), (8, 3)])
    def test_aux_count(self, nv, no):
        assert aux_count("eq17", nv, no) == 3
        assert aux_count("eq16", nv, no) == 4
        assert aux_count("eq14", nv, no) == 2 * nv * no
        for k in ("eq18", "eq19", "eq21"):
            assert aux_count(k, nv, no) == nv + no

    def test_examples(self):
        assert aux_count(FormulationKind.EQ14, 4, 4) == 32
        assert aux_count(FormulationKind.EQ18, 5, 6) == 11

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_layout_lengths(self, kind):
        lay = aux_layout(kind, 4, 5)
        assert lay.per_pair_count == aux_count(kind, 4, 5)
        assert lay.lower_bounds.shape == lay.upper_bounds.shape == (lay.per_pair_count,)
        assert np.all(lay.lower_bounds < lay.upper_bounds)
        assert EQ18_DUAL_MAX > 0

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_residual_counts_match_builder(self, kind):
        body = body_polygon(np.zeros(5), builtin_scenario("vertical").vehicle)
        obs = unit_square(8, 0)
        aux = jnp.asarray(initial_aux(kind, body, obs))
        blk = build_block(kind, jnp.zeros(3), aux, *_rows(obs), jnp.asarray(obs.vertices),
                          jnp.asarray(body.vertices))
        assert (blk.n_ineq, blk.n_eq) == residual_counts(kind, 4, 4)

    def test_eq14_count(self):
        assert residual_counts("eq14", 4, 4) == (32, 8)

    def test_parse(self):
        assert FormulationKind.parse("EQ17") is FormulationKind.EQ17
        assert FormulationKind.EQ21.tag == "eq21"
        with pytest.raises(ValueError):
            FormulationKind.parse("eq15")


class TestPointCertificate:
    def test_outside_vertical_o1(self):
        O1 = builtin_scenario("vertical").obstacles[0]
        ok, lam = point_certificate_feasible((6, -5), O1)
        assert ok and np.count_nonzero(lam) == 1
        i = int(np.argmax(lam))
        np.testing.assert_allclose(O1.normals[i], [1, 0])
        assert (O1.normals @ [6, -5] - O1.offsets) @ lam == pytest.approx(1.0)

    def test_inside_and_boundary(self):
        assert point_certificate_feasible((0.5, 0.5), unit_square()) == (False, None)
        assert point_certificate_feasible((1.0, 0.5), unit_square()) == (False, None)

    def test_margin_scaling(self):
        ok, lam = point_certificate_feasible((1 + 1e-6, 0.5), unit_square(), eps_sep=1e-4)
        assert ok and (unit_square().normals @ (1 + 1e-6, 0.5) - unit_square().offsets) @ lam >= 1e-4 - 1e-12


class TestBuilders:
    def test_eq16_example(self):
        V, O = unit_square(3, 0).vertices, unit_square().vertices
        blk = build_eq16(jnp.asarray(V), jnp.asarray(O), jnp.array([1.0, 0.0]), 2.5, 1.5)
        assert blk.feasible() and blk.n_ineq == 9 and blk.n_eq == 1

    def test_touching_infeasible(self):
        V, O = unit_square(1, 0).vertices, unit_square().vertices
        # best possible slab along x has zero width
        blk = build_eq16(jnp.asarray(V), jnp.asarray(O), jnp.array([1.0, 0.0]), 1.0, 1.0)
        assert not blk.feasible()
        assert not lp_verdicts(unit_square(1, 0), unit_square())["eq16"][0]

    def test_eq17_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            build_eq17(jnp.zeros((4, 2)), jnp.zeros((4, 2)), jnp.zeros(3), 0.0)
        with pytest.raises(ShapeMismatch):
            build_eq14(jnp.zeros((4, 2)), jnp.zeros((4, 2)), jnp.zeros(4), jnp.zeros((4, 2)),
                       jnp.zeros((4, 3)), jnp.zeros((4, 4)))
        with pytest.raises(ShapeMismatch):
            build_block("eq18", jnp.zeros(3), jnp.zeros(7), jnp.zeros((4, 2)), jnp.zeros(4),
                        jnp.zeros((4, 2)), jnp.zeros((4, 2)))

    def test_containment(self):
        sc = builtin_scenario("vertical")
        V = body_polygon(sc.init, sc.vehicle).vertices
        blk = build_containment(jnp.asarray(V), *_rows(sc.environment))
        assert blk.n_ineq == 16 and blk.feasible()
        blk = build_containment(jnp.array([[0.0, 8.1], [0, 0], [1, 0], [1, 1]]), *_rows(sc.environment))
        assert float(jnp.min(blk.ineq)) == pytest.approx(-0.1)

    def test_eq21_identity_pose_equals_eq19(self, rng):
        for _ in range(50):
            P, Q = random_pair(rng)
            lam, mu = rng.uniform(0, 1, Q.n_edges), rng.uniform(0, 1, P.n_edges)
            a = build_eq19(*_rows(P), *_rows(Q), lam, mu)
            b = build_eq21(*_rows(P), *_rows(Q), jnp.eye(2), jnp.zeros(2), lam, mu)
            np.testing.assert_array_equal(np.asarray(a.ineq), np.asarray(b.ineq))
            np.testing.assert_array_equal(np.asarray(a.eq), np.asarray(b.eq))


def _check_witness(kind, P, Q, x, pose=None):
    """Plug an LP solution into the package's builder."""
    V, O = jnp.asarray(P.vertices), jnp.asarray(Q.vertices)
    nv, no = P.n_edges, Q.n_edges
    if kind == "eq14":
        blk = build_eq14(V, *_rows(Q), O, x[: nv * no].reshape(nv, no), x[nv * no:].reshape(no, nv), TINY)
    elif kind in ("eq16", "eq17"):
        s = np.linalg.norm(x[:2])
        y = x / s
        blk = build_eq16(V, O, y[:2], y[2], y[3], TINY) if kind == "eq16" else build_eq17(V, O, y[:2], y[2], TINY)
    elif kind == "eq21":
        R, T, P0 = pose
        blk = build_eq21(*_rows(P0), *_rows(Q), R, T, x[:no], x[no:], TINY)
    else:
        fn = build_eq18 if kind == "eq18" else build_eq19
        blk = fn(*_rows(P), *_rows(Q), x[:no], x[no:], TINY)
    return bool(np.all(np.asarray(blk.ineq) >= -1e-9) and np.all(np.abs(np.asarray(blk.eq)) <= 1e-6))


def test_lp_oracle_agrees_with_sat(rng):
    n_disjoint = 0
    n_pairs = 0
    while n_pairs < 500:
        P0, Q = random_pair(rng, spread=1.5)
        X = RigidTransform.from_pose(*rng.uniform(-0.3, 0.3, 2), rng.uniform(-np.pi, np.pi))
        P = transform(P0, X)
        if abs(true_gap(P, Q)) < 1e-3:
            continue
        sat = sat_disjoint(P, Q)[0]
        n_pairs += 1
        n_disjoint += sat
        for kind, (feasible, x) in lp_verdicts(P, Q, (X.rotation, X.translation, P0)).items():
            assert feasible == sat, kind
            if feasible:
                assert _check_witness(kind, P, Q, x, (X.rotation, X.translation, P0)), kind
    assert 100 < n_disjoint < 400


def test_overlap_blocks_infeasible():
    A, B = rect(-2, 2, -0.5, 0.5), rect(-0.5, 0.5, -2, 2)
    assert not any(f for f, _ in lp_verdicts(A, B).values())


class TestProperties:
    def test_vertices_vs_convex_combinations(self, rng):
        for _ in range(200):
            P = random_convex_polygon(rng, center=rng.uniform(-1, 1, 2))
            a = rng.normal(size=2)
            c = rng.uniform(-1.5, 1.5)
            all_vertices = bool(np.all(P.vertices @ a > c))
            w = rng.dirichlet(np.ones(P.n_edges), size=100)
            all_combos = bool(np.all((w @ P.vertices) @ a > c))
            # vertices are themselves convex combinations, so the two tests agree
            assert all_vertices == (all_combos and bool(np.all(np.eye(P.n_edges) @ P.vertices @ a > c)))
            if all_vertices:
                assert all_combos

    def test_line_scale_invariance(self, rng):
        for _ in range(50):
            P, Q = random_pair(rng)
            ok, axis = sat_disjoint(P, Q)
            if not ok:
                continue
            lam, mu = axis
            for c in (0.1, 3.0, 17.0):
                blk = build_eq17(jnp.asarray(P.vertices), jnp.asarray(Q.vertices), c * lam, c * mu,
                                 Margins(0.0, 0.0, 0.0))
                assert np.all(np.asarray(blk.ineq) > 0)
                assert float(blk.eq[0]) == pytest.approx(c * c - 1)

    def test_eq14_columns_normalised(self, rng):
        P, Q = unit_square(3, 0), unit_square()
        feasible, x = lp_verdicts(P, Q)["eq14"]
        assert feasible
        Lam, Om = x[:16].reshape(4, 4), x[16:].reshape(4, 4)
        np.testing.assert_allclose(Lam.sum(axis=0), 1, atol=1e-9)
        np.testing.assert_allclose(Om.sum(axis=0), 1, atol=1e-9)
        blk = build_eq14(jnp.asarray(P.vertices), *_rows(Q), jnp.asarray(Q.vertices), Lam * 2, Om)
        assert not blk.feasible(tol=1e-9)  # column sums of 2 violate the equalities


class TestInitialAux:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_feasible_on_disjoint(self, kind, rng):
        lay = aux_layout(kind, 4, 4)
        for _ in range(30):
            P = body_polygon(np.r_[rng.uniform(-3, 3, 2), rng.uniform(-np.pi, np.pi), 0, 0],
                             builtin_scenario("vertical").vehicle)
            Q = unit_square(*rng.uniform(-6, 6, 2))
            aux = initial_aux(kind, P, Q)
            assert aux.shape == (lay.per_pair_count,)
            assert np.all(aux >= lay.lower_bounds) and np.all(aux <= lay.upper_bounds)
            ok = sat_disjoint(P, Q)[0]
            if ok and kind is not FormulationKind.EQ14 and abs(true_gap(P, Q)) > 0.05:
                blk = build_block(kind, jnp.zeros(3), jnp.asarray(aux), *_rows(Q), jnp.asarray(Q.vertices),
                                  jnp.asarray(P.vertices), TINY)
                assert np.all(np.asarray(blk.ineq) >= -1e-9), kind

    def test_dual_certificate(self):
        P, Q = unit_square(3, 0), unit_square()
        x = dual_certificate(P, Q)
        assert x is not None and np.all(x >= 0)
        np.testing.assert_allclose(np.linalg.norm(Q.normals.T @ x[:4]), 1.0)
        assert -(Q.offsets @ x[:4]) - P.offsets @ x[4:] == pytest.approx(2.0)  # the gap
        assert dual_certificate(unit_square(0.5, 0), Q) is None
