import numpy as np
import pytest

from esp_design.dual import (
    a_of_H_closed_form,
    dual_bound,
    dual_certificate,
    dual_value,
    feasible_dual_point,
    h_of_a,
    solve_a_of_H,
)
from esp_design.errors import DomainError, InputError
from esp_design.objective import f_relaxed
from esp_design.relax import SolverConfig, solve_relaxation


def rand_pd(rng, m):
    B = rng.standard_normal((m, m))
    return B @ B.T + 0.1 * np.eye(m)


def rel_max(A, B):
    return np.max(np.abs(A - B)) / np.max(np.abs(B))


class TestClosedForms:
    def test_full_order_is_identity_map(self, rng):
        for m in range(1, 8):
            H = rand_pd(rng, m)
            assert rel_max(solve_a_of_H(H, m), H) <= 1e-8

    def test_order_one(self, rng):
        for m in range(1, 8):
            H = rand_pd(rng, m)
            h, U = np.linalg.eigh(H)
            root = (U * np.sqrt(h)) @ U.T
            expect = np.trace(root) * root
            assert rel_max(a_of_H_closed_form(H, 1), expect) <= 1e-12
            assert rel_max(solve_a_of_H(H, 1), expect) <= 1e-8

    def test_no_closed_form_in_between(self, rng):
        with pytest.raises(InputError):
            a_of_H_closed_form(rand_pd(rng, 4), 2)


class TestStationarity:
    def test_trace_and_residual(self, rng):
        for m in range(2, 9):
            H = rand_pd(rng, m)
            for l in range(1, m + 1):
                cert = dual_certificate(H, l)
                assert cert.stationarity_residual <= 1e-8
                assert cert.trace_residual <= 1e-8
                A = cert.a_of_H
                assert abs(np.trace(H @ np.linalg.inv(A)) - l) <= 1e-8

    def test_commutes_with_H(self, rng):
        H = rand_pd(rng, 6)
        for l in range(1, 7):
            A = solve_a_of_H(H, l)
            assert np.max(np.abs(A @ H - H @ A)) <= 1e-8 * np.max(np.abs(A @ H))

    def test_homogeneous(self, rng):
        H = rand_pd(rng, 5)
        assert rel_max(solve_a_of_H(3.0 * H, 3), 3.0 * solve_a_of_H(H, 3)) <= 1e-8

    def test_h_of_a_inverts(self, rng):
        for m in range(1, 7):
            H = rand_pd(rng, m)
            for l in range(1, m + 1):
                assert rel_max(h_of_a(solve_a_of_H(H, l), l), H) <= 1e-8


class TestValue:
    def test_identity_full_order(self):
        assert dual_value(np.eye(4), 4) == pytest.approx(0.0, abs=1e-12)

    def test_order_one_hand_instance(self):
        # a(H) = tr(H^1/2) H^1/2, so E_1(a(H)) = tr(H^1/2)^2 = 9
        assert dual_value(np.diag([1.0, 4.0]), 1) == pytest.approx(2 * np.log(3.0), abs=1e-12)

    def test_weak_duality(self, rng):
        for _ in range(5):
            X = rng.standard_normal((30, 4))
            for l in range(1, 5):
                rep = solve_relaxation(X, 8, l)
                H = feasible_dual_point(X, rep.final_weights, l)
                cert = dual_certificate(H, l, X)
                assert cert.max_row_constraint <= 1 + 1e-8
                assert dual_bound(H, l, 8) <= rep.objective + 1e-9
                # a random feasible H gives a valid but looser bound
                G = rand_pd(rng, 4)
                G /= np.max(np.einsum("ij,jk,ik->i", X, G, X))
                assert dual_bound(G, l, 8) <= f_relaxed(X, rep.final_weights, l) + 1e-9

    def test_tight_when_box_inactive(self, rng):
        # replicated rows keep every weight well below 1, so only the
        # budget constraint binds and the bound closes
        X = np.tile(rng.standard_normal((10, 3)), (20, 1))
        cfg = SolverConfig(tol_obj=1e-14, tol_grad=1e-10, max_iters=20000)
        for l in (1, 2, 3):
            rep = solve_relaxation(X, 10, l, cfg)
            assert rep.final_weights.max() < 0.5
            H = feasible_dual_point(X, rep.final_weights, l)
            assert 0 <= rep.objective - dual_bound(H, l, 10) <= 1e-4

def test_rejects_non_pd():
    with pytest.raises(DomainError):
        solve_a_of_H(np.diag([1.0, 0.0, 2.0]), 2)
    with pytest.raises(DomainError):
        dual_value(np.diag([1.0, -1.0]), 1)
    with pytest.raises(InputError):
        solve_a_of_H(np.eye(3), 4)
