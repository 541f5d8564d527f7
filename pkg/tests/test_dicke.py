import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_css, dense_evolve, dense_expect, dense_spin_matrices
from squeezestore import (
    ModelParams,
    QuenchProtocol,
    SpinState,
    build_hamiltonian,
    dicke_state,
    fidelity,
    make_even_ansatz,
    make_initial_css,
    make_odd_ansatz,
    spin_moments,
    squeezing_report,
)
from squeezestore.dicke import parity_residual


def test_model_params_validation():
    p = ModelParams(7, 2.5)
    assert p.j == 3.5
    assert p.dim == 8
    np.testing.assert_array_equal(p.m, np.arange(-3.5, 4))
    with pytest.raises(ValueError):
        ModelParams(0)
    with pytest.raises(ValueError):
        ModelParams(4, -1.0)
    with pytest.raises(ValueError):
        ModelParams(2.5)


def test_spin_state_rejects_wrong_length():
    with pytest.raises(ValueError):
        SpinState(np.ones(3), 2)


def test_quench_protocol_step_is_left_continuous():
    q = QuenchProtocol(10.8, t_off=0.011)
    assert q.coupling_at(0.0) == 10.8
    assert q.coupling_at(0.0109999) == 10.8
    assert q.coupling_at(0.011) == 0.0
    assert QuenchProtocol(3.0).coupling_at(1e9) == 3.0


class TestInitialCSS:
    def test_two_atoms_frozen(self):
        # brute force: expm(-i pi Jy/2)|1,-1> = (1/2, -1/sqrt2, 1/2)
        expected = np.array([0.5, -1 / np.sqrt(2), 0.5])
        np.testing.assert_allclose(dense_css(2), expected, atol=1e-14)
        c = make_initial_css(ModelParams(2)).amplitudes
        np.testing.assert_allclose(c, expected, atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3, 6, 11, 20])
    def test_matches_rotation_brute_force(self, n):
        c = make_initial_css(ModelParams(n)).amplitudes
        np.testing.assert_allclose(c, dense_css(n), atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=1, max_value=2000))
    def test_normalized_and_lowest_weight(self, n):
        state = make_initial_css(ModelParams(n))
        assert abs(state.norm() - 1) < 1e-12
        mom = spin_moments(state)
        j = n / 2
        assert mom.jx == pytest.approx(-j, rel=1e-12)
        assert abs(mom.jy) < 1e-10 * j and abs(mom.jz) < 1e-10 * j
        assert mom.jz2 == pytest.approx(j / 2, rel=1e-10)
        assert parity_residual(state) < 1e-12

    def test_thousand_atoms_is_unsqueezed(self):
        state = make_initial_css(ModelParams(1000))
        rep = squeezing_report(state)
        assert rep.xi == pytest.approx(1.0, abs=1e-10)
        mom = spin_moments(state)
        assert mom.jz2 == pytest.approx(250, rel=1e-12)
        assert mom.jy2 == pytest.approx(250, rel=1e-12)


class TestHamiltonian:
    def test_two_atoms(self):
        h = build_hamiltonian(ModelParams(2), 1.0)
        np.testing.assert_allclose(h.diagonal, [2, 0, 2])
        np.testing.assert_allclose(h.offdiagonal, [1 / np.sqrt(2)] * 2, rtol=1e-15)

    def test_zero_coupling_is_diagonal(self):
        p = ModelParams(9)
        h = build_hamiltonian(p, 0.0)
        np.testing.assert_array_equal(h.offdiagonal, 0)
        np.testing.assert_allclose(h.diagonal, 2 * p.m**2)

    @pytest.mark.parametrize("n,coupling", [(4, 1.3), (7, 10.0), (12, 0.2)])
    def test_matches_dense_operators(self, n, coupling):
        jx, _, jz = dense_spin_matrices(n)
        dense = build_hamiltonian(ModelParams(n), coupling).to_dense()
        np.testing.assert_allclose(dense, 2 * jz @ jz + coupling * jx, atol=1e-13)
        np.testing.assert_array_equal(dense, dense.T)
        assert np.all(np.triu(dense, 2) == 0)

    def test_coupling_defaults_to_params(self):
        h = build_hamiltonian(ModelParams(4, 3.0))
        assert h.coupling == 3.0

    def _sector_gap(self, n, coupling, sign):
        # project onto the (|m> + sign|-m>)/sqrt2 sector by explicit basis vectors
        dense = build_hamiltonian(ModelParams(n), coupling).to_dense()
        dim = n + 1
        basis = []
        for k in range(dim // 2 + dim % 2):
            v = np.zeros(dim)
            mirror = dim - 1 - k
            if k == mirror:
                if sign < 0:
                    continue
                v[k] = 1
            else:
                v[k], v[mirror] = 1 / np.sqrt(2), sign / np.sqrt(2)
            basis.append(v)
        q = np.array(basis).T
        w = np.linalg.eigvalsh(q.T @ dense @ q)
        return w[1] - w[0]

    def test_three_atom_level_spacing(self):
        # S = 2 sqrt(Omega^2 + 2 kappa Omega + 4 kappa^2) = 2 sqrt(12) at Omega = 2
        assert self._sector_gap(3, 2.0, -1) == pytest.approx(2 * np.sqrt(12), rel=1e-13)

    @pytest.mark.parametrize("coupling", [0.5, 1.0, 3.0])
    def test_two_atom_level_spacing(self, coupling):
        assert self._sector_gap(2, coupling, +1) == pytest.approx(
            2 * np.sqrt(coupling**2 + 1), rel=1e-13
        )


def _few_term_moments(state):
    """<Jz^2>, <Jy^2>, <JzJy+JyJz> summed over the nonzero amplitudes only."""
    j = state.j
    terms = {m: state.amplitude(m) for m in state.m if abs(state.amplitude(m)) > 0}

    def jp(m):  # <m+1|J+|m>
        return np.sqrt(max(j * (j + 1) - m * (m + 1), 0.0))

    jz2 = sum(abs(a) ** 2 * m * m for m, a in terms.items())
    jplus2 = sum(np.conj(terms.get(m + 2, 0)) * jp(m + 1) * jp(m) * a for m, a in terms.items())
    sym = sum(np.conj(terms.get(m + 1, 0)) * (2 * m + 1) * jp(m) * a for m, a in terms.items())
    jy2 = 0.5 * (j * (j + 1) - jz2) - 0.5 * jplus2.real
    return jz2, jy2, sym.imag


class TestAnsatz:
    def test_even_alpha_zero_is_central_dicke_state(self):
        p = ModelParams(1000)
        state = make_even_ansatz(p, 0.0, 1.234)
        assert fidelity(state, dicke_state(p, 0)) == pytest.approx(1.0, abs=1e-15)
        rep = squeezing_report(state)
        assert rep.xi == 0.0

    def test_even_alpha_half_pi(self):
        p = ModelParams(10)
        state = make_even_ansatz(p, np.pi / 2, 0.0)
        assert state.norm() == pytest.approx(1.0, abs=1e-15)
        assert state.amplitude(1) == pytest.approx(1 / np.sqrt(2))
        assert state.amplitude(-1) == pytest.approx(1 / np.sqrt(2))
        assert state.amplitude(0) == pytest.approx(0.0, abs=1e-16)

    def test_odd_alpha_zero(self):
        p = ModelParams(5)
        state = make_odd_ansatz(p, 0.0, 0.7)
        expected = np.zeros(6, dtype=complex)
        expected[[2, 3]] = [-1 / np.sqrt(2), 1 / np.sqrt(2)]  # m = -1/2, +1/2
        np.testing.assert_allclose(state.amplitudes, expected, atol=1e-16)

    def test_odd_three_atoms_is_exact_squeezed_state(self):
        p = ModelParams(3)
        s = 2 * np.sqrt(12)
        evolved = dense_evolve(3, 2.0, dense_css(3), np.pi / s)
        target = make_odd_ansatz(p, 0.0, 0.0)
        assert fidelity(SpinState(evolved, 1.5), target) > 1 - 1e-12

    @settings(max_examples=50, deadline=None)
    @given(
        st.integers(min_value=1, max_value=600).map(lambda k: 2 * k + 1),
        st.floats(-np.pi, np.pi),
        st.floats(-np.pi, np.pi),
    )
    def test_odd_normalized(self, n, alpha, phi):
        state = make_odd_ansatz(ModelParams(n), alpha, phi)
        assert abs(state.norm() - 1) < 1e-12

    def test_parity_mismatch_rejected(self):
        with pytest.raises(ValueError):
            make_even_ansatz(ModelParams(5), 0.1, 0.1)
        with pytest.raises(ValueError):
            make_odd_ansatz(ModelParams(4), 0.1, 0.1)
        with pytest.raises(ValueError):
            make_odd_ansatz(ModelParams(1), 0.1, 0.1)

    @pytest.mark.parametrize("n", [2, 10, 1000, 3, 11, 1001])
    @pytest.mark.parametrize("alpha,phi", [(0.1, 0.3), (0.7, 2.0), (1.3, -1.1)])
    def test_report_matches_few_term_expansion(self, n, alpha, phi):
        p = ModelParams(n)
        state = make_even_ansatz(p, alpha, phi) if n % 2 == 0 else make_odd_ansatz(p, alpha, phi)
        jz2, jy2, b = _few_term_moments(state)
        rep = squeezing_report(state, check_mean_spin=False)
        scale = jz2 + jy2
        assert rep.a_moment == pytest.approx(jz2 - jy2, abs=1e-12 * scale)
        assert rep.b_moment == pytest.approx(b, abs=1e-12 * scale)
        assert rep.c_moment == pytest.approx(jz2 + jy2, rel=1e-12)

    def test_even_closed_form(self):
        # hand expansion: <Jz^2> = s^2, Re<J+^2> = j(j+1)s^2/2, B = -sqrt(2j(j+1)) s c sin(phi)
        p = ModelParams(1000)
        j, alpha, phi = p.j, 0.4, 0.9
        s, c = np.sin(alpha), np.cos(alpha)
        jy2 = 0.5 * (j * (j + 1) - s * s) - 0.25 * j * (j + 1) * s * s
        rep = squeezing_report(make_even_ansatz(p, alpha, phi), check_mean_spin=False)
        assert rep.a_moment == pytest.approx(s * s - jy2, rel=1e-12)
        assert rep.b_moment == pytest.approx(-np.sqrt(2 * j * (j + 1)) * s * c * np.sin(phi), rel=1e-12)
        assert rep.jx_mean == pytest.approx(np.sqrt(2 * j * (j + 1)) * s * c * np.cos(phi), rel=1e-12)

    @pytest.mark.parametrize("n", [1000, 1001])
    def test_surface_minimized_at_small_alpha(self, n):
        p = ModelParams(n)
        alphas = np.linspace(0, 1.0, 11)
        phis = np.linspace(0, 2 * np.pi, 13)
        surface = np.array([
            [squeezing_report(make_ansatz_for(p, a, f), check_mean_spin=False).xi for f in phis]
            for a in alphas
        ])
        assert np.argmin(surface.min(axis=1)) == 0
        assert np.all(np.diff(surface.max(axis=1)) > 0)
        # weak phase dependence near alpha = 0
        assert np.ptp(surface[1]) < 0.01
        assert np.ptp(surface[1]) < np.ptp(surface[-1])


def make_ansatz_for(p, a, f):
    return make_even_ansatz(p, a, f) if p.is_even else make_odd_ansatz(p, a, f)


class TestFidelity:
    def test_self(self):
        state = make_initial_css(ModelParams(30))
        assert fidelity(state, state) == pytest.approx(1.0, abs=1e-14)

    def test_orthogonal_dicke_states(self):
        p = ModelParams(6)
        assert fidelity(dicke_state(p, 1), dicke_state(p, -2)) == 0.0

    def test_global_phase_invariant(self):
        state = make_initial_css(ModelParams(8))
        rotated = SpinState(np.exp(0.77j) * state.amplitudes, state.j)
        assert fidelity(state, rotated) == pytest.approx(1.0, abs=1e-14)

    def test_two_atoms_reach_central_state(self):
        s = 2 * np.sqrt(2)
        evolved = SpinState(dense_evolve(2, 1.0, dense_css(2), np.pi / s), 1)
        assert fidelity(evolved, dicke_state(ModelParams(2), 0)) > 1 - 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fidelity(make_initial_css(ModelParams(2)), make_initial_css(ModelParams(3)))


def test_dense_moment_oracle_agrees():
    p = ModelParams(9)
    rng = np.random.default_rng(3)
    c = rng.normal(size=10) + 1j * rng.normal(size=10)
    c /= np.linalg.norm(c)
    state = SpinState(c, p.j)
    jx, jy, jz = dense_spin_matrices(9)
    mom = spin_moments(state)
    assert mom.jx == pytest.approx(dense_expect(jx, c).real, abs=1e-12)
    assert mom.jy == pytest.approx(dense_expect(jy, c).real, abs=1e-12)
    assert mom.jz2 == pytest.approx(dense_expect(jz @ jz, c).real, abs=1e-12)
    assert mom.jx2 == pytest.approx(dense_expect(jx @ jx, c).real, abs=1e-12)
    assert mom.jy2 == pytest.approx(dense_expect(jy @ jy, c).real, abs=1e-12)
    assert mom.jzjy == pytest.approx(dense_expect(jz @ jy + jy @ jz, c).real, abs=1e-12)
