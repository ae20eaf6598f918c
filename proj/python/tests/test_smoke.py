import json

import numpy as np
import pytest

import relaxometer as rx


def test_goe_sample_is_symmetric_and_reproducible():
    a = rx.sample("GOE", 40, seed=11, realization=2)
    b = rx.sample("GOE", 40, seed=11, realization=2)
    assert a.shape == (40, 40)
    assert np.array_equal(a, b)
    assert np.allclose(a, a.T)
    assert not np.array_equal(a, rx.sample("GOE", 40, seed=11, realization=3))


def test_gue_sample_is_hermitian():
    h = rx.sample("GUE", 24, seed=5)
    assert np.iscomplexobj(h)
    assert np.allclose(h, h.conj().T)


def test_rp_needs_gamma():
    with pytest.raises(ValueError):
        rx.sample("RP-GOE", 16)
    assert rx.sample("RP-GOE", 16, gamma=1.5).shape == (16, 16)


def test_cavg_and_sigma2_for_basis_eigenvectors_vanish():
    d = rx.eigh(np.diag(np.arange(8.0)))
    f = rx.fluctuations(d, "1/2")
    assert f["c_avg"] == pytest.approx(0.0, abs=1e-14)
    assert f["sigma2"] == pytest.approx(0.0, abs=1e-14)


def test_correlation_starts_at_zero_and_averages_to_cavg():
    d = rx.eigh(rx.sample("GOE", 32, seed=1))
    c = rx.correlation_series(d, np.linspace(0.0, 2000.0, 4001))
    assert c[0] == 0.0
    assert np.mean(c[200:]) == pytest.approx(rx.c_avg(d), rel=0.02)


def test_partition_by_indices_matches_leading():
    d = rx.eigh(rx.sample("GOE", 16, seed=2))
    lead = rx.c_avg(d, "1/4")
    assert rx.c_avg(d, [0, 1, 2, 3]) == pytest.approx(lead, abs=1e-14)
    assert rx.c_avg(d, rx.Partition.leading(16, 0.25)) == pytest.approx(lead, abs=1e-14)


def test_bad_fraction_is_rejected():
    d = rx.eigh(rx.sample("GOE", 10, seed=2))
    with pytest.raises(ValueError):
        rx.c_avg(d, "1/3")


def test_baker_unitary_and_parity_sectors():
    u = rx.baker_unitary(24, "1/2")
    assert np.allclose(u @ u.conj().T, np.eye(24), atol=1e-12)
    plus, minus = rx.baker_sectors(24)
    assert len(plus) + len(minus) == 24
    full = rx.eig_unitary(u)
    pooled = sorted(np.concatenate([plus.levels, minus.levels]))
    assert np.allclose(pooled, sorted(full.levels), atol=1e-9)


def test_ising_sectors_cover_the_chain():
    hx, hz = rx.ising_preset("bch")
    plus, minus = rx.ising_sectors(6, hx, hz)
    assert (len(plus), len(minus)) == (36, 28)
    full = np.linalg.eigvalsh(rx.ising_hamiltonian(6, hx, hz))
    assert np.allclose(sorted(np.concatenate([plus.levels, minus.levels])), full, atol=1e-10)


def test_ensemble_average_reproducible_across_threads():
    a = rx.ensemble_average("GOE", 24, 12, seed=9, threads=1)
    b = rx.ensemble_average("GOE", 24, 12, seed=9, threads=3)
    assert a["c_avg"]["mean"] == b["c_avg"]["mean"]
    assert a["c_avg_samples"] == b["c_avg_samples"]
    # realization r of the ensemble is sample(..., realization=r)
    first = rx.fluctuations(rx.eigh(rx.sample("GOE", 24, seed=9, realization=0)))
    assert a["c_avg_samples"][0] == first["c_avg"]


def test_gue_identity_is_exact():
    assert rx.gue_cavg_identity(10, "1/2") == (10, 11)
    assert rx.gue_cavg_identity(12, "1/4") == (12, 13)


def test_power_law_fit_recovers_exponent():
    dims = [64, 128, 256, 512, 1024]
    vals = [1 - 2.0 * d**-0.75 for d in dims]
    fit = rx.power_law_fit(dims, vals, deviation=True, d_min=0)
    assert fit["a"] == pytest.approx(2.0, rel=1e-10)
    assert fit["b"] == pytest.approx(0.75, rel=1e-10)


def test_unfolded_spacings_have_unit_mean():
    levels = np.linalg.eigvalsh(rx.sample("GOE", 400, seed=4))
    s = rx.unfold(levels.tolist())
    assert np.mean(s) == pytest.approx(1.0, abs=1e-12)
    assert rx.ks_distance(s, "wigner") < rx.ks_distance(s, "poisson")


def test_beta_moment_matches_sphere_value():
    d = 8
    assert rx.beta_moment(1.0, d - 1.0, 2) == pytest.approx(2.0 / (d * (d + 1)))


def test_run_verify_and_figures(tmp_path):
    cfg = {
        "kind": "rmt",
        "ensemble": "GUE",
        "sizes": [16, 32],
        "realizations": [6, 4],
        "seed": 3,
        "output": str(tmp_path / "out"),
    }
    path = tmp_path / "rmt.json"
    path.write_text(json.dumps(cfg))
    summary = rx.run(str(path), threads=1)
    assert summary["files"] == ["rmt.csv"]
    checks, failures = rx.verify(str(tmp_path / "out"), "rmt/GUE/f=1/2/D=32")
    assert checks > 0 and failures == []
    written = rx.figures(str(tmp_path / "out"), "fig1")
    assert any(str(p).endswith("fig1_deviation.dat") for p in written)
    with pytest.raises(rx.MissingInputs):
        rx.figures(str(tmp_path / "out"), "fig2")
