import math

import numpy as np
import pytest

import deepbarrier as db

TINY = {"steps": "10", "batch": "32", "mini_batches": "20", "layers": "2", "units": "3", "seed": "5"}


def test_closed_forms():
    price, delta = db.bs_vanilla(100.0, 100.0, 0.05, 0.2, 0.5)
    assert price == pytest.approx(6.888728577680624, rel=1e-12)
    assert delta == pytest.approx(0.5977344689084383, rel=1e-12)
    price, _ = db.barrier_up_out_call(100.0, 100.0, 150.0, 0.05, 0.2, 0.5)
    assert price == pytest.approx(6.612890075877474, rel=1e-12)
    assert db.barrier_up_out_call(150.0, 100.0, 150.0, 0.05, 0.2, 0.5) == (0.0, 0.0)
    assert db.bridge_no_breach_prob(145.0, 148.0, 150.0, 0.2, 0.01) == pytest.approx(
        1.0 - math.exp(-2.0 * math.log(150 / 145) * math.log(150 / 148) / (0.04 * 0.01)), rel=1e-12
    )


def test_validation_maps_to_value_error():
    with pytest.raises(ValueError, match="vol must be >= 0"):
        db.normalize_config("vol: -0.1\n")
    with pytest.raises(db.ValidationError):
        db.bs_vanilla(-1.0, 100.0, 0.05, 0.2, 0.5)


def test_config_round_trip():
    text = db.normalize_config("steps: 50\nvol: 0.25\n")
    assert db.normalize_config(text) == text
    assert db.config_hash("vol: 0.25\nsteps: 50\n") == db.config_hash(text)
    assert "steps: 20" in db.normalize_config(text, {"steps": "20"})


def test_paths_and_mc():
    paths = db.simulate_paths("steps: 20\nvol: 0\n", np.array([100.0, 120.0]), 3)
    assert paths.shape == (21, 2)
    assert paths[-1, 0] == pytest.approx(100.0 * (1 + 0.05 * 0.5 / 20) ** 20, rel=1e-12)
    price, se = db.mc_price("steps: 50\n", spot=100.0, paths=20000, bridge=True, seed=2)
    assert abs(price - 6.612890075877474) < 4 * se + 0.02


def test_train_price_hedge_and_reload(tmp_path):
    seen = []
    model = db.train(overrides=TINY, progress=lambda step, loss: seen.append(step), progress_stride=10)
    assert seen == [10, 20]
    assert model.history.shape == (20, 4)
    assert np.all(np.isfinite(model.history))
    prices = model.price(np.array([80.0, 100.0, 120.0]))
    assert prices.shape == (3,) and np.all(np.isfinite(prices))
    stats = model.hedge(paths=200)
    assert stats["learned"]["count"] == 200
    assert "analytic" in stats
    path = tmp_path / "model.bin"
    model.save(path)
    again = db.Model.load(path)
    assert np.array_equal(again.price(np.array([100.0])), model.price(np.array([100.0])))
    assert again.config == model.config
    # Same seed and config: bit-identical training.
    twin = db.train(overrides=TINY)
    assert np.array_equal(twin.history, model.history)


def test_cli_entry(tmp_path):
    code, out, err = db.run_cli(["oracle", "--x0", "100", "--out-dir", str(tmp_path)])
    assert code == 0, err
    assert "barrier_price:" in out
    code, _, err = db.run_cli(["oracle", "--vol=-1", "--out-dir", str(tmp_path)])
    assert code == 3 and "vol" in err
