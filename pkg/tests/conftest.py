import numpy as np
import pytest

from peersel import (
    SelectorConfig,
    TrainConfig,
    generate_gaussian_mixture,
    inject_idn_noise,
    pass_train,
    split,
)


@pytest.fixture(scope="session")
def mini_idn_run():
    """Reduced-scale instance-dependent-noise training run shared by tests.

    Same shape as the bundled recipe (5 classes, d=10, 40% IDN), scaled down
    for speed: n=1500, 5 warmup + 15 selection epochs.
    """
    seed = 3
    ds = generate_gaussian_mixture(1500, 10, 5, 6.0, seed=seed)
    ds = inject_idn_noise(ds, 0.4, seed=seed)
    parts = split(ds, 0.2, seed=seed)
    selector_cfg = SelectorConfig(warmup_epochs=5, total_epochs=20)
    train_cfg = TrainConfig(learning_rate=0.1, weight_decay=1e-4)
    ensemble, records = pass_train(ds, parts.train, selector_cfg, train_cfg, master_seed=seed)
    return {
        "seed": seed,
        "ds": ds,
        "split": parts,
        "selector_cfg": selector_cfg,
        "train_cfg": train_cfg,
        "ensemble": ensemble,
        "records": records,
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
