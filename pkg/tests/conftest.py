import numpy as np
import pytest

from tsinvest.data import build_panels, filter_short_series, investor_centric_split, training_vocabulary
from tsinvest.synthetic import SynthConfig, generate


def random_batch(rng, b=4, t=24, k=16, n_cat=5):
    """A plausible (x, mask) model input batch with left-padded masks."""
    x = rng.normal(size=(b, t, k))
    x[..., 0] = rng.integers(0, n_cat, size=(b, t))
    mask = np.zeros((b, t))
    for i in range(b):
        start = rng.integers(0, t - 1)
        mask[i, start:] = 1.0
        x[i, :start, :] = -1.0
        x[i, :start, 0] = 1.0
    return x, mask


@pytest.fixture(scope="session")
def small_dataset():
    """150 synthetic companies split and panelized once for the session."""
    records = filter_short_series(generate(SynthConfig(n_companies=150, seed=11)))
    split = investor_centric_split(records, (0.7, 0.15, 0.15), seed=0)
    vocab = training_vocabulary(split.train)
    panels = {part: build_panels(split.part(part), vocab, "vc")
              for part in split.parts}
    return panels, vocab
