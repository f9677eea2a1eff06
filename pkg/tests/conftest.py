import numpy as np
import pytest

from src.mgpll.model import MgpllModel, PLBatch, PriorSampler
from src.mgpll.pldata import PLDataset, normalize_features

from toydata import TOY_CONFIG, three_class, two_blobs


@pytest.fixture
def blobs() -> PLDataset:
    return two_blobs()


@pytest.fixture
def blobs_normalized() -> PLDataset:
    return normalize_features(two_blobs())


@pytest.fixture
def three() -> PLDataset:
    return three_class()


@pytest.fixture
def toy_model() -> MgpllModel:
    return MgpllModel.build(3, 2, TOY_CONFIG, rng=7)


@pytest.fixture
def toy_batch() -> PLBatch:
    rng = np.random.default_rng(3)
    features = rng.uniform(-1.0, 1.0, size=(4, 3))
    candidates = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 1.0]])
    return PLBatch(features, candidates)


@pytest.fixture
def toy_sampler() -> PriorSampler:
    return PriorSampler.from_seed(2, TOY_CONFIG.noise_dim, seed=11)
