import numpy as np

from app.driver.store import SampleStore
from app.space.params import encode_many
from app.surrogate.gbdt import GBDTModel, TrainConfig, fit


def store_dataset(store: SampleStore) -> tuple[np.ndarray, np.ndarray]:
    """Encoded configurations and objectives of every record with a finite objective.

    Failed samples carry the clip/penalty objective and stay in the dataset so
    the surrogate learns to avoid their regions.
    """
    records = [r for r in store if np.isfinite(r.objective)]
    X = encode_many(store.space, [r.config for r in records])
    y = np.array([r.objective for r in records], dtype=float)
    return X, y


def train_surrogate(store: SampleStore, config: TrainConfig) -> GBDTModel:
    X, y = store_dataset(store)
    return fit(X, y, config, store.space.categorical_dims)
