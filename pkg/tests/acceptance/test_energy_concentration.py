import pytest

from swankv.domain.services.calibration import (
    calibrate_batch,
    collect_activations,
    topk_energy_fraction,
)
from swankv.domain.services.tensor import random_orthogonal
from swankv.domain.services.toy_model import build_toy_model

RANDOM_BASES = 20


@pytest.mark.parametrize("seed", [0, 1])
def test_learned_basis_concentrates_key_energy(corpus, toy_source, seed):
    model = build_toy_model(toy_source.config, seed)
    batch = collect_activations(model, corpus.window(0, 1024))
    projections = calibrate_batch(batch, corpus.corpus_id, seed)
    cfg = model.config
    k = cfg.d_h // 2

    for layer in range(cfg.num_layers):
        for kv_head in range(cfg.n_kv_heads):
            keys = batch.k[layer, kv_head]
            learned = topk_energy_fraction(keys, projections.qk(layer, kv_head), k)
            for r in range(RANDOM_BASES):
                basis = random_orthogonal(cfg.d_h, 1000 * seed + r)
                assert learned >= topk_energy_fraction(keys, basis, k), (layer, r)
