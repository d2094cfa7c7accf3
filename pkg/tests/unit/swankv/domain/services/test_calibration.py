import numpy as np
import pytest

from swankv.domain.enums.projection_variant import ProjectionVariant
from swankv.domain.exceptions.numerics import (
    RejectedConfigurationError,
    RejectedInputError,
)
from swankv.domain.services.calibration import (
    build_joint_qk,
    build_joint_vo,
    calibrate,
    collect_activations,
    derive_projection,
    group_output_weights,
    group_queries,
    identity_projection_set,
    make_ablation_variant,
    pruned_reconstruction_error,
    reassemble_output_weights,
    topk_energy_fraction,
    ungroup_queries,
)
from swankv.domain.services.tensor import orthogonality_residual, random_orthogonal


def test_group_queries_is_head_major(rng):
    q = rng.standard_normal((4, 3, 8)).astype(np.float32)

    grouped = group_queries(q, n_kv=2)

    assert grouped.shape == (2, 6, 8)
    np.testing.assert_array_equal(grouped[0, :3], q[0])
    np.testing.assert_array_equal(grouped[0, 3:], q[1])
    np.testing.assert_array_equal(grouped[1, :3], q[2])
    np.testing.assert_array_equal(ungroup_queries(grouped, n_q=4), q)


@pytest.mark.parametrize("n_kv", [0, 3])
def test_group_queries_rejects_indivisible(rng, n_kv):
    with pytest.raises(RejectedConfigurationError):
        group_queries(rng.standard_normal((4, 3, 8)), n_kv=n_kv)


def test_group_output_weights_bands(rng):
    w_o = rng.standard_normal((4 * 8, 32)).astype(np.float32)

    groups = group_output_weights(w_o, n_q=4, n_kv=2)

    assert groups.shape == (2, 2, 8, 32)
    np.testing.assert_array_equal(groups[1, 0], w_o[16:24])
    np.testing.assert_array_equal(reassemble_output_weights(groups), w_o)


def test_joint_qk_stacks_queries_first(rng):
    q = rng.standard_normal((6, 8))
    k = rng.standard_normal((3, 8))

    s = build_joint_qk(q, k)

    assert s.shape == (9, 8)
    np.testing.assert_array_equal(s[6:], k.astype(np.float32))


@pytest.mark.parametrize(
    ("q_rows", "k_shape"),
    [
        pytest.param(0, (3, 8), id="no_queries"),
        pytest.param(6, (0, 8), id="no_keys"),
        pytest.param(6, (3, 4), id="width_mismatch"),
    ],
)
def test_joint_qk_rejects(q_rows, k_shape):
    with pytest.raises(RejectedInputError):
        build_joint_qk(np.ones((q_rows, 8)), np.ones(k_shape))


def test_joint_vo_appends_transposed_output_slices(rng):
    v = rng.standard_normal((5, 8))
    w_o_group = rng.standard_normal((2, 8, 32)).astype(np.float32)

    s = build_joint_vo(v, w_o_group)

    assert s.shape == (5 + 2 * 32, 8)
    np.testing.assert_array_equal(s[5 + 32 :], w_o_group[1].T)


def test_derive_projection_orders_by_energy(rng):
    scales = np.array([0.1, 10.0, 0.5, 3.0], dtype=np.float32)
    s = rng.standard_normal((200, 4)).astype(np.float32) * scales

    p = derive_projection(s)

    assert orthogonality_residual(p) < 1e-5
    assert abs(p[1, 0]) > 0.99
    assert abs(p[3, 1]) > 0.99


def test_derive_projection_rejects_short_matrix():
    with pytest.raises(RejectedInputError):
        derive_projection(np.ones((3, 8)))


def test_low_rank_rows_keep_all_energy(rng):
    basis = np.linalg.qr(rng.standard_normal((8, 2)))[0]
    rows = (rng.standard_normal((100, 2)) @ basis.T).astype(np.float32)

    p = derive_projection(rows)

    assert topk_energy_fraction(rows, p, 2) == pytest.approx(1.0, abs=1e-4)
    assert pruned_reconstruction_error(rows, p, 2) == pytest.approx(0.0, abs=1e-4)


@pytest.mark.parametrize(
    ("k", "expected"),
    [
        pytest.param(0, 0.0, id="nothing_kept"),
        pytest.param(8, 1.0, id="everything_kept"),
    ],
)
def test_energy_fraction_endpoints(rng, k, expected):
    rows = rng.standard_normal((20, 8))

    assert topk_energy_fraction(rows, np.eye(8), k) == pytest.approx(expected)


def test_energy_fraction_of_zero_rows():
    assert topk_energy_fraction(np.zeros((3, 4)), np.eye(4), 1) == 1.0
    assert pruned_reconstruction_error(np.zeros((3, 4)), np.eye(4), 1) == 0.0


def test_collect_activations_shapes(sample_model, sample_corpus):
    batch = collect_activations(sample_model, sample_corpus.window(0, 20))

    assert batch.q.shape == (2, 4, 20, 8)
    assert batch.k.shape == (2, 2, 20, 8)
    assert batch.w_o.shape == (2, 4, 8, 32)
    assert batch.token_count == 20


@pytest.mark.parametrize(
    "tokens",
    [
        pytest.param([], id="empty"),
        pytest.param([1, 2, 256], id="out_of_vocab"),
        pytest.param([-1], id="negative"),
    ],
)
def test_collect_activations_rejects(sample_model, tokens):
    with pytest.raises(RejectedInputError):
        collect_activations(sample_model, tokens)


def test_calibrate_produces_orthogonal_learned_set(sample_projections, gqa_config):
    assert sample_projections.variant is ProjectionVariant.LEARNED
    assert sample_projections.matches(gqa_config)
    assert sample_projections.metadata.token_count == 256
    assert sample_projections.metadata.seed == 7
    assert sample_projections.metadata.corpus_id == "sample.txt:0123456789ab"


def test_calibrate_is_deterministic_across_workers(sample_model, sample_corpus):
    tokens = sample_corpus.window(0, 64)

    serial = calibrate(sample_model, tokens, "c", seed=1)
    threaded = calibrate(sample_model, tokens, "c", seed=1, workers=3)

    np.testing.assert_array_equal(serial.p_qk, threaded.p_qk)
    np.testing.assert_array_equal(serial.p_vo, threaded.p_vo)


def test_identity_set(gqa_config):
    ident = identity_projection_set(gqa_config)

    assert ident.variant is ProjectionVariant.IDENTITY
    np.testing.assert_array_equal(ident.qk(1, 1), np.eye(8))


def test_kv_shuffle_swaps_kinds(sample_projections):
    swapped = make_ablation_variant(sample_projections, "kv_shuffle", seed=0)

    assert swapped.variant is ProjectionVariant.KV_SHUFFLE
    np.testing.assert_array_equal(swapped.p_qk, sample_projections.p_vo)
    np.testing.assert_array_equal(swapped.p_vo, sample_projections.p_qk)


def test_layer_shuffle_moves_every_layer(sample_projections):
    shuffled = make_ablation_variant(sample_projections, "layer_shuffle", seed=3)

    np.testing.assert_array_equal(shuffled.p_qk[0], sample_projections.p_qk[1])
    np.testing.assert_array_equal(shuffled.p_vo[1], sample_projections.p_vo[0])


def test_head_shuffle_moves_every_head(sample_projections):
    shuffled = make_ablation_variant(sample_projections, "head_shuffle", seed=3)

    for layer in range(2):
        np.testing.assert_array_equal(
            shuffled.qk(layer, 0),
            sample_projections.qk(layer, 1),
        )


def test_random_variant_is_seeded(sample_projections):
    first = make_ablation_variant(sample_projections, ProjectionVariant.RANDOM, 5)
    again = make_ablation_variant(sample_projections, ProjectionVariant.RANDOM, 5)
    other = make_ablation_variant(sample_projections, ProjectionVariant.RANDOM, 6)

    np.testing.assert_array_equal(first.p_qk, again.p_qk)
    assert not np.array_equal(first.p_qk, other.p_qk)
    assert not np.array_equal(first.p_qk, sample_projections.p_qk)


def test_learned_variant_is_base(sample_projections):
    assert make_ablation_variant(sample_projections, "learned", 0) is sample_projections


def test_unknown_variant(sample_projections):
    with pytest.raises(RejectedInputError):
        make_ablation_variant(sample_projections, "transpose", 0)


@pytest.mark.parametrize("k", [2, 4, 8, 12])
def test_learned_subspace_beats_random_bases(rng, k):
    scales = np.linspace(3.0, 0.05, num=16)
    s = (rng.standard_normal((400, 16)) * scales).astype(np.float32)
    s = s @ random_orthogonal(16, seed=9)

    p = derive_projection(s)
    best = np.sum((s @ p[:, :k]).astype(np.float64) ** 2)

    for seed in range(100):
        basis = random_orthogonal(16, seed=seed)
        assert best >= np.sum((s @ basis[:, :k]).astype(np.float64) ** 2), seed


@pytest.mark.parametrize("k", [2, 4, 6])
def test_learned_basis_concentrates_key_energy(
    sample_model,
    sample_corpus,
    sample_projections,
    k,
):
    batch = collect_activations(sample_model, sample_corpus.window(300, 256))

    for layer in range(2):
        for kv_head in range(2):
            keys = batch.k[layer, kv_head]
            learned = topk_energy_fraction(
                keys,
                sample_projections.qk(layer, kv_head),
                k,
            )
            for seed in range(20):
                basis = random_orthogonal(8, seed=seed)
                assert learned >= topk_energy_fraction(keys, basis, k), (layer, seed)
