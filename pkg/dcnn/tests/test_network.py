import keras
import numpy as np
import pytest

from spmf_dcnn import (
    NetworkSpec,
    block_names,
    build_network,
    spec_hash,
    zero_residual_paths,
)

VARIANT_BLOCKS = {(1, 2, 1): 4, (2, 2, 2): 6, (2, 4, 2): 8}


def test_spec_validation():
    with pytest.raises(ValueError):
        NetworkSpec(block_counts=(0, 1, 1))
    with pytest.raises(ValueError):
        NetworkSpec(block_counts=(1, 1))
    with pytest.raises(ValueError):
        NetworkSpec(dropout_rate=1.0)
    with pytest.raises(ValueError):
        NetworkSpec(input_size=(4, 4))


def test_build_rejects_degenerate_head():
    with pytest.raises(ValueError):
        build_network(NetworkSpec(), class_count=1)


@pytest.mark.parametrize("counts", sorted(VARIANT_BLOCKS))
def test_variants_have_expected_block_counts(counts):
    model = build_network(NetworkSpec(block_counts=counts), class_count=8)
    assert len(block_names(model)) == VARIANT_BLOCKS[counts]
    assert model.output_shape == (None, 8)


def test_parameter_count_is_pure_function_of_spec():
    spec = NetworkSpec(block_counts=(1, 2, 1))
    keras.utils.set_random_seed(1)
    a = build_network(spec, 8).count_params()
    keras.utils.set_random_seed(99)
    b = build_network(spec, 8).count_params()
    assert a == b
    # frozen counts for the three named variants at 8 classes
    counts = {
        c: build_network(NetworkSpec(block_counts=c), 8).count_params()
        for c in VARIANT_BLOCKS
    }
    assert counts == {(1, 2, 1): 326512, (2, 2, 2): 430264, (2, 4, 2): 534200}


def test_each_block_is_identity_when_projection_zeroed():
    keras.utils.set_random_seed(7)
    model = build_network(NetworkSpec(block_counts=(1, 1, 1)), class_count=4)
    zero_residual_paths(model)
    x = np.random.default_rng(0).uniform(0, 1, (2, 32, 32, 3)).astype(np.float32)
    for name in block_names(model):
        add = model.get_layer(f"{name}_add")
        probe = keras.Model(model.input, [add.input[0], add.output])
        before, after = probe.predict(x, verbose=0)
        assert np.array_equal(before, after), name


def test_zeroed_network_ignores_branch_weights():
    # with every projection zeroed the output is the stem + reductions +
    # head applied to x; branch weights cannot influence it
    keras.utils.set_random_seed(3)
    model = build_network(NetworkSpec(block_counts=(1, 1, 1)), class_count=4)
    zero_residual_paths(model)
    x = np.random.default_rng(1).uniform(0, 1, (4, 32, 32, 3)).astype(np.float32)
    base = model.predict(x, verbose=0)
    rng = np.random.default_rng(2)
    for layer in model.layers:
        if layer.name.startswith("block") and layer.name.endswith("_conv"):
            weights = layer.get_weights()
            layer.set_weights([rng.normal(0, 0.1, w.shape) for w in weights])
    assert np.array_equal(model.predict(x, verbose=0), base)


def test_forward_reproducible_with_fixed_seed():
    x = np.random.default_rng(5).uniform(0, 1, (3, 32, 32, 3)).astype(np.float32)
    outputs = []
    for _ in range(2):
        keras.utils.set_random_seed(11)
        model = build_network(NetworkSpec(block_counts=(1, 1, 1)), class_count=5)
        outputs.append(model.predict(x, verbose=0))
    assert np.max(np.abs(outputs[0] - outputs[1])) <= 1e-5


def test_spec_hash_stable_and_discriminating():
    a = spec_hash(NetworkSpec(block_counts=(2, 2, 2)))
    assert a == spec_hash(NetworkSpec(block_counts=(2, 2, 2)))
    assert a != spec_hash(NetworkSpec(block_counts=(1, 2, 1)))
    assert a != spec_hash(NetworkSpec(block_counts=(2, 2, 2), dropout_rate=0.4))
