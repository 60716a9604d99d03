import pytest

from inips import defaults, ensemble, synth


@pytest.fixture(scope="session")
def graph():
    return defaults.reference_topology()


@pytest.fixture(scope="session")
def wl_plan(graph):
    return defaults.default_wl_plan(graph)


@pytest.fixture(scope="session")
def sl_plan(graph):
    return defaults.default_sl_plan(graph)


@pytest.fixture(scope="session")
def traffic_bundle():
    """Small traffic-feature model used by the simulator tests."""
    data = synth.traffic_feature_dataset(n_flows_per_class=300, seed=7)
    train, _ = synth.train_test_split(data, test_fraction=0.3, seed=7)
    return ensemble.build_decomposed_ensemble(
        train, n_learners=3, subsample_ratio=0.33, max_depth=7, seed=7
    )
