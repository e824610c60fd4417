import pathlib

import pytest

import ontocohort as oc
from ontocohort import synth

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

# The frozen desk-scale fixture used by the acceptance suite: default
# generator config, fixture seed 1111, augmentation RNG seeds chosen during
# fixture design and locked here.
FIXTURE_SEED = 1111
FROZEN_RNG_SEEDS = (0, 1, 2, 5, 10)

_acceptance_items: dict[str, tuple[int, str]] = {}
_acceptance_results: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(number, title): marks a test as one numbered acceptance criterion",
    )


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker:
            _acceptance_items[item.nodeid] = (marker.args[0], marker.args[1])


def pytest_runtest_logreport(report):
    if report.nodeid in _acceptance_items and report.when == "call":
        _acceptance_results[report.nodeid] = report.outcome
    elif report.nodeid in _acceptance_items and report.outcome == "failed":
        # setup/teardown error still counts as a failed criterion
        _acceptance_results.setdefault(report.nodeid, "failed")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_items:
        return
    ran = {k: v for k, v in _acceptance_results.items() if k in _acceptance_items}
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (number, title) in sorted(
        _acceptance_items.items(), key=lambda kv: kv[1][0]
    ):
        outcome = _acceptance_results.get(nodeid)
        if outcome is None:
            continue
        word = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            outcome, outcome.upper()
        )
        terminalreporter.write_line(f"criterion {number:>2}: {word}  {title}")


@pytest.fixture(scope="session")
def tiny_dataset():
    return oc.load_dataset(FIXTURES / "tiny_visits.jsonl", FIXTURES / "tiny_vocab.txt")


@pytest.fixture(scope="session")
def tiny_graph(tiny_dataset):
    edges = oc.load_edge_list(FIXTURES / "tiny.edges")
    return oc.build_graph(edges, tiny_dataset)


@pytest.fixture(scope="session")
def frozen_bundle():
    """The generated fixture the acceptance suite is tuned against."""
    return synth.generate_synthetic(oc.SynthConfig(), FIXTURE_SEED)


@pytest.fixture(scope="session")
def bundle_dir(frozen_bundle, tmp_path_factory):
    """The frozen bundle written to disk for loaders, the service and the CLI."""
    out = tmp_path_factory.mktemp("bundle")
    synth.write_bundle(frozen_bundle, out)
    return out


@pytest.fixture(scope="session")
def frozen_filtered(frozen_bundle):
    data = frozen_bundle
    graph = oc.build_graph(data.edges, data.dataset, labels=data.labels)
    spec = oc.FilterSpec(
        selected_codes=frozenset(data.manifest["suggested_seed_codes"]),
        phenotypes_of_interest=frozenset(data.dataset.vocabulary.names[:2]),
    )
    return oc.filter_graph(graph, spec, data.dataset), spec
