"""Regenerate the recorded service payloads the UI contract tests run against.

Drives the session service in-process (no sockets) with the same frozen
bundle the backend test suite uses, and writes each response body verbatim
to ../tests/fixtures/.  The empty-graph payload is constructed by hand: the
service never emits a zero-node render, but the UI must handle one.

Usage: python3 frontend/scripts/record_fixtures.py
"""

import json
import pathlib
import tempfile

from starlette.testclient import TestClient

import ontocohort as oc
from ontocohort import synth
from ontocohort.service import create_app

FIXTURE_SEED = 1111  # matches the backend suite's frozen bundle
OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"
TINY = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures"


def dump(name: str, obj) -> None:
    (OUT / name).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    print(f"wrote {name}")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    data = synth.generate_synthetic(oc.SynthConfig(), FIXTURE_SEED)
    with tempfile.TemporaryDirectory() as tmp:
        bundle = pathlib.Path(tmp) / "bundle"
        synth.write_bundle(data, bundle)
        with TestClient(create_app(data_dir=bundle)) as client:
            dump("session.json", client.get("/session").json())

            seeds = data.manifest["suggested_seed_codes"]
            phens = list(data.dataset.vocabulary.names[:2])
            filter_body = {
                "codes": seeds,
                "phenotypes": phens,
                "min_visits": 100,
                "min_phenotype_count": 200,
            }
            dump("filter_frozen.json", client.post("/filter", json=filter_body).json())
            dump("node_detail.json", client.get(f"/nodes/{seeds[0]}").json())

            # growth fixtures need room around the seed block, so refilter loose
            loose = dict(filter_body, min_visits=0, min_phenotype_count=0)
            dump("filter_loose.json", client.post("/filter", json=loose).json())

            growth = {"hops": 2, "kl_threshold": 0.5, "sampling_rate": 0.3}
            dump(
                "augment_zero.json",
                client.post(
                    "/augment", json=dict(growth, sampling_rate=0.0, rng_seed=0)
                ).json(),
            )
            dump(
                "augment_seed3_first.json",
                client.post("/augment", json=dict(growth, rng_seed=3)).json(),
            )
            dump(
                "augment_seed3_second.json",
                client.post("/augment", json=dict(growth, rng_seed=3)).json(),
            )

            bad = client.post(
                "/filter", json={"codes": ["no-such-code"], "phenotypes": phens}
            )
            dump("error_unknown_seed.json", {"status": bad.status_code, "body": bad.json()})

        # a three-node graph from the hand-written backend fixture
        with TestClient(create_app()) as client:
            client.post(
                "/session/load",
                json={
                    "ontology_path": str(TINY / "tiny.edges"),
                    "visits_path": str(TINY / "tiny_visits.jsonl"),
                    "vocabulary_path": str(TINY / "tiny_vocab.txt"),
                },
            )
            dump(
                "filter_small.json",
                client.post(
                    "/filter",
                    json={
                        "codes": ["B"],
                        "phenotypes": ["Cardiac dysrhythmias"],
                        "min_visits": 10**6,
                    },
                ).json(),
            )

    dump(
        "empty_render.json",
        {
            "session_id": "default",
            "nodes": [],
            "edges": [],
            "summary": {"node_count": 0, "visit_count": 0},
            "bar_chart": [],
            "pie_chart": [],
        },
    )


if __name__ == "__main__":
    main()
