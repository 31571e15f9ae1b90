"""The synthetic generator as a ground-truth oracle.

Every behavior is planted with known probabilities, and the companion
expected_statistics() returns the closed-form expectations, so measured
analysis output can be checked against theory. This demo generates one
corpus and compares measurement to expectation side by side.

Run: python3 demos/05_synthetic_oracle.py
"""

import math

from sessionterms import GeneratorSpec, expected_statistics, extract_pairs, generate
from sessionterms.corpus import to_canonical_json
from sessionterms.scenarios import ADDED_TERM, assign_scenarios


def main():
    spec = GeneratorSpec(
        seed=2026,
        sessions=500,
        session_length=5,
        query_length=3,
        p_keep=0.6,
        drift=0.1,
        p_ncs=0.4,
        p_cs=0.3,
        p_cd=0.5,
        force_click=True,
        click_prob=0.3,
    )
    expected = expected_statistics(spec)
    corpus = generate(spec)

    # determinism: the same spec always yields byte-identical output
    assert to_canonical_json(corpus) == to_canonical_json(generate(spec))
    print(f"generated {len(corpus.sessions)} sessions deterministically "
          f"(seed {spec.seed})\n")

    pairs = extract_pairs(corpus)
    n = len(pairs)
    print(f"{'quantity':<16}{'expected':>10}{'measured':>10}{'std err':>10}")
    for name, values in (
        ("retained", [len(p.retained) for p in pairs]),
        ("removed", [len(p.removed) for p in pairs]),
        ("added", [len(p.added) for p in pairs]),
    ):
        mean = sum(values) / n
        se = math.sqrt(expected[f"var_{name}"] / n)
        print(f"{name:<16}{expected[f'mean_{name}']:>10.4f}{mean:>10.4f}{se:>10.4f}")

    records = [
        r for r in assign_scenarios(pairs, corpus) if r.origin == ADDED_TERM
    ]
    m = len(records)
    observed = {s: 0 for s in range(1, 9)}
    for rec in records:
        observed[rec.scenario] += 1

    print(f"\nadded-term scenario distribution ({m} records):")
    print(f"{'scenario':<10}{'expected %':>12}{'measured %':>12}")
    for scenario, p in expected["added_scenario_distribution"].items():
        print(f"{scenario:<10}{100 * p:>12.2f}{100 * observed[scenario] / m:>12.2f}")


if __name__ == "__main__":
    main()
