"""Classify every term of every query pair into one of 8 behavior
scenarios by its membership in the three click-differentiated sources
(non-clicked snippets, clicked snippets, clicked documents), then look
at retention and the click outcome of the next impression.

Run: python3 demos/03_scenarios.py
"""

from sessionterms import GeneratorSpec, extract_pairs, generate
from sessionterms.scenarios import (
    assign_scenarios,
    click_outcome_eval,
    retention_by_scenario,
    scenario_distribution,
    scenario_membership,
)


def main():
    print("scenario truth table (ncs, cs, cd):")
    for scenario in range(1, 9):
        ncs, cs, cd = scenario_membership(scenario)
        flags = ", ".join(
            name for name, bit in (("ncs", ncs), ("cs", cs), ("cd", cd)) if bit
        )
        print(f"  scenario {scenario}: {flags or 'none'}")
    print()

    spec = GeneratorSpec(
        seed=23,
        sessions=200,
        session_length=4,
        p_keep=0.5,
        p_ncs=0.5,
        p_cs=0.3,
        p_cd=0.4,
        force_click=True,
        click_prob=0.3,
    )
    corpus = generate(spec)
    records = assign_scenarios(extract_pairs(corpus), corpus)
    print(f"{len(records)} term records "
          f"({sum(1 for r in records if r.origin == 'query-term')} query-term, "
          f"{sum(1 for r in records if r.origin == 'added-term')} added-term)\n")

    print(scenario_distribution(records).to_markdown())

    print("retention by scenario (query terms):")
    for scenario, retained, removed in retention_by_scenario(records):
        print(f"  scenario {scenario}: {100 * retained:5.1f}% retained, "
              f"{100 * removed:5.1f}% removed")
    print()

    print(click_outcome_eval(records).to_markdown())
    print("scenarios 3 and 7 (clicked snippet without its document) are "
          "excluded from the outcome evaluation by design.")


if __name__ == "__main__":
    main()
