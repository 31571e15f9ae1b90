"""Where do added terms come from? Compare click-differentiated sources.

A synthetic corpus is generated with additions planted mostly into the
clicked snippets and clicked documents of the preceding impression. The
source-comparison table should therefore show the clicked rows (cs, cd)
clearly above their non-clicked counterparts, with significance marks.

Run: python3 demos/02_term_sources.py
"""

from sessionterms import GeneratorSpec, extract_pairs, generate
from sessionterms.sources import (
    dwell_threshold_curve,
    last_click_similarity,
    rank_prefix_similarity,
    source_comparison,
)


def main():
    spec = GeneratorSpec(
        seed=7,
        sessions=150,
        session_length=4,
        p_keep=0.5,
        p_ncs=0.1,   # additions rarely appear in non-clicked snippets
        p_cs=0.7,    # ... often in clicked snippets
        p_cd=0.7,    # ... and often in clicked documents
        force_click=True,
        click_prob=0.3,
    )
    corpus = generate(spec)
    pairs = extract_pairs(corpus)
    print(f"{len(pairs)} adjacent query pairs from {len(corpus.sessions)} sessions\n")

    print(source_comparison(pairs, corpus).to_markdown())
    print("cs/cd rows in bold beat both the non-clicked and the 'all' "
          "variants at p < 0.01 under Welch's t-test.\n")

    print(rank_prefix_similarity(pairs, corpus, k_max=4).to_markdown())
    print("clicks concentrate at rank 1 here, so shallow prefixes are "
          "more similar to the added terms than deep ones.\n")

    print(last_click_similarity(pairs, corpus).to_markdown())

    curve = dwell_threshold_curve(pairs, corpus)
    print("dwell threshold sweep (clicked documents only):")
    for tau, mean, surviving in curve:
        print(f"  >= {tau:4.0f}s  mean cosine {mean:.4f}  ({surviving} docs)")


if __name__ == "__main__":
    main()
