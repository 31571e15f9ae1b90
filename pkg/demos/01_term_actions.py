"""Walk through the term-action analysis on a single hand-picked session.

The session's six queries are normalized, split into adjacent pairs, and
each pair is described by its retained / removed / added terms and its
Jaccard and cosine similarity.

Run: python3 demos/01_term_actions.py
"""

from sessionterms import NormalizationConfig, normalize
from sessionterms.similarity import cosine_tf, jaccard

QUERIES = [
    "gun control opinions",
    "gun control us government",
    "gun control current affairs",
    "gun control current affairs",
    "gun violence us",
    "law center to prevent gun violence",
]


def main():
    config = NormalizationConfig()  # stopword removal + stemming
    bags = [normalize(q, config) for q in QUERIES]

    print("normalized queries:")
    for i, (raw, bag) in enumerate(zip(QUERIES, bags), start=1):
        print(f"  q{i}: {raw!r} -> {sorted(bag.terms)}")

    print("\nadjacent pairs:")
    for i in range(len(bags) - 1):
        a, b = bags[i], bags[i + 1]
        retained = a.terms & b.terms
        removed = a.terms - b.terms
        added = b.terms - a.terms
        print(f"  q{i + 1} -> q{i + 2}:")
        print(f"    retained {sorted(retained)}, removed {sorted(removed)}, "
              f"added {sorted(added)}")
        print(f"    jaccard {jaccard(a.terms, b.terms):.4f}, "
              f"cosine {cosine_tf(a, b):.4f}")

    # the reformulation from q4 to q5 keeps only "gun": 1 of 6 distinct
    # terms survives, giving jaccard 1/6 and cosine 1/(2*sqrt(3))
    print("\nthe q4 -> q5 pair is the classic worked example: "
          f"jaccard = {jaccard(bags[3].terms, bags[4].terms):.2f}, "
          f"cosine = {cosine_tf(bags[3], bags[4]):.2f}")


if __name__ == "__main__":
    main()
