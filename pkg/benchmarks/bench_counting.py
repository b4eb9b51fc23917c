"""Compare the compiled statement-counting kernel against the pure walker.

Usage: python3 benchmarks/bench_counting.py [--documents N] [--repeats R]

Generates a corpus of randomized profile documents (seeded, so runs are
comparable), counts statements over the whole corpus with each backend, and
reports the best-of-R wall time plus the speedup. Both backends must agree
on the total; the script exits nonzero if they diverge.
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from annohub.counting import HAVE_COMPILED_KERNEL, count_statements_py

try:
    from annohub._speedups import count_statements_fast
except ImportError:
    count_statements_fast = None


def build_corpus(documents: int, seed: int = 1234) -> list[dict]:
    rng = random.Random(seed)
    corpus = []
    for _ in range(documents):
        corpus.append(_random_node(rng, depth_left=rng.randint(1, 4)))
    return corpus


_TYPES = ("Hotel", "Article", "Person", "Offer", "PostalAddress", "Organization")
_PROPS = ("name", "description", "url", "price", "email", "keywords", "telephone")


def _random_node(rng: random.Random, depth_left: int) -> dict:
    node: dict = {"@type": rng.choice(_TYPES)}
    for prop in rng.sample(_PROPS, rng.randint(1, 5)):
        roll = rng.random()
        if depth_left > 0 and roll < 0.3:
            node[prop] = _random_node(rng, depth_left - 1)
        elif roll < 0.55:
            node[prop] = [rng.choice(("alpine", "ski", 42, 3.14, True)) for _ in range(rng.randint(1, 5))]
        else:
            node[prop] = rng.choice(("Edelweiss", "https://example.test/x", 7, 2.5, False))
    return node


def time_backend(counter, corpus: list[dict], repeats: int) -> tuple[float, int]:
    best = float("inf")
    total = 0
    for _ in range(repeats):
        start = time.perf_counter()
        total = sum(counter(doc) for doc in corpus)
        best = min(best, time.perf_counter() - start)
    return best, total


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--documents", type=int, default=20_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    corpus = build_corpus(args.documents)
    pure_time, pure_total = time_backend(count_statements_py, corpus, args.repeats)
    print(f"pure python : {pure_time * 1000:8.1f} ms  ({pure_total} statements)")

    if not HAVE_COMPILED_KERNEL or count_statements_fast is None:
        print("compiled    : not available in this install (pure fallback active)")
        return 0

    fast_time, fast_total = time_backend(count_statements_fast, corpus, args.repeats)
    print(f"compiled    : {fast_time * 1000:8.1f} ms  ({fast_total} statements)")
    if fast_total != pure_total:
        print("ERROR: backends disagree on the corpus total", file=sys.stderr)
        return 1
    print(f"speedup     : {pure_time / fast_time:8.2f}x  over {args.documents} documents, best of {args.repeats}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
