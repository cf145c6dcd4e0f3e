"""Exact-arithmetic SARI reference used to freeze tests/data/sari_cases.json.

Written directly from the ADD / KEEP / DELETE definitions with fractional
reference counts, independent of the Rust implementation.
Run: python3 sari_oracle.py > ../data/sari_cases.json
"""
import json
import string
from collections import Counter
from fractions import Fraction

PUNCT = set(string.punctuation)


def tokenize(text):
    out = []
    for chunk in text.split():
        i, j = 0, len(chunk)
        while i < j and chunk[i] in PUNCT:
            i += 1
        while j > i and chunk[j - 1] in PUNCT:
            j -= 1
        out.extend(chunk[:i])
        if j > i:
            out.append(chunk[i:j].lower())
        out.extend(chunk[j:])
    return out


def grams(tokens, n):
    return Counter(tuple(tokens[k:k + n]) for k in range(len(tokens) - n + 1))


def f1(correct, pred, gold):
    if pred == 0 and gold == 0:
        return Fraction(1)
    if pred == 0 or gold == 0:
        return Fraction(0)
    p, r = correct / pred, correct / gold
    return Fraction(0) if p + r == 0 else 2 * p * r / (p + r)


def sari(source, candidate, refs):
    s, c = tokenize(source), tokenize(candidate)
    rs = [tokenize(r) for r in refs]
    total = Fraction(0)
    for n in range(1, 5):
        I, O = grams(s, n), grams(c, n)
        R = Counter()
        for r in rs:
            R.update(grams(r, n))
        R = {g: Fraction(v, len(rs)) for g, v in R.items()}

        add_o = {g for g in O if g not in I}
        add_r = {g for g in R if g not in I}
        add = f1(Fraction(len(add_o & add_r)), Fraction(len(add_o)), Fraction(len(add_r)))

        kc = kp = kg = Fraction(0)
        dc = dp = dg = Fraction(0)
        for g, i in I.items():
            o, r = O.get(g, 0), R.get(g, Fraction(0))
            io, ir = min(i, o), min(i, r)
            kp += io
            kg += ir
            kc += min(io, ir)
            do, dr = max(i - o, 0), max(i - r, 0)
            dp += do
            dg += dr
            dc += min(do, dr)
        keep = f1(kc, kp, kg)
        if dp == 0:
            dele = Fraction(1) if dg == 0 else Fraction(0)
        else:
            dele = dc / dp
        total += (add + keep + dele) / 3
    return total / 4 * 100


CASES = [
    ("About 95 species are currently accepted.",
     "About 95 species are currently known.",
     ["About 95 species are currently known.", "About 95 species are now accepted.",
      "95 species are now accepted."]),
    ("The cat perched on the mat, watching the birds.",
     "The cat sat on the mat.",
     ["The cat sat on the mat.", "A cat sat on the mat and watched birds."]),
    ("Marie Curie was a physicist and chemist who conducted pioneering research on radioactivity.",
     "Marie Curie was a scientist. She studied radioactivity.",
     ["Marie Curie was a scientist who studied radioactivity.",
      "Marie Curie did early research on radioactivity.",
      "Marie Curie was a physicist and chemist. She researched radioactivity."]),
    ("The committee postponed the vote indefinitely.",
     "The committee postponed the vote indefinitely.",
     ["The committee delayed the vote.", "The vote was put off by the committee."]),
    ("He was born in 1950 in a small village near the river.",
     "He was born in 1950.",
     ["He was born in 1950 near the river.", "He was born in a village in 1950."]),
    ("The the the quick quick fox.",
     "The quick fox the fox.",
     ["The quick fox.", "The fox, quick, the fox."]),
    ("Nevertheless, the proposal was rejected by a narrow margin.",
     "However, the plan was narrowly rejected!",
     ["However, the proposal was rejected.", "But the plan was narrowly turned down."]),
    ("It is widely believed that exercise improves mood.",
     "Many people think exercise makes you happier.",
     ["Many people think exercise improves mood.",
      "People believe exercise makes mood better.",
      "Exercise is thought to improve mood.",
      "It is believed that exercise helps mood."]),
    ("A B C D E F",
     "A B X D Y F",
     ["A B C D", "X Y Z", "A C E"]),
    ("The river flows north.",
     "",
     ["The river flows north.", "The river goes north."]),
]


def main():
    rows = []
    for source, candidate, refs in CASES:
        v = sari(source, candidate, refs)
        rows.append({
            "source": source,
            "candidate": candidate,
            "references": refs,
            "sari": float(v),
            "sari_exact": f"{v.numerator}/{v.denominator}",
        })
    print(json.dumps(rows, indent=2, ensure_ascii=False))


if __name__ == "__main__":
    main()
