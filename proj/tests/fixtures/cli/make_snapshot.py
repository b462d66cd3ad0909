#!/usr/bin/env python3
"""Writes the CLI fixture snapshots as JSONL import files.

snapshot.jsonl        four reviews with everything `score` needs at --now 2024-10-01,
                      plus topic samples for synonym terms
incomplete.jsonl      one review whose topic sample is missing
expected_scores.json  indicator values recomputed here, independently of the C++ code
Re-run after editing; the outputs are committed.
"""
import json
import math
import random
from datetime import date
from pathlib import Path

NOW = date(2024, 10, 1)
RETRIEVED = "2024-10-01T00:00:00Z"
HERE = Path(__file__).resolve().parent
rng = random.Random(20241001)


def paper(cid, title, pub, cites, refs=(), abstract="", ext=None, venue=None, authors=3):
    return {
        "canonical_id": cid,
        "external_ids": ext or {},
        "title": title,
        "abstract": abstract,
        "publication_date": pub.isoformat() if pub else None,
        "venue": venue,
        "citation_count": cites,
        "reference_ids": list(refs),
        "author_count": authors,
        "retrieved_at": RETRIEVED,
        "id_join": "arxiv" if cid.startswith("arxiv:") else "",
    }


def line(kind, data):
    return json.dumps({"kind": kind, "data": data}, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sample(mean, n):
    return [int(rng.expovariate(1.0 / mean)) for _ in range(n)]


def citing(prefix, per_month, undated):
    out = []
    for (y, m), count in per_month.items():
        for i in range(count):
            out.append({"paper_id": f"{prefix}{y}{m:02d}{i}", "publication_date": date(y, m, 1 + (i * 7) % 28).isoformat()})
    for i in range(undated):
        out.append({"paper_id": f"{prefix}u{i}", "publication_date": None})
    return out


def lower_median_date(dates):
    ordered = sorted(dates)
    return ordered[(len(ordered) - 1) // 2]


REVIEWS = [
    {
        "id": "arxiv:2203.11111",
        "title": "Few-Shot Object Detection: A Comprehensive Survey",
        "pub": date(2022, 3, 15),
        "cites": 118,
        "keyword": "few-shot object detection",
        "harvest": "object detection",
        "sample_mean": 40, "sample_n": 120,
        "monthly": {(2024, 4): 3, (2024, 5): 5, (2024, 6): 4, (2024, 7): 6, (2024, 8): 8, (2024, 9): 9},
        "undated": 2,
        "refs": [("doi:10.1000/fsod.1", date(2017, 6, 1), 210), ("doi:10.1000/fsod.2", date(2019, 10, 20), 95),
                 ("s2:fsod03", date(2020, 2, 11), 64), ("s2:fsod04", date(2020, 12, 3), 33),
                 ("s2:fsod05", date(2021, 5, 30), 12)],
        "dangling": ["s2:fsod99"],
        "counts": (1850, 2420),
        "features": {"taxonomy": 1, "prisma": 0, "preliminary": 1, "benchmark": 1, "application": 1, "discussion": 1, "structured_abstract": 0},
    },
    {
        "id": "arxiv:2101.22222",
        "title": "Transformers in Vision: A Survey",
        "pub": date(2021, 1, 4),
        "cites": 2310,
        "keyword": "vision transformer",
        "harvest": "vision transformer",
        "sample_mean": 260, "sample_n": 150,
        "monthly": {(2024, 4): 41, (2024, 5): 38, (2024, 6): 35, (2024, 7): 36, (2024, 8): 30, (2024, 9): 27},
        "undated": 5,
        "refs": [("arxiv:2010.11929", date(2020, 10, 22), 31000), ("doi:10.1000/vit.2", date(2017, 6, 12), 98000),
                 ("s2:vit03", date(2020, 5, 26), 11000), ("s2:vit04", date(2019, 4, 23), 410)],
        "dangling": [],
        "counts": (5200, 23000),
        "features": {"taxonomy": 1, "prisma": 0, "preliminary": 1, "benchmark": 1, "application": 1, "discussion": 1, "structured_abstract": 0},
    },
    {
        "id": "arxiv:1805.33333",
        "title": "Graph Neural Networks: A Review of Methods and Applications",
        "pub": date(2018, 5, 20),
        "cites": 4100,
        "keyword": "graph neural network",
        "harvest": "graph neural network",
        "sample_mean": 150, "sample_n": 100,
        "monthly": {(2024, 4): 22, (2024, 5): 25, (2024, 6): 21, (2024, 7): 24, (2024, 8): 23, (2024, 9): 22},
        "undated": 0,
        "refs": [("s2:gnn01", date(2009, 1, 1), 5200), ("s2:gnn02", date(2014, 12, 20), 3100),
                 ("s2:gnn03", date(2016, 9, 9), 21000)],
        "dangling": [],
        "counts": (9000, 31000),
        "features": {"taxonomy": 1, "prisma": 0, "preliminary": 1, "benchmark": 0, "application": 1, "discussion": 1, "structured_abstract": 0},
    },
    {
        "id": "doi:10.1000/slr.2023",
        "title": "Machine Learning for Software Defect Prediction: A Systematic Literature Review",
        "pub": date(2023, 7, 1),
        "cites": 9,
        "keyword": "software defect prediction",
        "harvest": "defect prediction",
        "sample_mean": 25, "sample_n": 80,
        "monthly": {(2024, 4): 0, (2024, 5): 1, (2024, 6): 0, (2024, 7): 2, (2024, 8): 1, (2024, 9): 1},
        "undated": 1,
        "refs": [("s2:sdp01", date(2016, 3, 1), 120), ("s2:sdp02", date(2018, 8, 15), 75),
                 ("s2:sdp03", date(2021, 11, 2), 18)],
        "dangling": [],
        "counts": (640, 410),
        "features": {"taxonomy": 0, "prisma": 1, "preliminary": 0, "benchmark": 1, "application": 0, "discussion": 1, "structured_abstract": 1},
    },
]


def review_lines(r, with_sample=True):
    out = []
    ref_ids = [rid for rid, _, _ in r["refs"]] + r["dangling"]
    ext = {"arxiv": r["id"].split(":", 1)[1]} if r["id"].startswith("arxiv:") else {"doi": r["id"].split(":", 1)[1]}
    papers = [paper(r["id"], r["title"], r["pub"], r["cites"], ref_ids, ext=ext)]
    for rid, pub, cites in r["refs"]:
        papers.append(paper(rid, "Reference " + rid, pub, cites))
    median_ref = lower_median_date([pub for _, pub, _ in r["refs"]])
    n_mp, n_pc = r["counts"]
    rest = [
        line("review", {"paper_id": r["id"], "harvest_keyword": r["harvest"], "added_at": RETRIEVED}),
        line("topic", {"paper_id": r["id"], "keyword": r["keyword"], "source": "manual"}),
        line("citations", {"paper_id": r["id"], "fetched_at": RETRIEVED,
                           "citing": citing(r["id"].split(":")[1][:6] + "c", r["monthly"], r["undated"])}),
        line("relevance_count", {"keyword": r["keyword"], "from": median_ref.isoformat(), "to": r["pub"].isoformat(),
                                 "count": n_mp, "fetched_at": RETRIEVED}),
        line("relevance_count", {"keyword": r["keyword"], "from": r["pub"].isoformat(), "to": NOW.isoformat(),
                                 "count": n_pc, "fetched_at": RETRIEVED}),
        line("features", {"paper_id": r["id"], "stored_at": RETRIEVED, "features": r["features"]}),
    ]
    if with_sample:
        rest.append(line("topic_sample", {"keyword": r["keyword"], "k": r["sample_n"],
                                          "sample_citation_counts": sample(r["sample_mean"], r["sample_n"]),
                                          "fetched_at": RETRIEVED, "provenance": "fixture"}))
    return [line("paper", p) for p in papers], rest


SYNONYMS = [("low-shot object detection", 38, 90), ("few-shot detection", 45, 110),
            ("visual transformer", 240, 130), ("graph neural networks", 150, 100)]


def synonym_lines():
    return [line("topic_sample", {"keyword": kw, "k": n, "sample_citation_counts": sample(mean, n),
                                  "fetched_at": RETRIEVED, "provenance": "fixture"}) for kw, mean, n in SYNONYMS]


def write(name, reviews, with_sample=True, extra=None):
    paper_lines, other = [], []
    for r in reviews:
        p, o = review_lines(r, with_sample)
        paper_lines += p
        other += o
    other += extra or []
    (HERE / name).write_text("\n".join(paper_lines + other) + "\n", encoding="utf-8")
    return len(paper_lines)


# ---- independent recomputation of the expected indicators ----

def bernstein(i, n, t):
    return math.comb(n, i) * t ** i * (1 - t) ** (n - i)


def iei(counts):
    n = len(counts) - 1
    # control points are (i, c_i); dx/dt is the constant n, so the slope is dy/dt / n
    slopes = []
    for a in range(n + 1):
        t = a / n
        slopes.append(sum((counts[i + 1] - counts[i]) * bernstein(i, n - 1, t) for i in range(n)))
    return sum(slopes) / len(slopes), counts[-1] - counts[-2]


def months_between(a, b):
    months = (b.year * 12 + b.month) - (a.year * 12 + a.month)
    if months > 0 and b.day < a.day:
        months -= 1
    return months


def rad(m_pc, step=1.0 / 120.0):
    f = lambda x: ((-0.003 * x + 0.001) * x + 0.1267) * x + 0.0129
    upper = m_pc / 12.0
    total, x = 0.0, 0.0
    while x < upper:
        nxt = min(x + step, upper)
        if upper - nxt < 1e-12:
            nxt = upper
        total += (nxt - x) * (f(x) + f(nxt)) / 2
        x = nxt
    return total


def expected(r, counts_sample):
    lam = len(counts_sample) / sum(counts_sample)
    tn = lambda c: 1 - math.exp(-lam * c)
    window = [r["monthly"].get(((2024, m)), 0) for m in range(4, 10)]
    iei_avg, iei_inst = iei(window)
    quality = [tn(c) for _, _, c in r["refs"]]
    arq = sum(quality) / len(quality)
    semesters = sorted(max(0, months_between(pub, r["pub"])) // 6 for _, pub, _ in r["refs"])
    s_mp = semesters[(len(semesters) - 1) // 2]
    rqm = 1 - math.exp(-5.0 * math.exp(-(1 - arq) * s_mp))
    n_mp, n_pc = r["counts"]
    cdr = n_pc / n_mp
    rad_v = rad(months_between(r["pub"], NOW))
    return {"paper": r["id"], "topic": r["keyword"], "TNCSI": tn(r["cites"]), "IEI": iei_avg, "IEI_I": iei_inst,
            "ARQ": arq, "S_mp": s_mp, "RQM": rqm, "CDR": cdr, "RAD": rad_v, "RUI": 10 * cdr + 5 * rad_v}


if __name__ == "__main__":
    n = write("snapshot.jsonl", REVIEWS, extra=synonym_lines())
    write("incomplete.jsonl", [dict(REVIEWS[3], id="doi:10.1000/nosample", refs=[("s2:ns01", date(2019, 1, 1), 4)],
                                    keyword="continual learning")], with_sample=False)
    samples = {}
    for text in (HERE / "snapshot.jsonl").read_text(encoding="utf-8").splitlines():
        entry = json.loads(text)
        if entry["kind"] == "topic_sample":
            samples[entry["data"]["keyword"]] = entry["data"]["sample_citation_counts"]
    rows = sorted((expected(r, samples[r["keyword"]]) for r in REVIEWS), key=lambda row: row["paper"])
    (HERE / "expected_scores.json").write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    print(f"snapshot.jsonl: {n} papers")
