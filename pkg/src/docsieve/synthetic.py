"""Planted synthetic corpora with generator-side gold answers.

The generator plants keyed fields (doc_type, publish_date, court, topic,
amount) plus controlled text patterns, and computes every gold answer from
its own bookkeeping: expected query rows come from plain-Python filtering
of the planted values, never from the engine under test. Canonical value
forms (lowercased text, ISO dates, canonical decimal numbers) are part of
the engine's documented output contract, so golds are written in those
forms directly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .corpus import Corpus, Document

LEGAL_DOC_TYPES = ["case_report", "appeal_ruling"]
CORP_DOC_TYPES = ["annual_report", "press_release"]
COURTS = ["High Court", "Federal Court", "District Court", "Magistrates Court"]
LEGAL_TOPICS = [
    "tax appeal", "land dispute", "contract breach", "sentencing review",
    "negligence claim",
]
CORP_TOPICS = [
    "merger review", "quarterly earnings", "product launch", "board election",
    "debt restructure",
]
JUDGES = ["Halloway", "Brennan", "Castellan", "Okafor", "Lindqvist", "Marchetti"]
MONTH_NAMES = [
    "January", "February", "March", "April", "May", "June", "July", "August",
    "September", "October", "November", "December",
]

_LEGAL_FILLER = [
    "the parties tendered extensive documentary evidence over several sitting days",
    "counsel pressed the jurisdictional objection before addressing the substantive grounds",
    "the bench reserved judgment and later delivered detailed written reasons",
    "costs were argued separately following the principal orders",
    "an application for leave to rely on fresh material was refused",
]
_CORP_FILLER = [
    "management reiterated guidance for the remainder of the fiscal year",
    "the audit committee reviewed segment disclosures ahead of publication",
    "shareholders were briefed on capital allocation priorities",
    "operating margins reflected ongoing cost discipline across divisions",
    "the outlook statement flagged currency headwinds in export markets",
]


@dataclass
class GoldQuery:
    query_id: str
    text: str
    columns: list[str]
    rows: list[tuple]
    nl_hint: str = ""  # natural-language phrasing (binder-style input)
    history: str = ""  # predicate fragment, as accumulated query history
    description: str = ""


@dataclass
class GeneratedCorpus:
    corpus: Corpus
    planted: dict[str, dict[str, object]]  # doc_id -> canonical planted values
    gold_schema: list[tuple[str, str]]
    gold_fields: dict[str, dict[str, list[str]]]  # doc_id -> field -> values
    queries: list[GoldQuery] = field(default_factory=list)


def _date_surface(rng: random.Random, year: int, month: int, day: int) -> str:
    """One of several surface forms, all normalizing to the same ISO date."""
    forms = [
        f"{year:04d}-{month:02d}-{day:02d}",
        f"{day} {MONTH_NAMES[month - 1]} {year}",
        f"{MONTH_NAMES[month - 1]} {day}, {year}",
        f"{day:02d}/{month:02d}/{year}",
    ]
    return rng.choice(forms)


def _amount_surface(rng: random.Random, amount: float) -> str:
    with_commas = f"{amount:,.2f}"
    return rng.choice([with_commas, f"${with_commas}", f"{amount:.2f}"])


def generate_corpus(n_docs: int = 200, seed: int = 0) -> GeneratedCorpus:
    rng = random.Random(seed)
    docs: list[Document] = []
    planted: dict[str, dict[str, object]] = {}
    gold_fields: dict[str, dict[str, list[str]]] = {}

    for i in range(n_docs):
        doc_id = f"doc{i:04d}"
        legal = i % 2 == 0
        # rng-driven choices avoid resonance between plant rotations and the
        # miner's evenly spaced subsampling; bookkeeping records each pick.
        if legal:
            doc_type = rng.choice(LEGAL_DOC_TYPES)
            topic = rng.choice(LEGAL_TOPICS)
            court = rng.choice(COURTS)
        else:
            doc_type = rng.choice(CORP_DOC_TYPES)
            topic = rng.choice(CORP_TOPICS)
            court = None
        year = 1998 + (i % 12)
        month = 1 + (i % 12)
        day = 1 + (i % 27)
        iso_date = f"{year:04d}-{month:02d}-{day:02d}"
        # Unique amounts keep ORDER BY ... LIMIT deterministic.
        amount = 1000.0 + i * 137.0 + (0.25 if i % 3 == 0 else 0.0)
        years_sentenced = 1 + (i % 12) if legal else None
        merger_close = (not legal) and i % 4 == 1

        lines = [f"Doc Type: {doc_type}"]
        lines.append(f"Publish Date: {_date_surface(rng, year, month, day)}")
        if court is not None:
            lines.append(f"Court: {court}")
        lines.append(f"Topic: {topic}")
        lines.append(f"Amount: {_amount_surface(rng, amount)}")
        if legal:
            judge = rng.choice(JUDGES)
            body = [
                f"In the matter concerning {topic}, the {court.lower()} heard argument at length.",
                f"The presiding judge, {judge} J, delivered the principal reasons.",
                f"The defendant was sentenced to {years_sentenced} years of supervision.",
                _LEGAL_FILLER[i % len(_LEGAL_FILLER)].capitalize() + ".",
                _LEGAL_FILLER[(i // 3 + 1) % len(_LEGAL_FILLER)].capitalize() + ".",
            ]
        else:
            if merger_close:
                merger_line = "The merger was finally approved by the assembled board."
            else:
                merger_line = (
                    "The merger proposal entered review while independent advisers "
                    "assessed each covenant in detail before the matter was approved."
                )
            body = [
                f"This {doc_type.replace('_', ' ')} addresses {topic} for the reporting period.",
                merger_line,
                _CORP_FILLER[i % len(_CORP_FILLER)].capitalize() + ".",
                _CORP_FILLER[(i // 3 + 1) % len(_CORP_FILLER)].capitalize() + ".",
            ]
        padding = rng.sample(_LEGAL_FILLER if legal else _CORP_FILLER, 3)
        body.extend(s.capitalize() + "." for s in padding)
        text = "\n".join(lines) + "\n" + " ".join(body)
        docs.append(Document.make(doc_id, text))

        canonical_amount = f"{amount:.2f}".rstrip("0").rstrip(".")
        planted[doc_id] = {
            "doc_type": doc_type,
            "publish_date": iso_date,
            "court": court.lower() if court else None,
            "topic": topic,
            "amount": float(canonical_amount),
            "amount_str": canonical_amount,
            "years": years_sentenced,
            "merger_close": merger_close,
            "legal": legal,
        }
        gold_fields[doc_id] = {
            "doc_type": [doc_type],
            "publish_date": [iso_date],
            "court": [court.lower()] if court else [],
            "topic": [topic],
            "amount": [canonical_amount],
        }

    gold_schema = [
        ("doc_type", "value following the 'Doc Type' label"),
        ("publish_date", "value following the 'Publish Date' label"),
        ("court", "value following the 'Court' label"),
        ("topic", "value following the 'Topic' label"),
        ("amount", "value following the 'Amount' label"),
    ]

    generated = GeneratedCorpus(
        corpus=Corpus(docs),
        planted=planted,
        gold_schema=gold_schema,
        gold_fields=gold_fields,
    )
    generated.queries = _build_gold_queries(planted)
    return generated


def _build_gold_queries(planted: dict[str, dict[str, object]]) -> list[GoldQuery]:
    """Twenty benchmark queries with generator-computed expected rows."""
    docs = sorted(planted)

    def rows_where(pred) -> list[str]:
        return [d for d in docs if pred(planted[d])]

    queries: list[GoldQuery] = []

    hints = {
        "q01_doc_type_eq": "all case report documents",
        "q02_court_eq": "cases heard in the high court",
        "q03_date_after": "documents with a publish date after 2004",
        "q04_amount_ge": "documents with an amount of at least 20000",
        "q05_topic_eq": "cases whose topic is tax appeal",
        "q06_project_topic": "topics of annual report documents",
        "q07_type_and_amount": "case reports with an amount of at least 15000",
        "q08_court_and_date": "federal court cases with a publish date since 2002",
        "q09_type_and_topic": "press releases about the product launch topic",
        "q10_amount_range": "documents with amounts between 5000 and 9000",
        "q11_court_or": "cases in the high court or the district court",
        "q12_type_in": "annual report and press release documents",
        "q13_court_neq": "cases heard outside the high court",
        "q14_extract_years": "case reports with sentences of at least 5 years",
        "q15_extract_contains": "annual reports mentioning a merger",
        "q16_extract_near": "documents where a merger approval is discussed",
        "q17_group_count": "count of documents for each doc type",
        "q18_order_limit": "the largest amounts on record",
        "q19_join_topic": "high court cases and appeal rulings sharing a topic",
        "q20_script_progressive": "large cases grouped by court",
    }

    history = {
        "q01_doc_type_eq": "doc_type = 'case_report'",
        "q02_court_eq": "court = 'high court'",
        "q03_date_after": "publish_date > '2004-12-31'",
        "q04_amount_ge": "amount >= 20000",
        "q05_topic_eq": "topic = 'tax appeal'",
        "q06_project_topic": "topic where doc_type = 'annual_report'",
        "q07_type_and_amount": "doc_type = 'case_report' and amount >= 15000",
        "q08_court_and_date": "court = 'federal court' and publish_date >= '2002-01-01'",
        "q09_type_and_topic": "doc_type = 'press_release' and topic = 'product launch'",
        "q10_amount_range": "amount >= 5000 and amount < 9000",
        "q11_court_or": "court = 'high court' or court = 'district court'",
        "q12_type_in": "doc_type in ('annual_report', 'press_release')",
        "q13_court_neq": "court != 'high court'",
        "q14_extract_years": "doc_type = 'case_report' and years >= 5",
        "q15_extract_contains": "doc_type = 'annual_report' and contains merger",
        "q16_extract_near": "merger near approved",
        "q17_group_count": "count by doc_type",
        "q18_order_limit": "amount order by amount",
        "q19_join_topic": "court = 'high court' join on topic",
        "q20_script_progressive": "amount >= 12000 count by court",
    }

    def add(query_id, text, columns, rows, description=""):
        queries.append(
            GoldQuery(
                query_id=query_id,
                text=text,
                columns=columns,
                rows=[tuple(r) for r in rows],
                nl_hint=hints.get(query_id, ""),
                history=history.get(query_id, ""),
                description=description,
            )
        )

    # -- simple selection/projection ---------------------------------------
    add(
        "q01_doc_type_eq",
        "SELECT doc_id FROM store WHERE doc_type = 'case_report'",
        ["doc_id"],
        [(d,) for d in rows_where(lambda p: p["doc_type"] == "case_report")],
    )
    add(
        "q02_court_eq",
        "SELECT doc_id FROM store WHERE court = 'high court'",
        ["doc_id"],
        [(d,) for d in rows_where(lambda p: p["court"] == "high court")],
    )
    add(
        "q03_date_after",
        "SELECT doc_id FROM store WHERE publish_date > '2004-12-31'",
        ["doc_id"],
        [(d,) for d in rows_where(lambda p: str(p["publish_date"]) > "2004-12-31")],
    )
    add(
        "q04_amount_ge",
        "SELECT doc_id FROM store WHERE amount >= 20000",
        ["doc_id"],
        [(d,) for d in rows_where(lambda p: p["amount"] >= 20000)],
    )
    add(
        "q05_topic_eq",
        "SELECT doc_id FROM store WHERE topic = 'tax appeal'",
        ["doc_id"],
        [(d,) for d in rows_where(lambda p: p["topic"] == "tax appeal")],
    )
    add(
        "q06_project_topic",
        "SELECT topic, doc_id FROM store WHERE doc_type = 'annual_report'",
        ["topic", "doc_id"],
        [
            (planted[d]["topic"], d)
            for d in rows_where(lambda p: p["doc_type"] == "annual_report")
        ],
    )

    # -- conjunctive ---------------------------------------------------------
    add(
        "q07_type_and_amount",
        "SELECT doc_id FROM store WHERE doc_type = 'case_report' AND amount >= 15000",
        ["doc_id"],
        [
            (d,)
            for d in rows_where(
                lambda p: p["doc_type"] == "case_report" and p["amount"] >= 15000
            )
        ],
    )
    add(
        "q08_court_and_date",
        "SELECT doc_id FROM store WHERE court = 'federal court' AND publish_date >= '2002-01-01'",
        ["doc_id"],
        [
            (d,)
            for d in rows_where(
                lambda p: p["court"] == "federal court"
                and str(p["publish_date"]) >= "2002-01-01"
            )
        ],
    )
    add(
        "q09_type_and_topic",
        "SELECT doc_id FROM store WHERE doc_type = 'press_release' AND topic = 'product launch'",
        ["doc_id"],
        [
            (d,)
            for d in rows_where(
                lambda p: p["doc_type"] == "press_release"
                and p["topic"] == "product launch"
            )
        ],
    )
    add(
        "q10_amount_range",
        "SELECT doc_id FROM store WHERE amount >= 5000 AND amount < 9000",
        ["doc_id"],
        [(d,) for d in rows_where(lambda p: 5000 <= p["amount"] < 9000)],
    )

    # -- disjunction / IN / negation ------------------------------------------
    add(
        "q11_court_or",
        "SELECT doc_id FROM store WHERE (court = 'high court' OR court = 'district court')",
        ["doc_id"],
        [
            (d,)
            for d in rows_where(lambda p: p["court"] in ("high court", "district court"))
        ],
    )
    add(
        "q12_type_in",
        "SELECT doc_id FROM store WHERE doc_type IN ('annual_report', 'press_release')",
        ["doc_id"],
        [
            (d,)
            for d in rows_where(
                lambda p: p["doc_type"] in ("annual_report", "press_release")
            )
        ],
    )
    add(
        "q13_court_neq",
        "SELECT doc_id FROM store WHERE court != 'high court'",
        ["doc_id"],
        [
            (d,)
            for d in rows_where(
                lambda p: p["court"] is not None and p["court"] != "high court"
            )
        ],
        description="null courts excluded under null-rejecting comparisons",
    )

    # -- EXTRACT ------------------------------------------------------------------
    add(
        "q14_extract_years",
        "SELECT doc_id FROM store WHERE doc_type = 'case_report' "
        "AND EXTRACT(years, 'regex:sentenced to (\\d+) years') AND years >= 5",
        ["doc_id"],
        [
            (d,)
            for d in rows_where(
                lambda p: p["doc_type"] == "case_report"
                and p["years"] is not None
                and p["years"] >= 5
            )
        ],
    )
    add(
        "q15_extract_contains",
        "SELECT doc_id FROM store WHERE doc_type = 'annual_report' "
        "AND EXTRACT(m, 'contains:merger')",
        ["doc_id"],
        [(d,) for d in rows_where(lambda p: p["doc_type"] == "annual_report")],
        description="every corporate doc mentions the merger line",
    )
    add(
        "q16_extract_near",
        "SELECT doc_id FROM store WHERE doc_type IN ('annual_report', 'press_release') "
        "AND EXTRACT(near_hit, 'near:merger,approved,5')",
        ["doc_id"],
        [(d,) for d in rows_where(lambda p: not p["legal"] and p["merger_close"])],
        description="only the tight phrasing keeps the terms within 5 tokens",
    )

    # -- aggregation / ordering -------------------------------------------------
    type_counts: dict[str, int] = {}
    for d in docs:
        t = str(planted[d]["doc_type"])
        type_counts[t] = type_counts.get(t, 0) + 1
    add(
        "q17_group_count",
        "SELECT doc_type, count(*) FROM store GROUP BY doc_type",
        ["doc_type", "count(*)"],
        [(t, n) for t, n in sorted(type_counts.items())],
    )
    top5 = sorted(docs, key=lambda d: -float(planted[d]["amount"]))[:5]
    add(
        "q18_order_limit",
        "SELECT doc_id, amount FROM store ORDER BY amount DESC LIMIT 5",
        ["doc_id", "amount"],
        [(d, planted[d]["amount_str"]) for d in top5],
    )

    # -- join (via temp tables, the dialect's self-join form) ---------------------
    legal_high = rows_where(
        lambda p: p["doc_type"] == "case_report" and p["court"] == "high court"
    )
    appeal_docs = rows_where(lambda p: p["doc_type"] == "appeal_ruling")
    join_rows = []
    for a in legal_high:
        for b in appeal_docs:
            if planted[a]["topic"] == planted[b]["topic"]:
                join_rows.append((str(planted[a]["topic"]), a, b))
    add(
        "q19_join_topic",
        "WITH cases AS (SELECT doc_id, topic FROM store WHERE doc_type = 'case_report' "
        "AND court = 'high court'), "
        "appeals AS (SELECT doc_id, topic FROM store WHERE doc_type = 'appeal_ruling') "
        "SELECT cases.topic, cases.doc_id, appeals.doc_id FROM cases "
        "JOIN appeals ON cases.topic = appeals.topic",
        ["cases.topic", "cases.doc_id", "appeals.doc_id"],
        join_rows,
    )

    # -- 2-statement progressive script -------------------------------------------
    big = rows_where(lambda p: p["legal"] and p["amount"] >= 12000)
    court_counts: dict[str, int] = {}
    for d in big:
        c = str(planted[d]["court"])
        court_counts[c] = court_counts.get(c, 0) + 1
    add(
        "q20_script_progressive",
        "WITH big_cases AS (SELECT doc_id, court FROM store WHERE amount >= 12000 "
        "AND doc_type IN ('case_report', 'appeal_ruling')) "
        "SELECT doc_id FROM big_cases; "
        "SELECT court, count(*) FROM big_cases GROUP BY court",
        ["court", "count(*)"],
        [(c, n) for c, n in sorted(court_counts.items())],
        description="statement 1 materializes the temp; statement 2 aggregates it",
    )
    return queries
