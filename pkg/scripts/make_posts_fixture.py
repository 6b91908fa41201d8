#!/usr/bin/env python3
"""Regenerate tests/fixtures/posts_50.xml, a 50-row synthetic Posts.xml dump.

Row inventory (fixed by hand, exercised by the corpus acceptance test):
  - 18 python-tagged questions (ids 101-118), of which 10 pass the quality
    rules and the 2-token title check: 101, 105, 106, 108, 111, 112, 113,
    116, 117, 118. Failures: 102 (score 9), 103 (no code), 104 (no accepted
    answer), 107 (whitespace-only code), 109 (1-token title), 110 (all
    rules), 114 (no accepted answer), 115 (no code).
  - 6 java questions (201-206); 201, 204, 206 pass. 111 is dual-tagged
    python+java and passes, so the java corpus holds 4 records.
  - 4 javascript questions (301-304); 301, 303, 304 pass.
  - 11 answers (401-411), 4 non-question rows (501-504), 5 questions for
    untargeted languages (601-605), 2 rows with missing required attributes
    (701 lacks Body, 702 lacks CreationDate).
"""

from pathlib import Path
from xml.sax.saxutils import quoteattr

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "posts_50.xml"

CODE_BODY = '<p>{desc}</p><pre><code>{code}</code></pre>'


def q(post_id, date, score, title, body, tags, accepted=None):
    row = {
        "Id": str(post_id),
        "PostTypeId": "1",
        "CreationDate": date,
        "Score": str(score),
        "Title": title,
        "Body": body,
        "Tags": "".join(f"<{t}>" for t in tags),
    }
    if accepted is not None:
        row["AcceptedAnswerId"] = str(accepted)
    return row


def a(post_id, date, parent):
    return {
        "Id": str(post_id),
        "PostTypeId": "2",
        "CreationDate": date,
        "Score": "4",
        "ParentId": str(parent),
        "Body": "<p>Try the accepted approach below.</p>",
    }


def misc(post_id, date, type_id):
    return {
        "Id": str(post_id),
        "PostTypeId": str(type_id),
        "CreationDate": date,
        "Score": "0",
        "Body": "<p>Wiki or moderation row.</p>",
    }


ROWS = [
    a(401, "2019-01-02T09:00:00", 999),
    q(101, "2020-01-05T08:00:00", 10, "How to fix IndexError in pandas",
      CODE_BODY.format(desc="My loop fails on the last row.",
                       code="for i in range(len(df)):\n    print(df.iloc[i])"),
      ["python", "pandas"], accepted=401),
    q(201, "2019-03-01T10:00:00", 12, "How to read a file with nio",
      CODE_BODY.format(desc="Streams versus readers.", code="Files.lines(path);"),
      ["java", "nio"], accepted=402),
    q(102, "2020-01-20T11:30:00", 9, "Why is my list comprehension slow",
      CODE_BODY.format(desc="It allocates too much.", code="[x * x for x in data]"),
      ["python"], accepted=403),
    misc(501, "2019-02-01T00:00:00", 4),
    q(103, "2020-02-01T12:00:00", 50, "What does the walrus operator do",
      "<p>Saw it in new code. No snippet here.</p>", ["python"], accepted=404),
    q(301, "2019-06-01T09:15:00", 14, "How to debounce an event handler",
      CODE_BODY.format(desc="Resize fires constantly.",
                       code="window.addEventListener('resize', fn)"),
      ["javascript"], accepted=405),
    q(104, "2020-02-10T13:00:00", 50, "How to vectorize this numpy loop",
      CODE_BODY.format(desc="Plain loops are slow.", code="np.add(a, b)"), ["python", "numpy"]),
    a(402, "2019-03-01T10:30:00", 201),
    q(105, "2020-02-14T09:00:00", 23, "How to merge two dicts in python",
      '<p>First attempt.</p><pre><code>a = {1: 2}</code></pre>'
      '<p>Second attempt.</p><pre><code>b = {3: 4}</code></pre>',
      ["python"], accepted=406),
    q(202, "2019-04-01T10:00:00", 3, "Why use optional chaining",
      CODE_BODY.format(desc="Null checks everywhere.", code="Optional.ofNullable(x)"),
      ["java"], accepted=407),
    q(106, "2020-03-20T10:00:00", 15, "Why does this print None",
      "<pre><code>x = print(1)\nprint(x)</code></pre>", ["python"], accepted=408),
    a(403, "2020-01-21T08:00:00", 102),
    q(107, "2020-03-25T10:00:00", 12, "How to profile a generator",
      '<p>Profiling question.</p><pre><code>   </code></pre>', ["python"], accepted=409),
    q(203, "2019-05-10T10:00:00", 40, "What is type erasure exactly",
      "<p>Generics confuse me, no code to show.</p>", ["java"], accepted=410),
    q(108, "2020-04-01T10:00:00", 11, "How to avoid KeyError lookups",
      "<p>Use <code>dict.get</code> for safe lookups?</p>", ["python"], accepted=411),
    misc(502, "2019-07-01T00:00:00", 5),
    q(109, "2020-04-15T10:00:00", 30, "Segfault?",
      CODE_BODY.format(desc="One word title above.", code="import ctypes"),
      ["python"], accepted=412),
    q(110, "2020-05-01T10:00:00", 0, "Is python pass by reference",
      "<p>Arguments surprise me.</p>", ["python"]),
    q(111, "2020-05-11T10:00:00", 100, "How to call java from python",
      CODE_BODY.format(desc="Bridging runtimes.", code="import jpype"),
      ["python", "java"], accepted=413),
    a(404, "2020-02-02T08:00:00", 103),
    q(302, "2020-01-01T09:00:00", 2, "What is a closure really",
      CODE_BODY.format(desc="Scopes leak.", code="function outer() { return () => i; }"),
      ["javascript"], accepted=414),
    q(112, "2020-06-30T10:00:00", 10, "How to reverse a string slice",
      CODE_BODY.format(desc="Slices go backwards.", code="s[::-1]"), ["python"], accepted=415),
    q(113, "2020-06-30T10:00:00", 17, "Why does zip stop early",
      CODE_BODY.format(desc="Lengths differ.", code="list(zip(a, b))"), ["python"], accepted=416),
    a(405, "2019-06-02T08:00:00", 301),
    q(114, "2020-07-20T10:00:00", 10, "How to mock datetime now",
      CODE_BODY.format(desc="Tests freeze time.", code="freeze_time('2020-01-01')"), ["python"]),
    q(204, "2021-07-07T10:00:00", 21, "How to sort a map by value",
      CODE_BODY.format(desc="Entry streams.", code="map.entrySet().stream()"),
      ["java"], accepted=417),
    q(115, "2020-08-01T10:00:00", 9, "When to use slots classes",
      "<p>Memory questions, prose only.</p>", ["python"], accepted=418),
    a(406, "2020-02-15T08:00:00", 105),
    q(116, "2020-08-19T10:00:00", 44, "How to flatten nested lists fast",
      CODE_BODY.format(desc="Nested comprehension attempt.",
                       code="[y for x in rows for y in x]"),
      ["python"], accepted=419),
    misc(503, "2020-09-01T00:00:00", 6),
    q(303, "2021-02-02T09:00:00", 27, "Why is await inside foreach broken",
      CODE_BODY.format(desc="Callbacks ignore async.", code="items.forEach(async x => {})"),
      ["javascript"], accepted=420),
    q(117, "2020-09-02T10:00:00", 13, "Why is my regex catastrophic",
      CODE_BODY.format(desc="Backtracking explodes.", code="re.match(r'(a+)+$', s)"),
      ["python", "regex"], accepted=421),
    a(407, "2019-04-02T08:00:00", 202),
    q(205, "2021-08-08T10:00:00", 33, "Why is string builder faster",
      CODE_BODY.format(desc="Concatenation in loops.", code="sb.append(part);"), ["java"]),
    q(118, "2020-10-23T10:00:00", 25, "Why does html escaping differ",
      '<p>Why does &amp; break parsing?</p><pre><code>print("x &lt; y")</code></pre>',
      ["python", "html-escaping"], accepted=422),
    a(408, "2020-03-21T08:00:00", 106),
    q(206, "2022-01-15T10:00:00", 16, "How to parse json with jackson",
      CODE_BODY.format(desc="Mapping nested records.", code="mapper.readValue(json, T.class)"),
      ["java", "jackson"], accepted=423),
    q(601, "2021-01-01T10:00:00", 50, "How to await a task safely",
      CODE_BODY.format(desc="Deadlocks in UI thread.", code="await Task.Run(fn);"),
      ["c#"], accepted=424),
    a(409, "2020-04-02T08:00:00", 108),
    q(304, "2023-03-03T09:00:00", 10, "How to deep clone an object",
      CODE_BODY.format(desc="Spread is shallow.", code="structuredClone(obj)"),
      ["javascript"], accepted=425),
    q(602, "2021-02-01T10:00:00", 5, "Why is linq query slow",
      CODE_BODY.format(desc="Materialization point.", code="query.ToList()"), ["c#"], accepted=426),
    misc(504, "2021-03-01T00:00:00", 7),
    q(603, "2021-04-01T10:00:00", 12, "How to bind a combobox",
      CODE_BODY.format(desc="WPF binding basics.", code="Binding(\"Items\")"), ["c#"], accepted=427),
    a(410, "2021-07-08T08:00:00", 204),
    q(604, "2022-05-05T10:00:00", 30, "How to marshal json in go",
      CODE_BODY.format(desc="Struct tags question.", code="json.Marshal(v)"), ["go"], accepted=428),
    q(605, "2022-06-06T10:00:00", 1, "Why are goroutines leaking",
      CODE_BODY.format(desc="Channels never close.", code="go worker()"), ["go"]),
    a(411, "2022-01-16T08:00:00", 206),
    # Broken rows: required attributes missing.
    {
        "Id": "701", "PostTypeId": "1", "CreationDate": "2022-07-01T10:00:00",
        "Score": "99", "Title": "Ruby row without a body", "Tags": "<ruby>",
        "AcceptedAnswerId": "429",
    },
    {
        "Id": "702", "PostTypeId": "1", "Score": "98",
        "Title": "Ruby row without a creation date", "Tags": "<ruby>",
        "Body": CODE_BODY.format(desc="Still has code.", code="puts 1"),
        "AcceptedAnswerId": "430",
    },
]


def main():
    assert len(ROWS) == 50, len(ROWS)
    lines = ['<?xml version="1.0" encoding="utf-8"?>', "<posts>"]
    for row in ROWS:
        attrs = " ".join(f"{k}={quoteattr(v)}" for k, v in row.items())
        lines.append(f"  <row {attrs} />")
    lines.append("</posts>")
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({len(ROWS)} rows)")


if __name__ == "__main__":
    main()
