#!/usr/bin/env python3
"""Regenerate the compound-score parity fixture from the reference VADER scorer.

Usage: vader_oracle.py <dir containing vaderSentiment package> <sentences.txt> <out.json>

The compound score is captured before the reference implementation rounds it
to four decimals, so the fixture holds full double precision values.
"""
import json
import sys

sys.path.insert(0, sys.argv[1])
import vaderSentiment.vaderSentiment as vs  # noqa: E402

captured = []
_normalize = vs.normalize


def _capture(score, alpha=15):
    value = _normalize(score, alpha)
    captured.append(value)
    return value


vs.normalize = _capture
analyzer = vs.SentimentIntensityAnalyzer()


def label(score):
    if score <= -0.05:
        return "negative"
    if score >= 0.05:
        return "positive"
    return "neutral"


rows = []
with open(sys.argv[2], encoding="utf-8") as f:
    for line in f:
        text = line.rstrip("\n")
        if not text:
            continue
        captured.clear()
        rounded = analyzer.polarity_scores(text)["compound"]
        compound = captured[-1] if captured else 0.0
        rows.append({"text": text, "compound": compound, "rounded": rounded, "label": label(compound)})

with open(sys.argv[3], "w", encoding="utf-8") as f:
    json.dump({"generator": "vaderSentiment 3.3.2", "sentences": rows}, f, indent=1)
    f.write("\n")
print(len(rows))
