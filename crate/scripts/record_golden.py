"""Record the segmenter golden corpus.

Reference boundaries come from NLTK's Punkt sentence tokenizer, applied per
newline-delimited paragraph. The pretrained Punkt model is not required: the
tokenizer runs with its default parameters plus a declared abbreviation list.
Bare item numbers that Punkt splits off a numbered line are merged back.
Run once offline; the output is committed as a test fixture.

    python3 scripts/record_golden.py > crates/core/tests/fixtures/segmenter_golden.jsonl
"""

import json
import re

from nltk.tokenize.punkt import PunktParameters, PunktSentenceTokenizer

from segmenter_corpus import DOCS

ABBREVIATIONS = {
    "dr", "mr", "mrs", "ms", "prof", "st", "jr", "sr", "vs", "etc", "e.g", "i.e",
    "u.s", "u.k", "inc", "ltd", "co", "corp", "no", "fig", "approx", "mt", "p.m", "a.m",
    "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
}

LIST_NUMBER = re.compile(r"^\d{1,3}\.$")


def merge_list_numbers(parts):
    """Punkt splits "1." off a numbered item; the item number stays with its text."""
    out = []
    for p in parts:
        if out and LIST_NUMBER.match(out[-1]):
            out[-1] = out[-1] + " " + p
        else:
            out.append(p)
    return out


def main():
    params = PunktParameters()
    params.abbrev_types = set(ABBREVIATIONS)
    tokenizer = PunktSentenceTokenizer(params)
    for i, text in enumerate(DOCS):
        sentences = []
        for paragraph in text.split("\n"):
            if paragraph.strip():
                sentences.extend(merge_list_numbers(tokenizer.tokenize(paragraph.strip())))
        print(json.dumps({"doc_id": f"doc{i:02d}", "text": text, "sentences": sentences}, ensure_ascii=False))


if __name__ == "__main__":
    main()
