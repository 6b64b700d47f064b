#!/usr/bin/env python3
# Copyright 2026 The ArgStruct Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""Reference oracle for the fixture suite.

A standalone reimplementation of the corpus reader, suru merging, unique
argument resolution, category classification and the scorer. It writes the
expected outputs under fixtures/ that the C++ fixture suite compares against.

  fixture_oracle.py            regenerate every expected file
  fixture_oracle.py --check    exit 1 if any expected file is stale
"""

import argparse
import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
LIGHT_VERBS = {"する", "し", "さ", "せ"}
CASES = ["NOM", "ACC", "DAT"]


def read_corpus(text):
    docs = []
    sentence = None

    def finish():
        nonlocal sentence
        if sentence is not None:
            docs[-1]["sentences"].append(build_sentence(sentence))
            sentence = None

    for raw in text.split("\n"):
        line = raw.rstrip("\r ")
        if not line:
            finish()
        elif line.startswith("#DOC "):
            docs.append({"id": line[5:], "sentences": []})
        elif line.startswith("#DEP"):
            sentence = {"heads": [int(h) for h in line[4:].split()], "rows": []}
        else:
            sentence["rows"].append(line.split("\t"))
    finish()
    return docs


def build_sentence(raw):
    tokens = []
    instances = []
    pending = []
    for index, surface, bunsetsu, marker, args in raw["rows"]:
        t = int(index)
        kind, _, iid = marker.partition(":")
        tokens.append({"surface": surface, "b": int(bunsetsu), "vn": marker == "VN"})
        if kind in ("PRED", "EVENT"):
            instances.append({"id": iid, "task": "PASA" if kind == "PRED" else "ENASA",
                              "marked": t, "trigger": t, "args": [], "demoted": []})
        if args != "_":
            for item in args.split(";"):
                case, _, iid = item.partition("=")
                pending.append((t, case, iid))
    by_id = {inst["id"]: inst for inst in instances}
    for t, case, iid in pending:
        by_id[iid]["args"].append((t, case))
    spans = {}
    for i, tok in enumerate(tokens):
        lo, hi = spans.get(tok["b"], (i, i + 1))
        spans[tok["b"]] = (min(lo, i), max(hi, i + 1))
    return {"tokens": tokens, "heads": raw["heads"], "spans": spans, "instances": instances}


def linked(s, a, b):
    ba, bb = s["tokens"][a]["b"], s["tokens"][b]["b"]
    return ba != bb and (s["heads"][ba] == bb or s["heads"][bb] == ba)


def category(s, inst, t):
    if s["tokens"][t]["b"] == s["tokens"][inst["trigger"]]["b"]:
        return "Bunsetsu"
    return "Dep" if linked(s, t, inst["trigger"]) else "Zero"


def merge_suru(s):
    for inst in s["instances"]:
        t = inst["trigger"]
        if inst["task"] != "PASA" or s["tokens"][t]["surface"] not in LIGHT_VERBS or t == 0:
            continue
        prev = s["tokens"][t - 1]
        if prev["b"] != s["tokens"][t]["b"] or not prev["vn"]:
            continue
        if any(a == t - 1 for a, _ in inst["args"]):
            continue
        inst["trigger"] = t - 1


def resolve_unique(s, inst):
    trig = inst["trigger"]

    def key(arg):
        return (not linked(s, arg[0], trig), abs(arg[0] - trig), arg[0] > trig)

    keep = []
    for case in CASES:
        cands = [a for a in inst["args"] if a[1] == case]
        if cands:
            best = min(cands, key=key)
            keep.append(best)
            inst["demoted"].extend(a for a in cands if a is not best)
    inst["args"] = [a for a in inst["args"] if a in keep]
    inst["demoted"].sort(key=lambda a: a[0])


def preprocess(docs):
    for doc in docs:
        for s in doc["sentences"]:
            merge_suru(s)
            for inst in s["instances"]:
                resolve_unique(s, inst)
    return docs


def dump(docs):
    out = []
    for doc in docs:
        out.append("DOC %s sentences=%d" % (doc["id"], len(doc["sentences"])))
        for i, s in enumerate(doc["sentences"]):
            out.append("SENT %d tokens=%d bunsetsu=%d" % (i, len(s["tokens"]), len(s["heads"])))
            for b, head in enumerate(s["heads"]):
                lo, hi = s["spans"][b]
                out.append("  B %d [%d,%d) head=%d" % (b, lo, hi, head))
            for t, tok in enumerate(s["tokens"]):
                out.append("  T %d %s b=%d%s" % (t, tok["surface"], tok["b"],
                                                 " VN" if tok["vn"] else ""))
            for inst in s["instances"]:
                parts = ["  I %s %s marked=%d trigger=%d" % (inst["id"], inst["task"],
                                                            inst["marked"], inst["trigger"])]
                parts += ["%d:%s:%s" % (t, c, category(s, inst, t)) for t, c in inst["args"]]
                parts += ["demoted=%d:%s" % (t, c) for t, c in inst["demoted"]]
                out.append(" ".join(parts))
    return "\n".join(out) + "\n" if out else ""


def score(pred_docs, gold_docs, task, categories):
    cols_cat = ["ALL", "Dep", "Zero", "Bunsetsu"]
    cols_case = ["ALL"] + CASES
    cells = {(c, k): [0, 0, 0] for c in cols_cat for k in cols_case}
    preds = {}
    for doc in pred_docs:
        for i, s in enumerate(doc["sentences"]):
            for inst in s["instances"]:
                labels = {t: c for t, c in inst["args"]}
                preds[(doc["id"], i, inst["id"])] = labels

    def book(cat, case, field):
        for c in (["ALL"] + ([cat] if cat else [])):
            for k in ("ALL", case):
                cells[(c, k)][field] += 1

    for doc in gold_docs:
        for i, s in enumerate(doc["sentences"]):
            for inst in s["instances"]:
                if inst["task"] != task:
                    continue
                pred = preds[(doc["id"], i, inst["id"])]
                gold = {t: c for t, c in inst["args"]}
                for t in range(len(s["tokens"])):
                    cat = category(s, inst, t)
                    in_scope = cat in categories
                    p, g = pred.get(t), gold.get(t)
                    if p is not None:
                        book(cat if in_scope else None, p, 0 if (in_scope and p == g) else 1)
                    if g is not None and in_scope and p != g:
                        book(cat, g, 2)
    shown = ["ALL"] + [c for c in ["Dep", "Zero", "Bunsetsu"] if c in categories]
    result = []
    for c in shown:
        for k in cols_case:
            tp, fp, fn = cells[(c, k)]
            p = tp / (tp + fp) if tp + fp else 0.0
            r = tp / (tp + fn) if tp + fn else 0.0
            f = 2 * p * r / (p + r) if p + r else 0.0
            result.append({"category": c, "case": k, "tp": tp, "fp": fp, "fn": fn,
                           "precision": round(p, 12), "recall": round(r, 12), "f1": round(f, 12)})
    return result


SCOPES = {"PASA": ["Dep", "Zero"], "ENASA": ["Dep", "Zero", "Bunsetsu"]}


def expected_files():
    files = {}
    for path in sorted((FIXTURES / "corpus").glob("*.ntcl")):
        text = path.read_text(encoding="utf-8")
        files[path.with_suffix(".dump")] = dump(read_corpus(text))
        files[path.with_suffix(".preprocessed.dump")] = dump(preprocess(read_corpus(text)))
    for gold_path in sorted((FIXTURES / "scorer").glob("*.gold.ntcl")):
        name = gold_path.name[: -len(".gold.ntcl")]
        pred_path = gold_path.with_name(name + ".pred.ntcl")
        gold = preprocess(read_corpus(gold_path.read_text(encoding="utf-8")))
        pred = read_corpus(pred_path.read_text(encoding="utf-8"))
        report = {}
        for task in ("PASA", "ENASA"):
            if any(inst["task"] == task for d in gold for s in d["sentences"]
                   for inst in s["instances"]):
                for scope_name, cats in SCOPES.items():
                    report["%s/%s" % (task, scope_name)] = score(pred, gold, task, cats)
        files[gold_path.with_name(name + ".expected.json")] = json.dumps(report, indent=1) + "\n"
    return files


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--check", action="store_true", help="verify instead of writing")
    args = parser.parse_args()
    stale = []
    for path, content in expected_files().items():
        if args.check:
            if not path.exists() or path.read_text(encoding="utf-8") != content:
                stale.append(path)
        else:
            path.write_text(content, encoding="utf-8")
            print("wrote", path.relative_to(ROOT))
    for path in stale:
        print("stale:", path.relative_to(ROOT))
    return 1 if stale else 0


if __name__ == "__main__":
    sys.exit(main())
