#!/usr/bin/env python3
"""Straight-line reference computation of the similarity breakdown.

Reads the fixture pairs listed in ../pairs/pairs.json, evaluates every
dimension from the raw XML, and writes ../pairs/expected.json.

Deliberately shares no code with the Rust crate: the XML is read with
ElementTree, the assignment is solved with scipy, and every formula is
spelled out inline.

    python3 oracle.py            # rewrite expected.json
    python3 oracle.py --check    # exit 1 if expected.json is out of date
"""

import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np
import xml.etree.ElementTree as ET
from scipy.optimize import linear_sum_assignment

HERE = Path(__file__).resolve().parent
PAIRS_DIR = HERE.parent / "pairs"
BPMN_NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"
DIMENSION = 384
BINS = 20

TASK = {"task", "userTask", "serviceTask", "scriptTask", "manualTask", "sendTask",
        "receiveTask", "businessRuleTask", "callActivity", "subProcess",
        "transaction", "adHocSubProcess"}
GATEWAY = {"exclusiveGateway", "parallelGateway", "inclusiveGateway",
           "eventBasedGateway", "complexGateway"}
EVENT = {"startEvent", "endEvent", "intermediateCatchEvent",
         "intermediateThrowEvent", "boundaryEvent"}
DATA = {"dataObject", "dataObjectReference", "dataStoreReference", "dataInput",
        "dataOutput", "dataStore"}
FLOW = {"sequenceFlow", "messageFlow", "association", "dataInputAssociation",
        "dataOutputAssociation"}


def category(tag):
    if tag in TASK:
        return "Task"
    if tag in GATEWAY:
        return "Gateway"
    if tag in EVENT:
        return "Event"
    if tag in DATA:
        return "Data"
    if tag in FLOW:
        return "Flow"
    return "Other"


def split_tag(qname):
    if qname.startswith("{"):
        ns, local = qname[1:].split("}", 1)
        return ns, local
    return None, qname


# ---------------------------------------------------------------- graph

def load_graph(path):
    root = ET.parse(path).getroot()
    nodes = {}          # id -> (tag, label, category)
    order = []          # node ids in document order
    raw_edges = []      # (id, source, target, tag)
    counter = [0]

    def visit(elem, parent_node):
        ns, tag = split_tag(elem.tag)
        cat = category(tag) if ns == BPMN_NS else "Other"
        here = parent_node
        if cat in ("Task", "Gateway", "Event", "Data"):
            eid = elem.get("id") or ""
            if eid and eid not in nodes:
                label = " ".join((elem.get("name") or "").split())
                nodes[eid] = (tag, label, cat)
                order.append(eid)
                if tag == "boundaryEvent" and elem.get("attachedToRef"):
                    raw_edges.append((eid + "#attachedToRef", elem.get("attachedToRef"), eid, "attachedToRef"))
            here = eid or parent_node
        elif cat == "Flow":
            eid = elem.get("id")
            if not eid:
                counter[0] += 1
                eid = "%s#%s%d" % (parent_node or "flow", tag, counter[0])
            if tag == "dataInputAssociation":
                src = elem.find("{%s}sourceRef" % BPMN_NS)
                if src is not None and parent_node:
                    raw_edges.append((eid, (src.text or "").strip(), parent_node, tag))
            elif tag == "dataOutputAssociation":
                dst = elem.find("{%s}targetRef" % BPMN_NS)
                if dst is not None and parent_node:
                    raw_edges.append((eid, parent_node, (dst.text or "").strip(), tag))
            elif elem.get("sourceRef") and elem.get("targetRef"):
                raw_edges.append((eid, elem.get("sourceRef"), elem.get("targetRef"), tag))
        for child in elem:
            if isinstance(child.tag, str):
                visit(child, here)

    for child in root:
        cns, _ = split_tag(child.tag)
        if cns == BPMN_NS:
            visit(child, None)

    edges = [e for e in raw_edges if e[1] in nodes and e[2] in nodes]
    return {"nodes": nodes, "order": order, "edges": edges}


def degrees(g):
    deg = {n: 0 for n in g["order"]}
    for _, s, t, _ in g["edges"]:
        deg[s] += 1
        deg[t] += 1
    return deg


def display(g, n):
    tag, label, _ = g["nodes"][n]
    return label if label else tag


def neighbor_labels(g, n):
    adjacent = set()
    for _, s, t, _ in g["edges"]:
        if s == n:
            adjacent.add(t)
        if t == n:
            adjacent.add(s)
    return sorted(display(g, m) for m in adjacent)


# ---------------------------------------------------------------- structural

def ratio(a, b):
    if a == 0 and b == 0:
        return 1.0
    if a == 0 or b == 0:
        return 0.0
    return min(a, b) / max(a, b)


def pearson_abs(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0 and syy == 0:
        return 1.0 if x == y else ratio(x[0], y[0])
    if sxx == 0 or syy == 0:
        return 0.0
    return min(1.0, abs(sxy / math.sqrt(sxx * syy)))


def structural(g1, g2):
    def stats(g):
        n, e = len(g["order"]), len(g["edges"])
        dens = min(1.0, e / (n * (n - 1))) if n >= 2 else 0.0
        avg = 2 * e / n if n > 0 else 0.0
        return n, e, dens, avg, sorted(degrees(g).values(), reverse=True)

    n1, e1, d1, a1, s1 = stats(g1)
    n2, e2, d2, a2, s2 = stats(g2)
    length = max(len(s1), len(s2))
    if length == 0:
        deg = 1.0
    else:
        x = [float(v) for v in s1] + [0.0] * (length - len(s1))
        y = [float(v) for v in s2] + [0.0] * (length - len(s2))
        deg = 1.0 if x == y else pearson_abs(x, y)
    return (ratio(n1, n2) + ratio(e1, e2) + ratio(d1, d2) + ratio(a1, a2) + deg) / 5


# ---------------------------------------------------------------- type distribution

def distribution(g):
    counts = {}
    for n in g["order"]:
        cat = g["nodes"][n][2]
        counts[cat] = counts.get(cat, 0) + 1
    counts["Flow"] = counts.get("Flow", 0) + len(g["edges"])
    counts = {k: v for k, v in counts.items() if v > 0}
    total = sum(counts.values())
    return total, {k: v / total for k, v in counts.items()} if total else {}


def type_distribution(g1, g2):
    t1, p = distribution(g1)
    t2, q = distribution(g2)
    if t1 == 0 and t2 == 0:
        return 1.0
    if t1 == 0 or t2 == 0:
        return 0.0
    js = 0.0
    for k in set(p) | set(q):
        a, b = p.get(k, 0.0), q.get(k, 0.0)
        m = (a + b) / 2
        if a > 0:
            js += 0.5 * a * math.log2(a / m)
        if b > 0:
            js += 0.5 * b * math.log2(b / m)
    return max(0.0, 1.0 - js)


# ---------------------------------------------------------------- embeddings

def tokens(text):
    out, cur = [], []
    for ch in text.lower():
        if ch.isalnum():
            cur.append(ch)
        elif cur:
            out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return out


def embed(text):
    v = [0.0] * DIMENSION
    for tok in tokens(text):
        d = hashlib.sha256(tok.encode("utf-8")).digest()
        bucket = int.from_bytes(d[:8], "little") % DIMENSION
        v[bucket] += -1.0 if d[8] & 1 else 1.0
    norm = math.sqrt(sum(c * c for c in v))
    return [c / norm for c in v] if norm > 0 else v


def set_similarity(t1, t2):
    if not t1 and not t2:
        return 1.0
    if not t1 or not t2:
        return 0.0
    e1 = [embed(t) for t in t1]
    e2 = [embed(t) for t in t2]
    w = np.zeros((len(t1), len(t2)))
    for i, (a, va) in enumerate(zip(t1, e1)):
        for j, (b, vb) in enumerate(zip(t2, e2)):
            if a == b:
                w[i, j] = 1.0
            else:
                w[i, j] = min(1.0, max(0.0, sum(x * y for x, y in zip(va, vb))))
    rows, cols = linear_sum_assignment(w, maximize=True)
    return min(1.0, float(w[rows, cols].sum()) / max(len(t1), len(t2)))


def named(g):
    return [n for n in g["order"] if g["nodes"][n][2] != "Other"]


def name_texts(g):
    return ["%s neighbors: %s" % (display(g, n), ", ".join(neighbor_labels(g, n))) for n in named(g)]


def type_texts(g):
    return [g["nodes"][n][0] for n in named(g)] + [e[3] for e in g["edges"]]


def name_type_texts(g):
    return ["%s [%s] neighbors: %s" % (display(g, n), g["nodes"][n][0], ", ".join(neighbor_labels(g, n)))
            for n in named(g)]


def breakdown(p1, p2):
    g1, g2 = load_graph(p1), load_graph(p2)
    dims = {
        "structural": structural(g1, g2),
        "type_distribution": type_distribution(g1, g2),
        "semantic_name": set_similarity(name_texts(g1), name_texts(g2)),
        "semantic_type": set_similarity(type_texts(g1), type_texts(g2)),
        "semantic_name_type": set_similarity(name_type_texts(g1), name_type_texts(g2)),
    }
    dims["overall"] = sum(dims.values()) / 5
    return dims


def main():
    pairs = json.loads((PAIRS_DIR / "pairs.json").read_text())
    per_pair = {}
    for p in pairs:
        per_pair[p["id"]] = breakdown(PAIRS_DIR / p["ground_truth"], PAIRS_DIR / p["reconstruction"])
    keys = ["structural", "type_distribution", "semantic_name", "semantic_type",
            "semantic_name_type", "overall"]
    averages = {k: sum(b[k] for b in per_pair.values()) / len(per_pair) for k in keys}
    histogram = [0] * BINS
    for b in per_pair.values():
        histogram[min(int(math.floor(b["overall"] * BINS)), BINS - 1)] += 1
    result = {"pairs": per_pair, "averages": averages, "histogram": histogram}
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    target = PAIRS_DIR / "expected.json"
    if "--check" in sys.argv:
        if not target.exists() or json.loads(target.read_text()) != result:
            print("expected.json is out of date")
            sys.exit(1)
        print("expected.json is current")
        return
    target.write_text(text)
    print("wrote", target)


if __name__ == "__main__":
    main()
