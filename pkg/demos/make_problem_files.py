"""
Writing problem files
=====================

The command line tool reads boundary value problems from JSON. This script
writes the four files in ``demos/problems/`` from the reference problems
shipped with the package: each of the two boundary conditions, once with
the pencil decomposed from scratch and once with a hand-derived finite
part of the canonical form injected.
"""

import json
from pathlib import Path

from descriptor_bvp import reference_problems as ref
from descriptor_bvp.problem import ProblemFile, dump_matrix, problem_to_dict

OUT = Path(__file__).resolve().parent / "problems"


def is_matrix(val):
    return isinstance(val, list) and len(val) > 1 and all(isinstance(r, list) for r in val)


def dumps(doc):
    # one matrix row per line keeps the files readable and diffable
    lines = ["{"]
    items = list(doc.items())
    for i, (key, val) in enumerate(items):
        comma = "," if i < len(items) - 1 else ""
        if isinstance(val, dict):
            inner = dumps(val).replace("\n", "\n  ")
            lines.append(f"  {json.dumps(key)}: {inner}{comma}")
        elif is_matrix(val):
            rows = ",\n    ".join(json.dumps(r) for r in val)
            lines.append(f"  {json.dumps(key)}: [\n    {rows}\n  ]{comma}")
        else:
            lines.append(f"  {json.dumps(key)}: {json.dumps(val)}{comma}")
    lines.append("}")
    return "\n".join(lines)


def document(bvp, injected, **options):
    pf = ProblemFile(bvp.pencil.F, bvp.pencil.G, bvp.A1, bvp.B1, bvp.A2, bvp.B2, bvp.N)
    doc = problem_to_dict(pf)
    doc["options"].update(options)
    if injected:
        doc["options"]["wcf"] = {"Qp": dump_matrix(ref.REFERENCE_QP), "Jp": dump_matrix(ref.REFERENCE_JP),
                                 "p": 3, "q": 2}
    return doc


OUT.mkdir(exist_ok=True)
# E acts on the coefficient vector C, so it is tied to the basis Qp: the
# published E (a single theta in row 1, column 2) regularizes the kernel of K
# only in the hand-derived basis. The decomposed problem uses E = theta * I.
E = dump_matrix(ref.PUBLISHED_E)
files = {
    "deficient.json": document(ref.deficient_problem(), False),
    "deficient_injected.json": document(ref.deficient_problem(), True, E=E),
    "full_rank.json": document(ref.full_rank_problem(), False),
    "full_rank_injected.json": document(ref.full_rank_problem(), True),
}
for name, doc in files.items():
    text = dumps(doc) + "\n"
    # every file must parse back to the same document
    assert json.loads(text) == doc
    (OUT / name).write_text(text)
    print("wrote", OUT / name)
