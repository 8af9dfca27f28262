#!/usr/bin/env python3
"""Regenerates the bundled demo inputs under data/.

Deterministic; run from the repository root:
    python3 tools/make_demo_data.py
"""

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data"

SUBJECTS = [
    "the carbonate electrolyte", "the composite anode", "the ceramic separator",
    "the lithium salt", "the polymer binder", "the graphite lattice",
    "the solvation shell", "the passivation layer", "the nickel-rich cathode",
    "the sulfolane mixture", "the fluorinated additive", "the gel membrane",
]
VERBS = [
    "stabilizes", "suppresses", "accelerates", "passivates", "dissolves",
    "coordinates", "degrades", "wets", "intercalates into", "reacts with",
    "migrates toward", "shields",
]
OBJECTS = [
    "the metal interface", "dendrite growth", "ion transport", "the cathode surface",
    "interfacial impedance", "the charge transfer step", "solvent oxidation",
    "capacity fade", "the anion framework", "thermal runaway", "gas evolution",
    "electrode swelling",
]
TAILS = [
    "at elevated temperature", "under fast charging", "during the first cycle",
    "in dilute solutions", "above four volts", "after prolonged storage",
    "in the presence of trace water", "at low temperature", "under high pressure",
    "with minor additive content", "across repeated cycling", "near the melting point",
]
SOURCES = ["peer_reviewed", "arxiv", "chemrxiv", "open_research", "pubchem",
           "book", "plos", "other"]


def sentence(rng):
    return " ".join([rng.choice(SUBJECTS), rng.choice(VERBS), rng.choice(OBJECTS),
                     rng.choice(TAILS)]).capitalize() + "."


def paragraph(rng, sentences):
    return "\n".join(sentence(rng) for _ in range(sentences))


def near_duplicate(text, rng):
    words = text.split(" ")
    # nudge a couple of words; word-window overlap stays very high
    for _ in range(2):
        i = rng.randrange(len(words))
        words[i] = words[i] + "x"
    return " ".join(words)


def make_corpus(rng):
    docs = []
    for i in range(84):
        docs.append({
            "id": f"doc{i:03d}",
            "text": paragraph(rng, rng.randint(14, 22)),
            "source": SOURCES[i % len(SOURCES)],
            "meta": {"year": str(2015 + i % 10)},
        })
    # 8 near-duplicate copies of the first 8 documents
    for i in range(8):
        docs.append({
            "id": f"doc{i:03d}-copy",
            "text": near_duplicate(docs[i]["text"], rng),
            "source": docs[i]["source"],
            "meta": {"copy_of": docs[i]["id"]},
        })
    # 8 documents the quality filter should reject
    for i in range(4):
        docs.append({
            "id": f"low{i:02d}-short",
            "text": sentence(rng),
            "source": "other",
        })
    for i in range(2):
        docs.append({
            "id": f"low{i:02d}-repeat",
            "text": "\n".join(["the cell cycles the cell rests"] * 80),
            "source": "other",
        })
    for i in range(2):
        docs.append({
            "id": f"low{i:02d}-symbols",
            "text": " ".join(["#$%@^&*!" for _ in range(120)]),
            "source": "other",
        })
    return docs


CHAT_PROMPTS = [
    ("How do I convert joules to watt hours?",
     "Divide by 3600: one watt hour is 3600 joules."),
    ("Summarize what a separator does in one sentence.",
     "It keeps the electrodes apart while letting ions through."),
    ("What is a reasonable unit for current density?",
     "Milliamps per square centimeter is the common choice."),
    ("Explain overpotential like I'm new to the field.",
     "It is the extra voltage beyond the thermodynamic minimum needed to drive a reaction at a useful rate."),
    ("Name one reason cells fade with cycling.",
     "Active lithium gets trapped in side reactions at the electrode interfaces."),
    ("What does SOC stand for?",
     "State of charge, the fraction of capacity currently stored."),
]


def make_chat(rng, n=30):
    samples = []
    for i in range(n):
        q, a = CHAT_PROMPTS[i % len(CHAT_PROMPTS)]
        samples.append({
            "id": f"chat{i:03d}",
            "source_doc_id": "",
            "task_kind": "chat",
            "prompt": q if i < len(CHAT_PROMPTS) else f"{q} (variant {i})",
            "response": a,
            "trace_len": 0,
        })
    return samples


MOLECULES = [
    # (name, representation, known good)
    ("ethylene carbonate", "C3H4O3", True),
    ("dimethyl carbonate", "C3H6O3", True),
    ("ethyl methyl carbonate", "C4H8O3", True),
    ("diethyl carbonate", "C5H10O3", True),
    ("propylene carbonate", "C4H6O3", True),
    ("fluoroethylene carbonate", "C3H3FO3", True),
    ("vinylene carbonate", "C3H2O3", True),
    ("1,3-dioxolane", "C3H6O2", True),
    ("1,2-dimethoxyethane", "C4H10O2", False),
    ("sulfolane", "C4H8O2S", False),
    ("acetonitrile", "C2H3N", False),
    ("tetrahydrofuran", "C4H8O", False),
    ("diglyme", "C6H14O3", False),
    ("gamma-butyrolactone", "C4H6O2", False),
    ("methyl acetate", "C3H6O2", False),
    ("ethyl acetate", "C4H8O2", False),
    ("dimethyl sulfoxide", "C2H6OS", False),
    ("n-methylpyrrolidone", "C5H9NO", False),
    ("toluene", "C7H8", False),
    ("hexane", "C6H14", False),
    ("benzene", "C6H6", False),
    ("chloroform", "CHCl3", False),
    ("methanol", "CH4O", False),
    ("ethanol", "C2H6O", False),
    ("isopropanol", "C3H8O", False),
    ("acetone", "C3H6O", False),
    ("diethyl ether", "C4H10O", False),
    ("nitromethane", "CH3NO2", False),
    ("pyridine", "C5H5N", False),
    ("aniline", "C6H7N", False),
    ("formamide", "CH3NO", False),
    ("glycerol", "C3H8O3", False),
    ("ethylene glycol", "C2H6O2", False),
    ("propionitrile", "C3H5N", False),
    ("butyronitrile", "C4H7N", False),
    ("dimethylformamide", "C3H7NO", False),
    ("trimethyl phosphate", "C3H9O4P", False),
    ("triethyl phosphate", "C6H15O4P", False),
    ("methyl formate", "C2H4O2", False),
    ("water", "H2O", False),
]


def make_molecules():
    mols = []
    for i, (name, rep, good) in enumerate(MOLECULES):
        record = {"id": f"mol{i:03d}", "name": name, "representation": rep}
        if good:
            record["is_known_good"] = True
        mols.append(record)
    return mols


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def main():
    OUT.mkdir(exist_ok=True)
    rng = random.Random(20240817)
    write_jsonl(OUT / "demo_corpus.jsonl", make_corpus(rng))
    write_jsonl(OUT / "demo_chat.jsonl", make_chat(rng))
    write_jsonl(OUT / "demo_molecules.jsonl", make_molecules())

    config = {
        "paths": {
            "corpus_in": "data/demo_corpus.jsonl",
            "chat_samples": "data/demo_chat.jsonl",
            "molecules": "data/demo_molecules.jsonl",
            "workdir": "work",
        },
        "dedup": {"window": 5, "signature_width": 128, "bands": 16, "rows": 8,
                  "threshold": 0.8},
        "filter": {"min_words": 50},
        "pack": {"seq_len": 8192},
        "sftgen": {"train_fraction": 0.8, "min_words": 50,
                   "refine_enabled": True, "refine_target": 24},
        "rag": {"chunk_size": 96, "overlap": 16, "top_k": 3},
        "screening": {"max_rounds": 3, "top_k": 3},
        "backends": {
            "generator": {"kind": "offline"},
            "reflector": {"kind": "offline"},
            "grader_small": {"kind": "offline"},
            "grader_large": {"kind": "offline"},
            "verifier": {"kind": "offline"},
        },
        "seed": 0,
        "workers": 2,
    }
    with open(OUT / "demo_config.json", "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote demo inputs to {OUT}")


if __name__ == "__main__":
    main()
