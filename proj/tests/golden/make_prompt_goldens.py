#!/usr/bin/env python3
"""Writes the frozen prompt fixtures for the geo schema.

Independent of the C++ prompt code: reads schema.json and the SQLite file
directly and lays the prompt out by hand. Rerun only when the prompt format
changes on purpose.
"""
import json
import sqlite3
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
GEO = ROOT / "data" / "geo"
OUT = Path(__file__).resolve().parent
ROWS = 3
INSTRUCTION = ("Using valid SQLite, answer the following questions for the "
               "tables provided above.")
TARGET = "what can you tell me about the population of missouri"


def schema_block(desc, db):
    blocks = []
    for table in desc["tables"]:
        cols = [f'{c["name"]} {c["type"]}'.rstrip() for c in table["columns"]]
        fks = [f'FOREIGN KEY ({fk["column"]}) REFERENCES {fk["ref_table"]}({fk["ref_column"]})'
               for fk in table.get("foreign_keys", [])]
        lines = [f'CREATE TABLE {table["name"]} ({", ".join(cols + fks)})', "/*",
                 f'SELECT * FROM {table["name"]} LIMIT {ROWS};',
                 "\t".join(c["name"] for c in table["columns"])]
        casts = ", ".join(f'CAST("{c["name"]}" AS TEXT)' for c in table["columns"])
        for row in db.execute(f'SELECT {casts} FROM "{table["name"]}" LIMIT {ROWS}'):
            lines.append("\t".join("NULL" if v is None else v for v in row))
        lines.append("*/")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def demo(nl, sql):
    sql = sql.strip()
    if not sql.endswith(";"):
        sql += ";"
    return f"-- {nl.strip()}\n{sql}\n"


def main():
    desc = json.loads((GEO / "schema.json").read_text())
    db = sqlite3.connect(GEO / desc["db_path"])
    rows = [json.loads(l) for l in (GEO / "geoquery.jsonl").read_text().splitlines() if l.strip()]
    if not any(r["nl"] == TARGET and r["split"] == "test" for r in rows):
        sys.exit("target utterance missing from the test split")
    train = [r for r in rows if r["split"] == "train"][:10]
    head = schema_block(desc, db) + f"\n\n-- {INSTRUCTION}\n\n"
    tail = f"-- {TARGET}\nSELECT"
    (OUT / "geo_zero_shot.txt").write_text(head + tail)
    (OUT / "geo_ten_shot.txt").write_text(head + "".join(demo(r["nl"], r["sql"]) for r in train) + tail)


if __name__ == "__main__":
    main()
