"""stepflow-eval: compute draft, question, and tone metrics from JSONL files.

Input formats:
    diff/readability/diversity: {"original": ..., "revised": ..., "task": ..., "tool_tag": ...}
    eqf:  {"question": ..., "label": "necessary|unnecessary|skipped"}
    tone: {"text": ..., "gold": ..., "predicted": ...}

--out writes CSV or JSON depending on the file extension; without it the
report is printed as JSON on stdout.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path


def _write_rows(rows: list[dict], out: str | None) -> None:
    if out and out.endswith(".csv"):
        with open(out, "w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(rows[0]) if rows else [])
            writer.writeheader()
            writer.writerows(rows)
    else:
        _write_json(rows, out)


def _write_json(payload, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _write_tone(report: dict, out: str | None) -> None:
    if out and out.endswith(".csv"):
        with open(out, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["tone", "precision", "recall", "f1", "support"])
            for row in report["classes"]:
                writer.writerow(
                    [
                        row["tone"],
                        f"{row['precision']:.4f}",
                        f"{row['recall']:.4f}",
                        f"{row['f1']:.4f}",
                        row["support"],
                    ]
                )
            writer.writerow(["accuracy", f"{report['accuracy']:.4f}", "", "", ""])
            writer.writerow(["macro_f1", f"{report['macro_f1']:.4f}", "", "", ""])
            writer.writerow(["weighted_f1", f"{report['weighted_f1']:.4f}", "", "", ""])
    else:
        _write_json(report, out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stepflow-eval", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("diff", "readability", "diversity", "eqf", "tone"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--input", required=True, help="input JSONL path")
        cmd.add_argument("--out", help="output path (.csv or .json)")
        if name == "diff":
            cmd.add_argument(
                "--mode",
                choices=("span", "word"),
                default="span",
                help="count edits per opcode span (default) or per word",
            )
    return parser


def main(argv: list[str] | None = None) -> int:
    from . import report as rpt

    args = build_parser().parse_args(argv)

    if args.command == "diff":
        pairs = rpt.load_draft_pairs(args.input)
        _write_rows(rpt.diff_report(pairs, mode=args.mode), args.out)
    elif args.command == "readability":
        pairs = rpt.load_draft_pairs(args.input)
        _write_rows(rpt.readability_report(pairs), args.out)
    elif args.command == "diversity":
        from ..gateway.providers import mock_embed

        pairs = rpt.load_draft_pairs(args.input)
        _write_rows(rpt.diversity_report(pairs, mock_embed), args.out)
    elif args.command == "eqf":
        labels = [rec["label"] for rec in rpt.read_jsonl(args.input)]
        _write_json(rpt.eqf_report(labels), args.out)
    elif args.command == "tone":
        records = rpt.read_jsonl(args.input)
        gold = [rec["gold"] for rec in records]
        predicted = [rec["predicted"] for rec in records]
        _write_tone(rpt.tone_report(gold, predicted), args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
