#!/usr/bin/env python3
"""Build a srcidx/1 source index for C sources.

With universal-ctags on PATH the function ranges come from
  ctags --output-format=json --fields=+ne --kinds-c=f
otherwise a small brace scanner is used, which is enough for ordinary
K&R/Allman-free C like the bundled demo. Paths are written relative to --root.
"""

import argparse
import json
import re
import shutil
import subprocess
import sys
from pathlib import Path

DEF = re.compile(r"^[A-Za-z_][\w\s\*]*?\b([A-Za-z_]\w*)\s*\(")


def from_ctags(files, root):
    out = []
    cmd = ["ctags", "--output-format=json", "--fields=+ne", "--kinds-c=f", "-o", "-"]
    res = subprocess.run(cmd + [str(f) for f in files], check=True, capture_output=True, text=True)
    for line in res.stdout.splitlines():
        tag = json.loads(line)
        if tag.get("_type") != "tag" or "end" not in tag:
            continue
        out.append({
            "file": Path(tag["path"]).resolve().relative_to(root).as_posix(),
            "function": tag["name"],
            "start_line": tag["line"],
            "end_line": tag["end"],
        })
    return out


def strip_noise(text):
    # blank out comments and literals but keep line structure
    text = re.sub(r"/\*.*?\*/", lambda m: re.sub(r"[^\n]", " ", m.group()), text, flags=re.S)
    text = re.sub(r"//[^\n]*", "", text)
    return re.sub(r'"(\\.|[^"\\\n])*"|\'(\\.|[^\'\\\n])*\'', '""', text)


def scan(path, root):
    lines = strip_noise(path.read_text()).splitlines()
    out, depth, pending, current = [], 0, None, None
    for no, line in enumerate(lines, 1):
        if depth == 0 and current is None:
            m = DEF.match(line)
            if m and not line.lstrip().startswith(("#", "typedef")):
                pending = (m.group(1), no)
        for ch in line:
            if ch == "{":
                if depth == 0 and pending:
                    current, pending = pending, None
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0 and current:
                    out.append({
                        "file": path.resolve().relative_to(root).as_posix(),
                        "function": current[0],
                        "start_line": current[1],
                        "end_line": no,
                    })
                    current = None
        if depth == 0 and line.rstrip().endswith(";"):
            pending = None
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("sources", nargs="+", type=Path, help="C files or directories")
    ap.add_argument("--root", type=Path, default=Path("."), help="paths are written relative to this")
    ap.add_argument("--scan", action="store_true", help="use the brace scanner even if ctags exists")
    ap.add_argument("-o", "--output", type=Path, help="default: stdout")
    args = ap.parse_args()

    root = args.root.resolve()
    files = []
    for s in args.sources:
        files += sorted(s.rglob("*.c")) if s.is_dir() else [s]
    if shutil.which("ctags") and not args.scan:
        entries = from_ctags(files, root)
    else:
        entries = [e for f in files for e in scan(f, root)]
    entries.sort(key=lambda e: (e["file"], e["start_line"]))
    doc = json.dumps({"schema": "srcidx/1", "entries": entries}, indent=2) + "\n"
    if args.output:
        args.output.write_text(doc)
    else:
        sys.stdout.write(doc)


if __name__ == "__main__":
    main()
