#!/usr/bin/env python3
"""Regenerate the golden line and function tables for the ELF fixtures.

Uses pyelftools, so the goldens do not depend on the C++ decoder they check.

    python3 tools/gen_golden.py tests/fixtures/hello_g.elf tests/fixtures/calc_o2.elf
"""

import os
import re
import sys

from elftools.elf.elffile import ELFFile

SUFFIX = re.compile(r"\.(isra|part|constprop|cold|clone)\.\d+$")


def as_str(v):
    return v.decode() if isinstance(v, bytes) else v


def join(d, name):
    if not name or name.startswith("/") or not d:
        return name
    return d + name if d.endswith("/") else d + "/" + name


def line_rows(elf):
    dwarf = elf.get_dwarf_info(relocate_dwarf_sections=False)
    rows = set()
    for cu in dwarf.iter_CUs():
        prog = dwarf.line_program_for_CU(cu)
        if prog is None:
            continue
        version = prog.header["version"]
        dirs = [as_str(d) for d in prog.header["include_directory"]]
        files = prog.header["file_entry"]
        if version < 5:
            dirs = [""] + dirs

        def path(index):
            if version < 5:
                f = files[index - 1]
            else:
                f = files[index]
            d = dirs[f.dir_index] if f.dir_index < len(dirs) else ""
            return join(d, as_str(f.name))

        for entry in prog.get_entries():
            st = entry.state
            if st is None or st.end_sequence or st.line == 0:
                continue
            rows.add((st.address, path(st.file), st.line))
    return sorted(rows)


def normalize(name):
    while True:
        m = SUFFIX.search(name)
        if not m:
            return name
        name = name[: m.start()]


def function_rows(elf):
    symtab = elf.get_section_by_name(".symtab")
    loads = [s for s in elf.iter_segments() if s["p_type"] == "PT_LOAD"]
    loaded = elf["e_type"] in ("ET_EXEC", "ET_DYN")
    cands = []
    for sym in symtab.iter_symbols():
        if sym["st_info"]["type"] != "STT_FUNC" or sym["st_size"] == 0:
            continue
        if sym["st_shndx"] == "SHN_UNDEF" or not sym.name:
            continue
        start = sym["st_value"]
        end = start + sym["st_size"]
        if loaded and not any(
            start >= s["p_vaddr"] and end <= s["p_vaddr"] + s["p_memsz"] for s in loads
        ):
            continue
        cands.append((sym.name, normalize(sym.name), start, end))
    # Exact names claim their normalized name before clones do (stable).
    cands.sort(key=lambda c: c[0] != c[1])
    kept, names, taken = [], set(), []
    for raw, name, start, end in cands:
        if any(start < e and s < end for s, e in taken):
            continue
        taken.append((start, end))
        if name in names:
            continue
        names.add(name)
        kept.append((start, end, name))
    return sorted(kept)


def main(paths):
    for p in paths:
        with open(p, "rb") as fh:
            elf = ELFFile(fh)
            stem = os.path.splitext(p)[0]
            with open(stem + ".lines.tsv", "w") as out:
                out.write("# lines/1\n")
                for addr, f, line in line_rows(elf):
                    out.write(f"{addr:#x}\t{f}\t{line}\n")
            with open(stem + ".funcs.tsv", "w") as out:
                out.write("# funcs/1\n")
                for start, end, name in function_rows(elf):
                    out.write(f"{start:#x}\t{end:#x}\t{name}\n")


if __name__ == "__main__":
    main(sys.argv[1:])
