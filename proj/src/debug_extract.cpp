#include "mefr/debug_extract.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <tuple>
#include <variant>

namespace mefr {

namespace {

// DW_FORM_* values that can appear in DWARF 5 line table entry formats.
enum : std::uint64_t {
  kFormBlock2 = 0x03, kFormBlock4 = 0x04, kFormData2 = 0x05, kFormData4 = 0x06,
  kFormData8 = 0x07, kFormString = 0x08, kFormBlock = 0x09, kFormBlock1 = 0x0a,
  kFormData1 = 0x0b, kFormSdata = 0x0d, kFormStrp = 0x0e, kFormUdata = 0x0f,
  kFormData16 = 0x1e, kFormLineStrp = 0x1f,
};
enum : std::uint64_t { kLnctPath = 1, kLnctDirectoryIndex = 2 };

enum : std::uint8_t {
  kLnsCopy = 1, kLnsAdvancePc, kLnsAdvanceLine, kLnsSetFile, kLnsSetColumn,
  kLnsNegateStmt, kLnsSetBasicBlock, kLnsConstAddPc, kLnsFixedAdvancePc,
  kLnsSetPrologueEnd, kLnsSetEpilogueBegin, kLnsSetIsa,
};
enum : std::uint8_t { kLneEndSequence = 1, kLneSetAddress, kLneDefineFile, kLneSetDiscriminator };

using FormValue = std::variant<std::uint64_t, std::string>;

std::string string_at(const ElfFile &elf, const char *section, std::uint64_t offset) {
  const ElfFile::Section *s = elf.section(section);
  if (!s)
    fail(ErrorKind::MalformedDwarf,
         elf.name() + ": string form refers to missing section " + section);
  ByteReader r = elf.reader(elf.contents(*s), ErrorKind::MalformedDwarf,
                            elf.name() + ": " + section);
  r.seek(offset);
  return std::string(r.cstr());
}

FormValue read_form(const ElfFile &elf, ByteReader &r, std::uint64_t form,
                    std::size_t offset_size) {
  switch (form) {
  case kFormString: return std::string(r.cstr());
  case kFormLineStrp: return string_at(elf, ".debug_line_str", r.uint(offset_size));
  case kFormStrp: return string_at(elf, ".debug_str", r.uint(offset_size));
  case kFormData1: return std::uint64_t{r.u8()};
  case kFormData2: return std::uint64_t{r.u16()};
  case kFormData4: return std::uint64_t{r.u32()};
  case kFormData8: return r.u64();
  case kFormUdata: return r.uleb();
  case kFormSdata: return static_cast<std::uint64_t>(r.sleb());
  case kFormData16: r.skip(16); return std::uint64_t{0};
  case kFormBlock: r.skip(r.uleb()); return std::uint64_t{0};
  case kFormBlock1: r.skip(r.u8()); return std::uint64_t{0};
  case kFormBlock2: r.skip(r.u16()); return std::uint64_t{0};
  case kFormBlock4: r.skip(r.u32()); return std::uint64_t{0};
  default: {
    std::ostringstream os;
    os << "unsupported form 0x" << std::hex << form << " in line table header";
    r.error(os.str());
  }
  }
}

std::string join_path(const std::string &dir, const std::string &name) {
  if (name.empty() || name.front() == '/' || dir.empty())
    return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

struct FileEntry {
  std::string name;
  std::uint64_t dir = 0;
};

struct EntryFormat {
  std::uint64_t content, form;
};

// Reads a DWARF 5 directory or file-name table.
std::vector<FileEntry> read_v5_entries(const ElfFile &elf, ByteReader &r,
                                       std::size_t offset_size) {
  std::uint8_t format_count = r.u8();
  std::vector<EntryFormat> formats(format_count);
  for (auto &f : formats) {
    f.content = r.uleb();
    f.form = r.uleb();
  }
  std::uint64_t count = r.uleb();
  std::vector<FileEntry> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    FileEntry e;
    for (const auto &f : formats) {
      FormValue v = read_form(elf, r, f.form, offset_size);
      if (f.content == kLnctPath && std::holds_alternative<std::string>(v))
        e.name = std::get<std::string>(v);
      else if (f.content == kLnctDirectoryIndex && std::holds_alternative<std::uint64_t>(v))
        e.dir = std::get<std::uint64_t>(v);
    }
    out.push_back(std::move(e));
  }
  return out;
}

void decode_unit(const ElfFile &elf, ByteReader &r, std::vector<LineRecord> &out) {
  std::size_t unit_start = r.pos();
  std::uint64_t unit_length = r.u32();
  std::size_t offset_size = 4;
  if (unit_length == 0xffffffff) {
    unit_length = r.u64();
    offset_size = 8;
  } else if (unit_length >= 0xfffffff0) {
    r.error("reserved unit length");
  }
  std::size_t unit_end = r.pos() + unit_length;
  if (unit_length > r.size() - r.pos())
    r.error("unit length exceeds section");

  std::uint16_t version = r.u16();
  if (version < 2 || version > 5)
    r.error("unsupported line table version " + std::to_string(version));
  std::size_t address_size = elf.is_64() ? 8 : 4;
  if (version >= 5) {
    address_size = r.u8();
    r.u8(); // segment selector size
  }
  std::uint64_t header_length = r.uint(offset_size);
  std::size_t program_start = r.pos() + header_length;
  if (program_start > unit_end)
    r.error("header length exceeds unit");

  std::uint8_t min_inst_length = r.u8();
  std::uint8_t max_ops = version >= 4 ? r.u8() : 1;
  if (max_ops == 0)
    max_ops = 1;
  bool default_is_stmt = r.u8() != 0;
  (void)default_is_stmt;
  std::int8_t line_base = r.s8();
  std::uint8_t line_range = r.u8();
  if (line_range == 0)
    r.error("line_range is zero");
  std::uint8_t opcode_base = r.u8();
  if (opcode_base == 0)
    r.error("opcode_base is zero");
  std::vector<std::uint8_t> std_lengths(opcode_base, 0);
  for (std::uint8_t i = 1; i < opcode_base; ++i)
    std_lengths[i] = r.u8();

  std::vector<std::string> dirs;
  std::vector<FileEntry> files;
  if (version >= 5) {
    for (auto &d : read_v5_entries(elf, r, offset_size))
      dirs.push_back(std::move(d.name));
    files = read_v5_entries(elf, r, offset_size);
  } else {
    // Index 0 is the compilation directory, which lives in .debug_info;
    // paths relative to it are kept relative.
    dirs.emplace_back();
    for (;;) {
      std::string_view d = r.cstr();
      if (d.empty())
        break;
      dirs.emplace_back(d);
    }
    files.emplace_back(); // file numbering is 1-based before DWARF 5
    for (;;) {
      std::string_view name = r.cstr();
      if (name.empty())
        break;
      FileEntry e{std::string(name), r.uleb()};
      r.uleb(); // mtime
      r.uleb(); // length
      files.push_back(std::move(e));
    }
  }
  r.seek(program_start);

  auto file_path = [&](std::uint64_t index) -> std::string {
    if (index >= files.size() || (version < 5 && index == 0))
      r.error("file index " + std::to_string(index) + " out of range");
    const FileEntry &f = files[index];
    std::string dir = f.dir < dirs.size() ? dirs[f.dir] : std::string();
    return join_path(dir, f.name);
  };

  std::uint64_t address = 0, op_index = 0, file = 1;
  std::int64_t line = 1;
  auto reset = [&] {
    address = 0;
    op_index = 0;
    file = 1;
    line = 1;
  };
  auto emit = [&] {
    if (line > 0)
      out.push_back({address, file_path(file), static_cast<std::uint32_t>(line)});
  };
  auto advance = [&](std::uint64_t operation_advance) {
    address += min_inst_length * ((op_index + operation_advance) / max_ops);
    op_index = (op_index + operation_advance) % max_ops;
  };

  while (r.pos() < unit_end) {
    std::uint8_t opcode = r.u8();
    if (opcode >= opcode_base) {
      std::uint8_t adjusted = opcode - opcode_base;
      advance(adjusted / line_range);
      line += line_base + adjusted % line_range;
      emit();
      continue;
    }
    switch (opcode) {
    case 0: {
      std::uint64_t len = r.uleb();
      if (len == 0)
        break;
      std::size_t ext_end = r.pos() + len;
      if (ext_end > unit_end)
        r.error("extended opcode overruns unit");
      std::uint8_t sub = r.u8();
      switch (sub) {
      case kLneEndSequence:
        reset();
        break;
      case kLneSetAddress:
        address = r.uint(len - 1 == 4 || len - 1 == 8 ? len - 1 : address_size);
        op_index = 0;
        break;
      case kLneDefineFile: {
        FileEntry e{std::string(r.cstr()), r.uleb()};
        r.uleb();
        r.uleb();
        files.push_back(std::move(e));
        break;
      }
      case kLneSetDiscriminator:
        r.uleb();
        break;
      default:
        break;
      }
      r.seek(ext_end);
      break;
    }
    case kLnsCopy:
      emit();
      break;
    case kLnsAdvancePc:
      advance(r.uleb());
      break;
    case kLnsAdvanceLine:
      line += r.sleb();
      break;
    case kLnsSetFile:
      file = r.uleb();
      break;
    case kLnsSetColumn:
      r.uleb();
      break;
    case kLnsNegateStmt:
    case kLnsSetBasicBlock:
    case kLnsSetPrologueEnd:
    case kLnsSetEpilogueBegin:
      break;
    case kLnsConstAddPc:
      advance((255 - opcode_base) / line_range);
      break;
    case kLnsFixedAdvancePc:
      address += r.u16();
      op_index = 0;
      break;
    case kLnsSetIsa:
      r.uleb();
      break;
    default:
      for (std::uint8_t i = 0; i < std_lengths[opcode]; ++i)
        r.uleb();
      break;
    }
  }
  if (r.pos() != unit_end)
    r.error("line program overruns unit starting at 0x" +
            [&] { std::ostringstream os; os << std::hex << unit_start; return os.str(); }());
}

} // namespace

std::vector<LineRecord> decode_line_table(const ElfFile &elf) {
  const ElfFile::Section *s = elf.section(".debug_line");
  if (!s)
    fail(ErrorKind::MissingDebugInfo, elf.name() + ": no .debug_line section");
  if (s->flags & ElfFile::kShfCompressed)
    fail(ErrorKind::MalformedDwarf, elf.name() + ": compressed .debug_line is not supported");
  ByteReader r = elf.reader(elf.contents(*s), ErrorKind::MalformedDwarf,
                            elf.name() + ": .debug_line");
  std::vector<LineRecord> out;
  while (!r.at_end())
    decode_unit(elf, r, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<LineRecord> extract_line_table(const std::filesystem::path &binary) {
  return decode_line_table(ElfFile::load(binary));
}

std::optional<std::size_t> FunctionTable::owner(std::uint64_t addr) const {
  auto it = std::upper_bound(functions.begin(), functions.end(), addr,
                             [](std::uint64_t a, const BinaryFunctionId &f) { return a < f.start_addr; });
  if (it != functions.begin() && std::prev(it)->contains(addr))
    return static_cast<std::size_t>(std::prev(it) - functions.begin());
  auto pt = std::upper_bound(pieces.begin(), pieces.end(), addr,
                             [](std::uint64_t a, const AddressPiece &p) { return a < p.start; });
  if (pt != pieces.begin() && addr < std::prev(pt)->end)
    return std::prev(pt)->function;
  return std::nullopt;
}

std::optional<std::size_t> FunctionTable::entry_at(std::uint64_t addr) const {
  auto o = owner(addr);
  if (!o)
    return std::nullopt;
  if (functions[*o].start_addr == addr)
    return o;
  for (const auto &p : pieces)
    if (p.start == addr && p.function == *o)
      return o;
  return std::nullopt;
}

FunctionTable read_function_table(const ElfFile &elf, Diagnostics *diag,
                                  const NameSet *source_names) {
  auto warn = [&](std::string msg) {
    if (diag)
      diag->warn(std::move(msg));
  };
  struct Candidate {
    std::string raw, name;
    std::uint64_t start, end;
    std::size_t order;
  };
  bool loaded = elf.type() == ElfFile::kExec || elf.type() == ElfFile::kDyn;
  std::vector<Candidate> candidates;
  auto symbols = elf.symbols();
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const auto &sym = symbols[i];
    if (sym.type != ElfFile::kSttFunc || sym.size == 0 || sym.shndx == 0 || sym.name.empty())
      continue;
    std::uint64_t start = sym.value;
    if (elf.machine() == ElfFile::kEmArm)
      start &= ~std::uint64_t{1}; // Thumb bit
    std::uint64_t end = start + sym.size;
    if (loaded) {
      bool inside = std::any_of(elf.segments().begin(), elf.segments().end(), [&](const auto &seg) {
        return seg.type == ElfFile::kPtLoad && start >= seg.vaddr && end <= seg.vaddr + seg.memsz;
      });
      if (!inside) {
        warn("symbol " + sym.name + " lies outside every PT_LOAD segment; skipped");
        continue;
      }
    }
    candidates.push_back({sym.name, normalize_name(sym.name, source_names), start, end, i});
  }
  // Exact names claim their normalized name before clones of it do.
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto &a, const auto &b) {
    return (a.raw == a.name) > (b.raw == b.name);
  });

  std::vector<BinaryFunctionId> kept;
  std::vector<std::string> kept_raw;
  std::vector<AddressPiece> pieces;
  std::map<std::uint64_t, std::pair<std::uint64_t, std::size_t>> occupied; // start -> (end, owner)
  std::map<std::string, std::size_t> by_name;
  auto overlapping = [&](std::uint64_t start, std::uint64_t end) -> const std::size_t * {
    auto it = occupied.upper_bound(start);
    if (it != occupied.begin()) {
      auto prev = std::prev(it);
      if (prev->second.first > start)
        return &prev->second.second;
    }
    if (it != occupied.end() && it->first < end)
      return &it->second.second;
    return nullptr;
  };
  for (const auto &c : candidates) {
    if (const std::size_t *other = overlapping(c.start, c.end)) {
      const auto &o = kept[*other];
      if (o.start_addr == c.start && o.end_addr == c.end)
        warn("symbol " + c.raw + " aliases " + kept_raw[*other] + " [" + format_hex(c.start) +
             ", " + format_hex(c.end) + "); kept " + kept_raw[*other]);
      else
        warn("symbol " + c.raw + " overlaps " + kept_raw[*other] + "; skipped");
      continue;
    }
    if (auto it = by_name.find(c.name); it != by_name.end()) {
      warn("symbol " + c.raw + " normalizes to " + c.name + "; its range is attributed to " +
           kept_raw[it->second]);
      pieces.push_back({c.start, c.end, it->second});
      occupied[c.start] = {c.end, it->second};
      continue;
    }
    by_name[c.name] = kept.size();
    occupied[c.start] = {c.end, kept.size()};
    kept.push_back({c.name, c.start, c.end});
    kept_raw.push_back(c.raw);
  }

  std::vector<std::size_t> order(kept.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return kept[a].start_addr < kept[b].start_addr; });
  std::vector<std::size_t> new_index(kept.size());
  FunctionTable table;
  for (std::size_t i = 0; i < order.size(); ++i) {
    new_index[order[i]] = i;
    table.functions.push_back(kept[order[i]]);
  }
  for (auto &p : pieces)
    p.function = new_index[p.function];
  std::sort(pieces.begin(), pieces.end(),
            [](const auto &a, const auto &b) { return a.start < b.start; });
  table.pieces = std::move(pieces);
  return table;
}

std::vector<BinaryFunctionId> extract_function_ranges(const std::filesystem::path &binary,
                                                      Diagnostics *diag,
                                                      const NameSet *source_names) {
  return read_function_table(ElfFile::load(binary), diag, source_names).functions;
}

std::vector<CallRecord> extract_call_edges(const ElfFile &elf, const FunctionTable &table,
                                           Diagnostics *diag) {
  auto warn = [&](std::string msg) {
    if (diag)
      diag->warn(std::move(msg));
  };
  const auto sections = elf.sections();
  std::vector<const ElfFile::Section *> reloc_sections;
  for (const auto &s : sections)
    if ((s.type == ElfFile::kShtRela || s.type == ElfFile::kShtRel) && s.info < sections.size() &&
        (sections[s.info].flags & ElfFile::kShfExecinstr))
      reloc_sections.push_back(&s);
  if (reloc_sections.empty()) {
    warn(elf.name() + ": no relocations against code sections; call edges unavailable "
                      "(link with --emit-relocs or supply an fcg file)");
    return {};
  }
  bool x86 = elf.machine() == ElfFile::kEmX86_64 || elf.machine() == ElfFile::kEmX86;
  if (!x86 && elf.machine() != ElfFile::kEmAarch64) {
    warn(elf.name() + ": call recovery from relocations is not implemented for e_machine " +
         std::to_string(elf.machine()));
    return {};
  }
  auto symbols = elf.symbols();
  bool relocatable = elf.type() == ElfFile::kRel;

  struct Found {
    std::uint64_t site;
    std::size_t caller, callee;
  };
  std::vector<Found> found;
  for (const auto *rs : reloc_sections) {
    const auto &code = sections[rs->info];
    auto bytes = elf.contents(code);
    for (const auto &rel : elf.relocations(*rs)) {
      if (rel.sym >= symbols.size())
        continue;
      std::uint64_t section_offset = relocatable ? rel.offset : rel.offset - code.addr;
      if (section_offset >= bytes.size())
        continue;
      std::uint64_t place = relocatable ? code.addr + rel.offset : rel.offset;
      const auto &sym = symbols[rel.sym];
      std::uint64_t s = sym.value;
      if (sym.type == ElfFile::kSttSection && sym.shndx < sections.size() && s == 0)
        s = sections[sym.shndx].addr;

      std::int64_t addend = rel.addend;
      std::uint64_t target = 0, site = 0;
      if (x86) {
        bool pc_relative = rel.type == 2 || rel.type == 4; // PC32 / PLT32 on both ABIs
        if (!pc_relative || section_offset == 0)
          continue;
        std::uint8_t opcode = bytes[section_offset - 1];
        if (opcode != 0xe8 && opcode != 0xe9)
          continue;
        if (rs->type == ElfFile::kShtRel) {
          if (section_offset + 4 > bytes.size())
            continue;
          ByteReader r = elf.reader(bytes, ErrorKind::NotElf, elf.name());
          r.seek(section_offset);
          addend = static_cast<std::int32_t>(r.u32());
        }
        target = s + static_cast<std::uint64_t>(addend + 4);
        site = place - 1;
      } else {
        if (rel.type != 282 && rel.type != 283) // JUMP26 / CALL26
          continue;
        target = s + static_cast<std::uint64_t>(addend);
        site = place;
      }
      auto caller = table.owner(site);
      auto callee = table.entry_at(target);
      if (caller && callee)
        found.push_back({site, *caller, *callee});
    }
  }
  std::sort(found.begin(), found.end(), [](const Found &a, const Found &b) {
    return std::tie(a.site, a.callee) < std::tie(b.site, b.callee);
  });
  std::vector<CallRecord> out;
  out.reserve(found.size());
  for (const auto &f : found)
    out.push_back({table.functions[f.caller].name, table.functions[f.callee].name, f.site});
  return out;
}

std::string format_line_table(std::span<const LineRecord> lines) {
  std::string out = "# lines/1\n";
  for (const auto &l : lines)
    out += format_hex(l.address) + "\t" + l.file + "\t" + std::to_string(l.line) + "\n";
  return out;
}

std::string format_function_ranges(std::span<const BinaryFunctionId> functions) {
  std::string out = "# funcs/1\n";
  for (const auto &f : functions)
    out += format_hex(f.start_addr) + "\t" + format_hex(f.end_addr) + "\t" + f.name + "\n";
  return out;
}

std::vector<LineRecord> parse_line_table(std::string_view text) {
  std::vector<LineRecord> out;
  std::size_t lineno = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view row = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++lineno;
    if (row.empty() || row.front() == '#')
      continue;
    auto t1 = row.find('\t');
    auto t2 = t1 == std::string_view::npos ? t1 : row.find('\t', t1 + 1);
    if (t2 == std::string_view::npos)
      fail(ErrorKind::Schema, "lines: row " + std::to_string(lineno) + ": expected 3 fields");
    auto addr = parse_hex(row.substr(0, t1));
    std::uint32_t line = 0;
    auto ls = row.substr(t2 + 1);
    auto [p, ec] = std::from_chars(ls.data(), ls.data() + ls.size(), line);
    if (!addr || ec != std::errc() || line == 0)
      fail(ErrorKind::Schema, "lines: row " + std::to_string(lineno) + ": bad address or line");
    out.push_back({*addr, std::string(row.substr(t1 + 1, t2 - t1 - 1)), line});
  }
  return out;
}

} // namespace mefr
