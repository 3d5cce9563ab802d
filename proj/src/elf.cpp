#include "mefr/elf.hpp"

#include <sstream>

#include "mefr/io.hpp"

namespace mefr {

void ByteReader::error(const std::string &what) const {
  std::ostringstream os;
  os << context_ << ": " << what << " at offset 0x" << std::hex << pos_;
  fail(kind_, os.str());
}

void ByteReader::need(std::size_t n) const {
  if (n > data_.size() || pos_ > data_.size() - n)
    error("truncated data (need " + std::to_string(n) + " bytes)");
}

void ByteReader::seek(std::size_t pos) {
  if (pos > data_.size())
    error("seek past end");
  pos_ = pos;
}

void ByteReader::skip(std::size_t n) {
  need(n);
  pos_ += n;
}

std::uint8_t ByteReader::u8() {
  need(1);
  return data_[pos_++];
}

std::uint64_t ByteReader::uint(std::size_t width) {
  need(width);
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) {
    std::uint64_t b = data_[pos_ + i];
    v |= le_ ? b << (8 * i) : b << (8 * (width - 1 - i));
  }
  pos_ += width;
  return v;
}

std::uint16_t ByteReader::u16() { return static_cast<std::uint16_t>(uint(2)); }
std::uint32_t ByteReader::u32() { return static_cast<std::uint32_t>(uint(4)); }
std::uint64_t ByteReader::u64() { return uint(8); }

std::uint64_t ByteReader::uleb() {
  std::uint64_t result = 0;
  unsigned shift = 0;
  for (;;) {
    std::uint8_t b = u8();
    if (shift < 64)
      result |= static_cast<std::uint64_t>(b & 0x7f) << shift;
    shift += 7;
    if (!(b & 0x80))
      return result;
  }
}

std::int64_t ByteReader::sleb() {
  std::int64_t result = 0;
  unsigned shift = 0;
  std::uint8_t b;
  do {
    b = u8();
    if (shift < 64)
      result |= static_cast<std::int64_t>(static_cast<std::uint64_t>(b & 0x7f) << shift);
    shift += 7;
  } while (b & 0x80);
  if (shift < 64 && (b & 0x40))
    result |= -(static_cast<std::int64_t>(1) << shift);
  return result;
}

std::string_view ByteReader::cstr() {
  std::size_t start = pos_;
  while (pos_ < data_.size() && data_[pos_] != 0)
    ++pos_;
  if (pos_ >= data_.size()) {
    pos_ = start;
    error("unterminated string");
  }
  std::string_view s(reinterpret_cast<const char *>(data_.data() + start), pos_ - start);
  ++pos_;
  return s;
}

ElfFile ElfFile::load(const std::filesystem::path &path) {
  return from_bytes(read_binary_file(path), path.string());
}

ElfFile ElfFile::from_bytes(std::vector<unsigned char> bytes, std::string name) {
  ElfFile f;
  f.name_ = std::move(name);
  f.bytes_ = std::move(bytes);
  const auto &b = f.bytes_;
  if (b.size() < 16 || b[0] != 0x7f || b[1] != 'E' || b[2] != 'L' || b[3] != 'F')
    fail(ErrorKind::NotElf, f.name_ + ": missing ELF magic");
  if (b[4] != 1 && b[4] != 2)
    fail(ErrorKind::NotElf, f.name_ + ": bad ELF class");
  if (b[5] != 1 && b[5] != 2)
    fail(ErrorKind::NotElf, f.name_ + ": bad ELF data encoding");
  f.is64_ = b[4] == 2;
  f.le_ = b[5] == 1;

  ByteReader r(b, f.le_, ErrorKind::NotElf, f.name_ + ": ELF header");
  r.seek(16);
  f.type_ = r.u16();
  f.machine_ = r.u16();
  r.u32(); // e_version
  std::size_t word = f.is64_ ? 8 : 4;
  r.uint(word); // e_entry
  std::uint64_t phoff = r.uint(word);
  std::uint64_t shoff = r.uint(word);
  r.u32(); // e_flags
  r.u16(); // e_ehsize
  std::uint16_t phentsize = r.u16(), phnum = r.u16();
  std::uint16_t shentsize = r.u16(), shnum = r.u16(), shstrndx = r.u16();

  for (std::uint16_t i = 0; i < phnum; ++i) {
    ByteReader p(b, f.le_, ErrorKind::NotElf, f.name_ + ": program header");
    p.seek(static_cast<std::size_t>(phoff + std::uint64_t(i) * phentsize));
    Segment s;
    s.type = p.u32();
    if (f.is64_) {
      s.flags = p.u32();
      s.offset = p.u64();
      s.vaddr = p.u64();
      p.u64(); // paddr
      s.filesz = p.u64();
      s.memsz = p.u64();
    } else {
      s.offset = p.u32();
      s.vaddr = p.u32();
      p.u32();
      s.filesz = p.u32();
      s.memsz = p.u32();
      s.flags = p.u32();
    }
    f.segments_.push_back(s);
  }

  for (std::uint16_t i = 0; i < shnum; ++i) {
    ByteReader s(b, f.le_, ErrorKind::NotElf, f.name_ + ": section header");
    s.seek(static_cast<std::size_t>(shoff + std::uint64_t(i) * shentsize));
    Section sec;
    std::uint32_t name_off = s.u32();
    sec.type = s.u32();
    sec.flags = s.uint(word);
    sec.addr = s.uint(word);
    sec.offset = s.uint(word);
    sec.size = s.uint(word);
    sec.link = s.u32();
    sec.info = s.u32();
    s.uint(word); // addralign
    sec.entsize = s.uint(word);
    sec.name = std::to_string(name_off); // resolved below
    f.sections_.push_back(sec);
  }
  if (shstrndx < f.sections_.size()) {
    auto strtab = f.contents(f.sections_[shstrndx]);
    for (auto &sec : f.sections_) {
      ByteReader n(strtab, f.le_, ErrorKind::NotElf, f.name_ + ": .shstrtab");
      n.seek(std::stoul(sec.name));
      sec.name = std::string(n.cstr());
    }
  }
  return f;
}

const ElfFile::Section *ElfFile::section(std::string_view name) const {
  for (const auto &s : sections_)
    if (s.name == name)
      return &s;
  return nullptr;
}

std::span<const unsigned char> ElfFile::contents(const Section &s) const {
  if (s.type == kShtNobits)
    return {};
  if (s.offset > bytes_.size() || s.size > bytes_.size() - s.offset)
    fail(ErrorKind::NotElf, name_ + ": section " + s.name + " extends past end of file");
  return std::span<const unsigned char>(bytes_).subspan(s.offset, s.size);
}

bool ElfFile::has_symtab() const {
  for (const auto &s : sections_)
    if (s.type == kShtSymtab)
      return true;
  return false;
}

std::vector<ElfFile::Symbol> ElfFile::symbols() const {
  const Section *symtab = nullptr;
  for (const auto &s : sections_)
    if (s.type == kShtSymtab)
      symtab = &s;
  if (!symtab)
    fail(ErrorKind::MissingSymtab, name_ + ": no .symtab section (stripped binary?)");
  if (symtab->link >= sections_.size())
    fail(ErrorKind::NotElf, name_ + ": .symtab has bad string table link");
  auto strtab = contents(sections_[symtab->link]);
  auto data = contents(*symtab);
  std::size_t entsize = is64_ ? 24 : 16;
  ByteReader r(data, le_, ErrorKind::NotElf, name_ + ": .symtab");
  std::vector<Symbol> out;
  out.reserve(data.size() / entsize);
  for (std::size_t i = 0; i + entsize <= data.size(); i += entsize) {
    r.seek(i);
    Symbol sym;
    std::uint32_t name_off = r.u32();
    std::uint8_t info;
    if (is64_) {
      info = r.u8();
      r.u8(); // st_other
      sym.shndx = r.u16();
      sym.value = r.u64();
      sym.size = r.u64();
    } else {
      sym.value = r.u32();
      sym.size = r.u32();
      info = r.u8();
      r.u8();
      sym.shndx = r.u16();
    }
    sym.type = info & 0xf;
    sym.bind = info >> 4;
    ByteReader n(strtab, le_, ErrorKind::NotElf, name_ + ": .strtab");
    n.seek(name_off);
    sym.name = std::string(n.cstr());
    out.push_back(std::move(sym));
  }
  return out;
}

std::vector<ElfFile::Relocation> ElfFile::relocations(const Section &rs) const {
  bool rela = rs.type == kShtRela;
  if (!rela && rs.type != kShtRel)
    return {};
  auto data = contents(rs);
  std::size_t entsize = (is64_ ? 8 : 4) * (rela ? 3 : 2);
  ByteReader r(data, le_, ErrorKind::NotElf, name_ + ": " + rs.name);
  std::vector<Relocation> out;
  for (std::size_t i = 0; i + entsize <= data.size(); i += entsize) {
    r.seek(i);
    Relocation rel;
    if (is64_) {
      rel.offset = r.u64();
      std::uint64_t info = r.u64();
      rel.sym = static_cast<std::uint32_t>(info >> 32);
      rel.type = static_cast<std::uint32_t>(info & 0xffffffff);
      if (rela)
        rel.addend = static_cast<std::int64_t>(r.u64());
    } else {
      rel.offset = r.u32();
      std::uint32_t info = r.u32();
      rel.sym = info >> 8;
      rel.type = info & 0xff;
      if (rela)
        rel.addend = static_cast<std::int32_t>(r.u32());
    }
    out.push_back(rel);
  }
  return out;
}

} // namespace mefr
