#pragma once

// Read-only ELF32/ELF64 container access: sections, segments, symbols and
// relocations. Everything is bounds checked against the file image.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mefr/error.hpp"

namespace mefr {

// Endian-aware cursor over a byte span. Reads past the end fail with the
// configured error kind and the offending offset.
class ByteReader {
public:
  ByteReader(std::span<const unsigned char> data, bool little_endian,
             ErrorKind on_error, std::string context)
      : data_(data), le_(little_endian), kind_(on_error), context_(std::move(context)) {}

  std::size_t pos() const { return pos_; }
  std::size_t size() const { return data_.size(); }
  bool at_end() const { return pos_ >= data_.size(); }
  void seek(std::size_t pos);
  void skip(std::size_t n);

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int8_t s8() { return static_cast<std::int8_t>(u8()); }
  std::uint64_t uleb();
  std::int64_t sleb();
  std::uint64_t uint(std::size_t width); // 1, 2, 4 or 8 bytes
  std::string_view cstr();

  [[noreturn]] void error(const std::string &what) const;

private:
  void need(std::size_t n) const;

  std::span<const unsigned char> data_;
  std::size_t pos_ = 0;
  bool le_;
  ErrorKind kind_;
  std::string context_;
};

class ElfFile {
public:
  static constexpr std::uint16_t kRel = 1, kExec = 2, kDyn = 3;
  static constexpr std::uint32_t kShtSymtab = 2, kShtRela = 4, kShtNobits = 8, kShtRel = 9;
  static constexpr std::uint64_t kShfExecinstr = 0x4, kShfCompressed = 0x800;
  static constexpr std::uint32_t kPtLoad = 1;
  static constexpr std::uint8_t kSttFunc = 2, kSttSection = 3;
  static constexpr std::uint16_t kEmX86 = 3, kEmArm = 40, kEmX86_64 = 62, kEmAarch64 = 183;

  struct Section {
    std::string name;
    std::uint32_t type = 0;
    std::uint64_t flags = 0, addr = 0, offset = 0, size = 0;
    std::uint32_t link = 0, info = 0;
    std::uint64_t entsize = 0;
  };
  struct Segment {
    std::uint32_t type = 0, flags = 0;
    std::uint64_t offset = 0, vaddr = 0, filesz = 0, memsz = 0;
  };
  struct Symbol {
    std::string name;
    std::uint64_t value = 0, size = 0;
    std::uint8_t type = 0, bind = 0;
    std::uint16_t shndx = 0;
  };
  struct Relocation {
    std::uint64_t offset = 0;
    std::uint32_t type = 0, sym = 0;
    std::int64_t addend = 0;
  };

  static ElfFile load(const std::filesystem::path &path);
  static ElfFile from_bytes(std::vector<unsigned char> bytes, std::string name);

  const std::string &name() const { return name_; }
  bool is_64() const { return is64_; }
  bool little_endian() const { return le_; }
  std::uint16_t type() const { return type_; }
  std::uint16_t machine() const { return machine_; }

  std::span<const Section> sections() const { return sections_; }
  std::span<const Segment> segments() const { return segments_; }
  const Section *section(std::string_view name) const;
  std::span<const unsigned char> contents(const Section &s) const;

  bool has_symtab() const;
  // .symtab entries in table order (index 0 included). Throws MissingSymtab.
  std::vector<Symbol> symbols() const;
  std::vector<Relocation> relocations(const Section &reloc_section) const;

  ByteReader reader(std::span<const unsigned char> data, ErrorKind kind,
                    std::string context) const {
    return ByteReader(data, le_, kind, std::move(context));
  }

private:
  std::string name_;
  std::vector<unsigned char> bytes_;
  bool is64_ = true, le_ = true;
  std::uint16_t type_ = 0, machine_ = 0;
  std::vector<Section> sections_;
  std::vector<Segment> segments_;
};

} // namespace mefr
