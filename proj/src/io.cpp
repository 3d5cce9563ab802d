#include "mefr/io.hpp"

#include <fstream>
#include <sstream>

#include "mefr/error.hpp"
#include "mefr/graph.hpp"

namespace mefr {

std::string read_text_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<unsigned char> read_binary_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::filesystem::path &path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    fail(ErrorKind::Io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out)
    fail(ErrorKind::Io, "short write to " + path.string());
}

Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error &e) {
    // e.byte is 1-based; convert to line:column for humans.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorKind::Schema, std::string(what) + ": invalid JSON at line " +
                                std::to_string(line) + ", column " +
                                std::to_string(col));
  }
}

std::string dump_json(const Json &j) { return j.dump(2) + "\n"; }

void expect_schema(const Json &j, std::string_view tag, std::string_view what) {
  if (!j.is_object())
    fail(ErrorKind::Schema, std::string(what) + ": /: expected object");
  auto it = j.find("schema");
  if (it == j.end() || !it->is_string() || it->get<std::string>() != tag)
    fail(ErrorKind::Schema, std::string(what) + ": /schema: expected \"" +
                                std::string(tag) + "\"");
}

const Json &require(const Json &obj, std::string_view key, const std::string &locus) {
  if (!obj.is_object())
    fail(ErrorKind::Schema, locus + ": expected object");
  auto it = obj.find(std::string(key));
  if (it == obj.end())
    fail(ErrorKind::Schema, locus + "/" + std::string(key) + ": missing field");
  return *it;
}

std::string require_string(const Json &obj, std::string_view key,
                           const std::string &locus, bool allow_empty) {
  const Json &v = require(obj, key, locus);
  if (!v.is_string())
    fail(ErrorKind::Schema, locus + "/" + std::string(key) + ": expected string");
  auto s = v.get<std::string>();
  if (!allow_empty && s.empty())
    fail(ErrorKind::Schema, locus + "/" + std::string(key) + ": empty string");
  return s;
}

std::uint64_t require_hex(const Json &obj, std::string_view key,
                          const std::string &locus) {
  const Json &v = require(obj, key, locus);
  if (v.is_string()) {
    if (auto parsed = parse_hex(v.get<std::string>()))
      return *parsed;
  }
  fail(ErrorKind::Schema,
       locus + "/" + std::string(key) + ": expected hex string like \"0x401000\"");
}

std::int64_t require_int(const Json &obj, std::string_view key,
                         const std::string &locus) {
  const Json &v = require(obj, key, locus);
  if (!v.is_number_integer())
    fail(ErrorKind::Schema, locus + "/" + std::string(key) + ": expected integer");
  return v.get<std::int64_t>();
}

const Json &require_array(const Json &obj, std::string_view key,
                          const std::string &locus) {
  const Json &v = require(obj, key, locus);
  if (!v.is_array())
    fail(ErrorKind::Schema, locus + "/" + std::string(key) + ": expected array");
  return v;
}

} // namespace mefr
