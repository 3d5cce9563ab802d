#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mefr/graph.hpp"

namespace mefr {

using Json = nlohmann::ordered_json;

std::string read_text_file(const std::filesystem::path &path);
std::vector<unsigned char> read_binary_file(const std::filesystem::path &path);
// Creates parent directories as needed.
void write_text_file(const std::filesystem::path &path, std::string_view text);

// Parses JSON, converting parse failures into Schema errors that carry the
// byte position reported by the parser.
Json parse_json(std::string_view text, std::string_view what);
// Two-space indented, trailing newline.
std::string dump_json(const Json &j);

// Checks the top-level "schema" tag.
void expect_schema(const Json &j, std::string_view tag, std::string_view what);

// Field accessors that fail with a JSON-pointer locus.
const Json &require(const Json &obj, std::string_view key, const std::string &locus);
std::string require_string(const Json &obj, std::string_view key,
                           const std::string &locus, bool allow_empty = false);
std::uint64_t require_hex(const Json &obj, std::string_view key,
                          const std::string &locus);
std::int64_t require_int(const Json &obj, std::string_view key,
                         const std::string &locus);
const Json &require_array(const Json &obj, std::string_view key,
                          const std::string &locus);

// {compiler, optimization, architecture} objects shared by every schema.
Json setting_to_json(const CompilationSetting &s);
CompilationSetting setting_from_json(const Json &j, const std::string &locus);

} // namespace mefr
