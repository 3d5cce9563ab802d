#include "mefr/decomposition.hpp"

#include <algorithm>
#include <unordered_set>

#include "mefr/error.hpp"
#include "mefr/io.hpp"

namespace mefr {

void validate_decomposition(const Decomposition &d, const FunctionCallGraph &g) {
  std::vector<std::uint32_t> cover(g.size(), 0);
  std::unordered_set<std::string> ids;
  for (const auto &c : d.communities) {
    if (!ids.insert(c.id).second)
      fail(ErrorKind::Schema, "decomposition: duplicate community id \"" + c.id + "\"");
    if (c.members.empty())
      fail(ErrorKind::Schema, "decomposition: community \"" + c.id + "\" is empty");
    for (std::size_t i = 0; i < c.members.size(); ++i) {
      NodeIndex v = c.members[i];
      if (v >= g.size())
        fail(ErrorKind::UnknownFunction, "decomposition: community \"" + c.id +
                                             "\" has out-of-range member " + std::to_string(v));
      if (i > 0 && c.members[i - 1] >= v)
        fail(ErrorKind::Schema, "decomposition: community \"" + c.id +
                                    "\" members are not strictly ascending");
      ++cover[v];
    }
  }
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (cover[v] == 0)
      fail(ErrorKind::Coverage, "decomposition: \"" + g.function(static_cast<NodeIndex>(v)).name +
                                    "\" belongs to no community");
    if (!d.overlapping && cover[v] > 1)
      fail(ErrorKind::Coverage, "decomposition: \"" + g.function(static_cast<NodeIndex>(v)).name +
                                    "\" belongs to " + std::to_string(cover[v]) +
                                    " communities of a non-overlapping decomposition");
  }
}

Decomposition decomposition_from_mefrs(const MefrPartition &p, const FunctionCallGraph &g) {
  Decomposition d;
  d.graph_id = p.graph_id;
  d.method = "oracle";
  d.overlapping = p.mode == MefrMode::Verbatim;
  for (const auto &r : p.regions) {
    Community c{g.function(r.entry).name, r.members};
    std::sort(c.members.begin(), c.members.end());
    d.communities.push_back(std::move(c));
  }
  if (!p.unassigned.empty()) {
    Community c{std::string(kUnassignedCommunity), p.unassigned};
    std::sort(c.members.begin(), c.members.end());
    d.communities.push_back(std::move(c));
  }
  return d;
}

std::string to_decomp_json(const Decomposition &d, const FunctionCallGraph &g) {
  Json comms = Json::array();
  for (const auto &c : d.communities) {
    Json members = Json::array();
    for (NodeIndex v : c.members)
      members.push_back(g.function(v).name);
    comms.push_back({{"id", c.id}, {"members", std::move(members)}});
  }
  Json j;
  j["schema"] = "decomp/1";
  j["graph_id"] = d.graph_id;
  j["method"] = d.method;
  j["overlapping"] = d.overlapping;
  j["communities"] = std::move(comms);
  return dump_json(j);
}

Decomposition parse_decomp_json(std::string_view text, const FunctionCallGraph &g) {
  Json j = parse_json(text, "decomp");
  if (j.contains("schema"))
    expect_schema(j, "decomp/1", "decomp");
  Decomposition d;
  d.graph_id = require_string(j, "graph_id", "decomp: ");
  if (d.graph_id != g.binary_id())
    fail(ErrorKind::IdMismatch, "decomp: graph_id \"" + d.graph_id +
                                    "\" does not match graph \"" + g.binary_id() + "\"");
  d.method = require_string(j, "method", "decomp: ");
  const Json &ov = require(j, "overlapping", "decomp: ");
  if (!ov.is_boolean())
    fail(ErrorKind::Schema, "decomp: /overlapping: expected a boolean");
  d.overlapping = ov.get<bool>();
  const Json &arr = require_array(j, "communities", "decomp: ");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    std::string locus = "decomp: /communities/" + std::to_string(i);
    Community c;
    c.id = require_string(arr[i], "id", locus);
    const Json &members = require_array(arr[i], "members", locus);
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (!members[k].is_string())
        fail(ErrorKind::Schema, locus + "/members/" + std::to_string(k) + ": expected a name");
      const auto name = members[k].get<std::string>();
      auto n = g.find(name);
      if (!n)
        fail(ErrorKind::UnknownFunction,
             locus + ": community \"" + c.id + "\" references unknown function \"" + name + "\"");
      c.members.push_back(*n);
    }
    std::sort(c.members.begin(), c.members.end());
    c.members.erase(std::unique(c.members.begin(), c.members.end()), c.members.end());
    d.communities.push_back(std::move(c));
  }
  validate_decomposition(d, g);
  return d;
}

Decomposition load_external_decomposition(const std::filesystem::path &path,
                                          const FunctionCallGraph &g) {
  return parse_decomp_json(read_text_file(path), g);
}

} // namespace mefr
