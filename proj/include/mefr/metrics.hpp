#pragma once

// Oracle-grounded scores: anchor and neighbor stability across two
// compilations of one program, and the per-MEFR similarity and granularity
// of a candidate decomposition.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mefr/decomposition.hpp"
#include "mefr/io.hpp"
#include "mefr/mapping.hpp"
#include "mefr/oracle.hpp"
#include "mefr/ratio.hpp"

namespace mefr {

// Boundary functions of two graphs paired by OSF.
struct AnchorCorrespondence {
  std::vector<std::pair<NodeIndex, NodeIndex>> pairs; // ascending by left
  std::size_t left_total = 0;
  std::size_t right_total = 0;
};

AnchorCorrespondence match_anchors(const FunctionCallGraph &g1, const Binary2SourceMap &b1,
                                   std::span<const NodeIndex> boundary1,
                                   const FunctionCallGraph &g2, const Binary2SourceMap &b2,
                                   std::span<const NodeIndex> boundary2);

// matched / (|V1| + |V2| - matched); 0/0 reads as 1.
Ratio anchor_stability(const AnchorCorrespondence &c);

// Over N(u) and N(v): matched boundary pairs / (|N(u)| + |N(v)| - matched).
// (u, v) must be a pair of c; otherwise Precondition.
Ratio neighbor_stability(NodeIndex u, NodeIndex v, const FunctionCallGraph &g1,
                         const FunctionCallGraph &g2, const AnchorCorrespondence &c);

// One value per anchor pair, in pair order.
std::vector<Ratio> neighbor_stabilities(const FunctionCallGraph &g1, const FunctionCallGraph &g2,
                                        const AnchorCorrespondence &c);

// Union of member sf_sets. Throws UnknownFunction naming a member absent
// from the map.
SourceSet community_sf(const Community &c, const FunctionCallGraph &g, const Binary2SourceMap &b2s);

// |A ∩ B| / |A ∪ B|; two empty sets read as 1.
Ratio community_similarity(const SourceSet &a, const SourceSet &b);

struct NearestCommunity {
  std::size_t index = 0; // into the decomposition's communities
  Ratio similarity;
  std::size_t sf_size = 0;
};

// Best similarity to the MEFR footprint; ties prefer the smaller footprint,
// then the lexicographically smaller id. The catch-all community is skipped.
// Throws EmptyDecomposition when nothing is eligible.
NearestCommunity nearest_community(const SourceSet &mefr_sf, std::span<const Community> communities,
                                   std::span<const SourceSet> community_sfs);

// |SF(best)| / |SF(m)|.
Ratio granularity_error(const SourceSet &mefr_sf, const SourceSet &best_sf);

struct Summary {
  std::size_t count = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, mean = 0, max = 0;
};

// Quartiles by linear interpolation between order statistics.
Summary summarize(std::vector<double> values);

// counts[i] holds values in [edges[i], edges[i+1]); the last bucket is
// closed. Values outside the edges land in below/above.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::size_t below = 0, above = 0;
};

Histogram histogram(std::span<const double> values, std::vector<double> edges);

struct MefrScore {
  std::string entry;
  std::size_t members = 0;
  std::size_t sf_size = 0;
  std::string best_community;
  std::size_t best_sf_size = 0;
  Ratio similarity;
  Ratio granularity;

  bool operator==(const MefrScore &) const = default;
};

struct EvalOptions {
  std::vector<double> similarity_edges{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> granularity_edges{0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0, 8.0, 16.0};
};

struct MetricReport {
  std::string graph_id;
  std::string method;
  std::vector<MefrScore> per_mefr; // oracle region order
  Summary similarity, granularity;
  Histogram similarity_hist, granularity_hist;
};

// Scores every oracle region against its nearest community. Regions run in
// parallel; an inverted index from source key to communities keeps each
// lookup proportional to the overlapping communities.
MetricReport evaluate_decomposition(const MefrPartition &oracle, const Decomposition &decomposition,
                                    const FunctionCallGraph &g, const Binary2SourceMap &b2s,
                                    const EvalOptions &opts = {});

// Fills summaries and histograms from per_mefr.
void finalize_report(MetricReport &r, const EvalOptions &opts);

// "report/1" document and its CSV flattening (one row per MEFR).
std::string to_report_json(const MetricReport &r);
std::string to_report_csv(const MetricReport &r);

Json summary_to_json(const Summary &s);
Json histogram_to_json(const Histogram &h);

} // namespace mefr
