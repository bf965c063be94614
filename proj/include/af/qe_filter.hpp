#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "af/error.hpp"

namespace af::qe {

// A corpus line paired with its external quality score.
struct ScoredPair {
    size_t line = 0; // 0-based corpus line index
    double score = 0.0;
};

// Nearest-rank percentile: the value at 1-based rank ceil(p/100 * n) of the
// ascending sort; p = 0 picks the minimum.
double percentile_threshold(const std::vector<double>& scores, double p);

// Retains pairs whose score is >= the percentile threshold, in input order.
std::vector<ScoredPair> filter_corpus(const std::vector<ScoredPair>& pairs, double p);

// Score sidecar: one decimal real per line, line-aligned with the corpus.
std::vector<double> read_scores(const std::string& path);

} // namespace af::qe
