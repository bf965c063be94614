#include "af/qe_filter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace af::qe {

double percentile_threshold(const std::vector<double>& scores, double p) {
    if (scores.empty()) {
        throw DataError("percentile_threshold: no scores");
    }
    if (p < 0.0 || p > 100.0) {
        throw ConfigError("percentile must lie in [0, 100]");
    }
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    size_t rank = static_cast<size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
    rank = std::clamp<size_t>(rank, 1, n);
    return sorted[rank - 1];
}

std::vector<ScoredPair> filter_corpus(const std::vector<ScoredPair>& pairs, double p) {
    std::vector<double> scores;
    scores.reserve(pairs.size());
    for (const ScoredPair& sp : pairs) {
        scores.push_back(sp.score);
    }
    const double threshold = percentile_threshold(scores, p);
    std::vector<ScoredPair> retained;
    for (const ScoredPair& sp : pairs) {
        if (sp.score >= threshold) {
            retained.push_back(sp);
        }
    }
    return retained;
}

std::vector<double> read_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::vector<double> scores;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        try {
            size_t pos = 0;
            const double v = std::stod(line, &pos);
            while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) {
                ++pos;
            }
            if (pos != line.size() || !std::isfinite(v)) {
                throw std::invalid_argument(line);
            }
            scores.push_back(v);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad score '" + line + "'");
        }
    }
    return scores;
}

} // namespace af::qe
