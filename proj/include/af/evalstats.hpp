#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "af/error.hpp"

namespace af::evalstats {

enum class StdMode {
    Sample,     // n-1 denominator (default)
    Population, // n denominator
};

// Which standard deviation the significance threshold uses.
enum class ThresholdRule {
    BaselineStd,
    MethodStd,
    MaxStd,   // max of the two (default, conservative)
    PooledStd, // sqrt((sb^2 + sm^2) / 2)
};

StdMode std_mode_from_string(const std::string& s);
ThresholdRule threshold_rule_from_string(const std::string& s);
std::string to_string(StdMode m);
std::string to_string(ThresholdRule r);

struct RunStats {
    double mean = 0.0;
    double std = 0.0;
    size_t n = 0;
};

RunStats aggregate(const std::vector<double>& scores, StdMode mode = StdMode::Sample);

enum class Direction {
    Up,
    Same,
    Down,
};

std::string to_string(Direction d);

struct SignificanceVerdict {
    Direction direction = Direction::Same;
    double delta = 0.0;     // method.mean - baseline.mean
    double threshold = 0.0; // the std the delta was compared against
};

// Classifies a method against a baseline: up when the mean difference
// exceeds the threshold std, down when it falls below its negation.
SignificanceVerdict significance(const RunStats& baseline, const RunStats& method,
                                 ThresholdRule rule = ThresholdRule::MaxStd);

struct VerdictCounts {
    size_t up = 0;
    size_t down = 0;
    size_t same = 0;
};

VerdictCounts count_verdicts(const std::vector<SignificanceVerdict>& verdicts);

} // namespace af::evalstats
