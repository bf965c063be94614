#include "af/evalstats.hpp"

#include <algorithm>
#include <cmath>

namespace af::evalstats {

StdMode std_mode_from_string(const std::string& s) {
    if (s == "sample") {
        return StdMode::Sample;
    }
    if (s == "population") {
        return StdMode::Population;
    }
    throw ConfigError("unknown std mode '" + s + "' (expected sample|population)");
}

ThresholdRule threshold_rule_from_string(const std::string& s) {
    if (s == "baseline_std") {
        return ThresholdRule::BaselineStd;
    }
    if (s == "method_std") {
        return ThresholdRule::MethodStd;
    }
    if (s == "max") {
        return ThresholdRule::MaxStd;
    }
    if (s == "pooled") {
        return ThresholdRule::PooledStd;
    }
    throw ConfigError("unknown threshold rule '" + s +
                      "' (expected baseline_std|method_std|max|pooled)");
}

std::string to_string(StdMode m) {
    return m == StdMode::Sample ? "sample" : "population";
}

std::string to_string(ThresholdRule r) {
    switch (r) {
        case ThresholdRule::BaselineStd:
            return "baseline_std";
        case ThresholdRule::MethodStd:
            return "method_std";
        case ThresholdRule::MaxStd:
            return "max";
        case ThresholdRule::PooledStd:
            return "pooled";
    }
    return "max";
}

std::string to_string(Direction d) {
    switch (d) {
        case Direction::Up:
            return "up";
        case Direction::Same:
            return "same";
        case Direction::Down:
            return "down";
    }
    return "same";
}

RunStats aggregate(const std::vector<double>& scores, StdMode mode) {
    if (scores.empty()) {
        throw DataError("aggregate: no scores");
    }
    RunStats stats;
    stats.n = scores.size();
    double sum = 0.0;
    for (const double s : scores) {
        sum += s;
    }
    stats.mean = sum / static_cast<double>(stats.n);
    if (stats.n == 1) {
        stats.std = 0.0;
        return stats;
    }
    double ss = 0.0;
    for (const double s : scores) {
        const double c = s - stats.mean;
        ss += c * c;
    }
    const double denom =
        mode == StdMode::Sample ? static_cast<double>(stats.n - 1) : static_cast<double>(stats.n);
    stats.std = std::sqrt(ss / denom);
    return stats;
}

SignificanceVerdict significance(const RunStats& baseline, const RunStats& method,
                                 ThresholdRule rule) {
    SignificanceVerdict v;
    v.delta = method.mean - baseline.mean;
    switch (rule) {
        case ThresholdRule::BaselineStd:
            v.threshold = baseline.std;
            break;
        case ThresholdRule::MethodStd:
            v.threshold = method.std;
            break;
        case ThresholdRule::MaxStd:
            v.threshold = std::max(baseline.std, method.std);
            break;
        case ThresholdRule::PooledStd:
            v.threshold = std::sqrt((baseline.std * baseline.std + method.std * method.std) / 2.0);
            break;
    }
    if (v.delta > v.threshold) {
        v.direction = Direction::Up;
    } else if (v.delta < -v.threshold) {
        v.direction = Direction::Down;
    } else {
        v.direction = Direction::Same;
    }
    return v;
}

VerdictCounts count_verdicts(const std::vector<SignificanceVerdict>& verdicts) {
    if (verdicts.empty()) {
        throw DataError("count_verdicts: no verdicts");
    }
    VerdictCounts c;
    for (const SignificanceVerdict& v : verdicts) {
        switch (v.direction) {
            case Direction::Up:
                ++c.up;
                break;
            case Direction::Down:
                ++c.down;
                break;
            case Direction::Same:
                ++c.same;
                break;
        }
    }
    return c;
}

} // namespace af::evalstats
