#pragma once

#include "emgauth/eval.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace emgauth {

enum class Aggregate { Median, Mean };

// Error driving the channel selection: the verification EER of one scenario
// or the rank-k identification error.
struct SfsMetric {
    enum class Kind { EER, RankError };

    Kind kind = Kind::EER;
    Scenario scenario = Scenario::Leaked;
    int rank = 1;
    Aggregate aggregate = Aggregate::Median;

    std::string name() const;
};

// "eer", "r1e", "r5e" or generally "r<k>e".
SfsMetric parse_metric(const std::string& text, Scenario scenario = Scenario::Leaked);

// Aggregate of the metric across participants.
double metric_value(const EvalReport& report, const SfsMetric& metric);

struct SfsCandidate {
    int channel = 0;
    double error = 0.0;
};

struct SfsIteration {
    std::vector<SfsCandidate> candidates;  // ascending channel index
    int selected_channel = 0;
    double selected_error = 0.0;
    double range = 0.0;
    std::vector<int> applied;  // applied set after this iteration, selection order
};

struct SfsTrace {
    SfsMetric metric;
    std::vector<SfsIteration> iterations;

    std::vector<int> order() const;
};

// max - min of the candidate errors.
double error_range(std::span<const double> candidate_errors);

// Greedy forward selection. Each iteration evaluates the applied set plus every
// remaining channel and keeps the one with the smallest error (lowest channel
// index on ties) until no channel remains.
SfsTrace sfs(const FeatureTable& table, const EvalConfig& base, const SfsMetric& metric);
SfsTrace sfs(const Dataset& dataset, const EvalConfig& base, const SfsMetric& metric);

// iteration,candidate_channel,error,selected,range
void write_sfs_csv(const SfsTrace& trace, const std::filesystem::path& file);

} // namespace emgauth
