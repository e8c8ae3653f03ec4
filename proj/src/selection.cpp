#include "emgauth/selection.hpp"

#include "emgauth/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

namespace emgauth {

std::string SfsMetric::name() const {
    if (kind == Kind::EER) {
        return "eer(" + to_string(scenario) + ")";
    }
    return "r" + std::to_string(rank) + "e";
}

SfsMetric parse_metric(const std::string& text, Scenario scenario) {
    SfsMetric metric;
    metric.scenario = scenario;
    if (text == "eer") {
        metric.kind = SfsMetric::Kind::EER;
        return metric;
    }
    if (text.size() >= 3 && text.front() == 'r' && text.back() == 'e') {
        const std::string digits = text.substr(1, text.size() - 2);
        if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit) &&
            digits.size() < 6) {
            metric.kind = SfsMetric::Kind::RankError;
            metric.rank = std::stoi(digits);
            if (metric.rank >= 1) {
                return metric;
            }
        }
    }
    throw ValidationError("unknown metric '" + text + "' (expected eer, r1e, r5e or r<k>e)");
}

double metric_value(const EvalReport& report, const SfsMetric& metric) {
    std::vector<double> values;
    if (metric.kind == SfsMetric::Kind::EER) {
        const auto index = static_cast<std::size_t>(metric.scenario);
        for (const auto& p : report.participants) {
            if (p.verification[index]) {
                values.push_back(p.verification[index]->eer);
            }
        }
        if (values.empty()) {
            throw ValidationError("no participant has a " + to_string(metric.scenario) +
                                  " EER to select on");
        }
    } else {
        for (const auto& p : report.participants) {
            if (!p.identification) {
                throw ValidationError("identification results missing for rank metric");
            }
            const int k = std::min<int>(metric.rank, static_cast<int>(p.identification->user_count()));
            values.push_back(rank_k_error(*p.identification, k));
        }
        if (values.empty()) {
            throw ValidationError("no identification results to select on");
        }
    }
    if (metric.aggregate == Aggregate::Mean) {
        return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    }
    return quantile(values, 0.5);
}

std::vector<int> SfsTrace::order() const {
    std::vector<int> channels;
    for (const auto& it : iterations) {
        channels.push_back(it.selected_channel);
    }
    return channels;
}

double error_range(std::span<const double> candidate_errors) {
    if (candidate_errors.empty()) {
        throw ValidationError("error range of an empty candidate list");
    }
    const auto [lo, hi] = std::minmax_element(candidate_errors.begin(), candidate_errors.end());
    return *hi - *lo;
}

SfsTrace sfs(const FeatureTable& table, const EvalConfig& base, const SfsMetric& metric) {
    const int n_channels = table.meta.channel_count;
    if (n_channels < 1) {
        throw ValidationError("channel selection needs at least one channel");
    }
    EvalConfig config = base;
    config.pooled_curves = false;
    if (metric.kind == SfsMetric::Kind::EER) {
        config.scenarios = {metric.scenario};
        config.identification = false;
    } else {
        config.scenarios.clear();
        config.identification = true;
        config.ranks = {metric.rank};
    }

    SfsTrace trace;
    trace.metric = metric;
    std::vector<int> applied;
    std::vector<int> remaining(static_cast<std::size_t>(n_channels));
    std::iota(remaining.begin(), remaining.end(), 0);

    while (!remaining.empty()) {
        SfsIteration iteration;
        for (const int candidate : remaining) {
            std::vector<int> channels = applied;
            channels.push_back(candidate);
            std::sort(channels.begin(), channels.end());
            config.channels = channels;
            const EvalReport report = evaluate(table, config);
            iteration.candidates.push_back({candidate, metric_value(report, metric)});
        }
        // remaining is ascending, so strict < keeps the lowest index on ties.
        const SfsCandidate* best = &iteration.candidates.front();
        std::vector<double> errors;
        for (const auto& c : iteration.candidates) {
            errors.push_back(c.error);
            if (c.error < best->error) {
                best = &c;
            }
        }
        iteration.selected_channel = best->channel;
        iteration.selected_error = best->error;
        iteration.range = error_range(errors);
        applied.push_back(best->channel);
        remaining.erase(std::find(remaining.begin(), remaining.end(), best->channel));
        iteration.applied = applied;
        trace.iterations.push_back(std::move(iteration));
    }
    return trace;
}

SfsTrace sfs(const Dataset& dataset, const EvalConfig& base, const SfsMetric& metric) {
    return sfs(build_feature_table(dataset, base.features, base.window), base, metric);
}

void write_sfs_csv(const SfsTrace& trace, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ValidationError("cannot write " + file.string());
    }
    out << "iteration,candidate_channel,error,selected,range\n";
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        const SfsIteration& it = trace.iterations[i];
        for (const auto& c : it.candidates) {
            out << i + 1 << ',' << c.channel << ',' << detail::format_double(c.error) << ','
                << (c.channel == it.selected_channel ? 1 : 0) << ','
                << detail::format_double(it.range) << '\n';
        }
    }
}

} // namespace emgauth
