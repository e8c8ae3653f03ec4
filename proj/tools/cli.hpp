#pragma once

#include "emgauth/eval.hpp"
#include "emgauth/selection.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace emgauth::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitComputation = 2;

// Everything an eval or sfs run depends on. Written to <out>/config.json so a
// run can be repeated with --config.
struct RunConfig {
    std::filesystem::path dataset_root;
    std::filesystem::path output_dir;
    FeatureSpec features;
    WindowSpec window;
    std::vector<int> channels;  // empty = all
    double lambda = kDefaultLambda;
    std::vector<Scenario> scenarios{kAllScenarios.begin(), kAllScenarios.end()};
    std::vector<int> ranks{1, 5};
    NormalPool normal_pool = NormalPool::ExcludeAuthGesture;
    ScoreView score_view = ScoreView::Window;
    std::string metric = "eer";
    Aggregate aggregate = Aggregate::Median;

    nlohmann::ordered_json to_json() const;
    // Keys absent from doc keep their current values.
    void merge_json(const nlohmann::json& doc);
    EvalConfig eval_config() const;
};

std::vector<int> parse_int_list(const std::string& text);
std::vector<Band> parse_bands(const std::string& text);

// Runs one command line (args exclude the program name). Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace emgauth::cli
