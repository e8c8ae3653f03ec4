#include "cli.hpp"

#include "emgauth/dataset.hpp"
#include "emgauth/error.hpp"
#include "emgauth/model.hpp"
#include "emgauth/parallel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace emgauth::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string current;
    std::istringstream in(text);
    while (std::getline(in, current, sep)) {
        if (!current.empty()) {
            parts.push_back(current);
        }
    }
    return parts;
}

double parse_double(const std::string& text, const char* what) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used == text.size()) {
            return value;
        }
    } catch (const std::exception&) {
    }
    throw ValidationError(std::string("invalid ") + what + " '" + text + "'");
}

std::string to_string(NormalPool pool) {
    return pool == NormalPool::ExcludeAuthGesture ? "exclusive" : "inclusive";
}

NormalPool parse_normal_pool(const std::string& text) {
    if (text == "exclusive") {
        return NormalPool::ExcludeAuthGesture;
    }
    if (text == "inclusive") {
        return NormalPool::IncludeAuthGesture;
    }
    throw ValidationError("unknown normal pool '" + text + "' (expected exclusive or inclusive)");
}

std::string to_string(ScoreView view) {
    return view == ScoreView::Window ? "window" : "trial-median";
}

ScoreView parse_score_view(const std::string& text) {
    if (text == "window") {
        return ScoreView::Window;
    }
    if (text == "trial-median") {
        return ScoreView::TrialMedian;
    }
    throw ValidationError("unknown score view '" + text + "' (expected window or trial-median)");
}

std::string to_string(Aggregate aggregate) {
    return aggregate == Aggregate::Median ? "median" : "mean";
}

Aggregate parse_aggregate(const std::string& text) {
    if (text == "median") {
        return Aggregate::Median;
    }
    if (text == "mean") {
        return Aggregate::Mean;
    }
    throw ValidationError("unknown aggregate '" + text + "' (expected median or mean)");
}

std::vector<Scenario> parse_scenarios(const std::string& text) {
    std::vector<Scenario> scenarios;
    for (const auto& part : split(text, ',')) {
        const Scenario s = parse_scenario(part);
        if (std::find(scenarios.begin(), scenarios.end(), s) == scenarios.end()) {
            scenarios.push_back(s);
        }
    }
    if (scenarios.empty()) {
        throw ValidationError("scenario list is empty");
    }
    return scenarios;
}

std::vector<int> parse_channels(const std::string& text) {
    if (text == "all") {
        return {};
    }
    std::vector<int> channels = parse_int_list(text);
    if (channels.empty()) {
        throw ValidationError("channel list is empty");
    }
    return channels;
}

// Flags shared by eval and sfs. Values stay as text until merged so that only
// flags actually given override the config file.
struct PipelineFlags {
    std::string dataset;
    std::string out;
    std::string config;
    std::string features;
    std::string td_stat;
    std::string td_threshold;
    std::string fdt_bands;
    std::string ar_order;
    std::string window_ms;
    std::string step_ms;
    std::string channels;
    std::string lambda;
    std::string scenario;
    std::string ranks;
    std::string normal_pool;
    std::string score_view;
    unsigned threads = 0;

    std::vector<std::pair<CLI::Option*, std::string*>> options;

    void add_to(CLI::App& app) {
        const auto add = [&](const char* name, std::string& target, const char* help) {
            options.emplace_back(app.add_option(name, target, help), &target);
        };
        add("--dataset", dataset, "Dataset root directory");
        add("--out", out, "Output directory");
        app.add_option("--config", config, "JSON run configuration; flags override it");
        add("--features", features, "Feature set: td, fdt, ar, td+fdt, td+ar");
        add("--td-stat", td_stat, "Amplitude statistic of the TD set: mav or rms");
        add("--td-threshold", td_threshold, "Threshold of ZC and SSC, signal units");
        add("--fdt-bands", fdt_bands, "Band count L, or low:high,low:high,... in Hz");
        add("--ar-order", ar_order, "AR model order");
        add("--window-ms", window_ms, "Window length in ms");
        add("--step-ms", step_ms, "Window step in ms");
        add("--channels", channels, "Channel list (0-based, comma separated) or 'all'");
        add("--lambda", lambda, "Covariance shrinkage factor");
        add("--scenario", scenario, "Verification scenarios: normal,leaked,self");
        add("--ranks", ranks, "Identification ranks, comma separated");
        add("--normal-pool", normal_pool,
            "Normal impostor pool: exclusive (omit the authentication gesture) or inclusive");
        add("--score-view", score_view, "Scoring unit: window or trial-median");
        app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
    }

    bool given(const std::string& value) const {
        for (const auto& [option, target] : options) {
            if (target == &value) {
                return option->count() > 0;
            }
        }
        return false;
    }

    RunConfig resolve() const {
        RunConfig config;
        if (!this->config.empty()) {
            std::ifstream in(this->config);
            if (!in) {
                throw ValidationError("cannot open config file " + this->config);
            }
            json doc;
            try {
                doc = json::parse(in);
            } catch (const json::exception& e) {
                throw ValidationError("invalid config file " + this->config + ": " + e.what());
            }
            config.merge_json(doc);
        }
        if (given(dataset)) config.dataset_root = dataset;
        if (given(out)) config.output_dir = out;
        if (given(features)) config.features.kind = parse_feature_kind(features);
        if (given(td_stat)) config.features.td_stat = parse_amplitude_stat(td_stat);
        if (given(td_threshold)) config.features.td_threshold = parse_double(td_threshold, "TD threshold");
        if (given(fdt_bands)) config.features.fdt_bands = parse_bands(fdt_bands);
        if (given(ar_order)) config.features.ar_order = static_cast<int>(parse_double(ar_order, "AR order"));
        if (given(window_ms)) config.window.window_len_ms = parse_double(window_ms, "window length");
        if (given(step_ms)) config.window.step_ms = parse_double(step_ms, "step");
        if (given(channels)) config.channels = parse_channels(channels);
        if (given(lambda)) config.lambda = parse_double(lambda, "lambda");
        if (given(scenario)) config.scenarios = parse_scenarios(scenario);
        if (given(ranks)) config.ranks = parse_int_list(ranks);
        if (given(normal_pool)) config.normal_pool = parse_normal_pool(normal_pool);
        if (given(score_view)) config.score_view = parse_score_view(score_view);

        if (config.dataset_root.empty()) {
            throw ValidationError("--dataset is required");
        }
        if (config.output_dir.empty()) {
            throw ValidationError("--out is required");
        }
        if (fs::exists(config.output_dir) && fs::exists(config.dataset_root) &&
            fs::equivalent(config.output_dir, config.dataset_root)) {
            throw ValidationError("output directory must differ from the dataset directory");
        }
        if (config.ranks.empty()) {
            throw ValidationError("rank list is empty");
        }
        return config;
    }
};

void write_json(const fs::path& file, const ordered_json& doc) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ValidationError("cannot write " + file.string());
    }
    out << doc.dump(2) << "\n";
}

// Checks every run-time input against the dataset before any computation.
void validate_run(const RunConfig& config, const DatasetMeta& meta) {
    config.window.validate(meta.sampling_rate_hz);
    config.features.validate(meta.sampling_rate_hz, config.window.window_samples(meta.sampling_rate_hz));
    if (!(config.lambda >= 0.0)) {
        throw ValidationError("lambda must be >= 0");
    }
    for (std::size_t i = 0; i < config.channels.size(); ++i) {
        if (config.channels[i] < 0 || config.channels[i] >= meta.channel_count) {
            throw ValidationError("channel " + std::to_string(config.channels[i]) +
                                  " out of range for " + std::to_string(meta.channel_count) +
                                  " channels");
        }
        if (i > 0 && config.channels[i] <= config.channels[i - 1]) {
            throw ValidationError("channel list must be strictly increasing");
        }
    }
    for (const int k : config.ranks) {
        if (k < 1) {
            throw ValidationError("ranks must be >= 1");
        }
    }
}

std::string fixed(double value, int digits = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << value;
    return s.str();
}

int cmd_synth(const SynthSpec& spec, const std::string& format, const std::string& out_dir,
              std::ostream& out) {
    if (spec.trials < 2) {
        throw ValidationError("--trials must be at least 2 (leave-one-out needs two trials)");
    }
    if (out_dir.empty()) {
        throw ValidationError("--out is required");
    }
    Dataset dataset = synth_dataset(spec);
    dataset.meta.format = parse_sample_format(format);
    write_dataset(dataset, out_dir);
    out << "wrote " << dataset.trials.size() << " trials to " << out_dir << "\n"
        << "  participants: " << dataset.meta.participant_count()
        << ", gestures: " << dataset.meta.gesture_count()
        << ", trials per gesture: " << dataset.meta.trials_per_gesture
        << ", channels: " << dataset.meta.channel_count << "\n"
        << "  samples per trial: " << dataset.trials.front().sample_count() << " at "
        << dataset.meta.sampling_rate_hz << " Hz, format " << to_string(dataset.meta.format)
        << ", seed " << spec.seed << ", separation " << spec.separation << "\n";
    return kExitOk;
}

int cmd_validate(const std::string& root, std::ostream& out) {
    if (root.empty()) {
        throw ValidationError("--dataset is required");
    }
    DatasetScan scan = scan_dataset(root);
    std::vector<ValidationIssue> issues = scan.issues;
    const ValidationReport report = validate_dataset(scan.meta, scan.recordings);
    issues.insert(issues.end(), report.issues.begin(), report.issues.end());
    for (const auto& issue : issues) {
        out << to_string(issue.kind) << ": " << issue.message << "\n";
    }
    out << issues.size() << " issues\n";
    return issues.empty() ? kExitOk : kExitValidation;
}

void print_report(const EvalReport& report, std::ostream& out) {
    out << "feature set " << report.feature_set << ", " << report.channels.size()
        << " channels, dim " << report.dim << ", lambda " << report.lambda << "\n";
    out << "Verification (EER)        Med      Q1      Q3\n";
    for (const Scenario s : report.scenarios) {
        const auto& summary = report.verification[static_cast<std::size_t>(s)];
        if (!summary) {
            continue;
        }
        std::string label = to_string(s);
        label[0] = static_cast<char>(std::toupper(label[0]));
        label += " Test";
        out << "  " << std::left << std::setw(20) << label << std::right << "  "
            << fixed(summary->eer.med) << "  " << fixed(summary->eer.q1) << "  "
            << fixed(summary->eer.q3) << "\n";
    }
    if (!report.identification.empty()) {
        out << "Identification            Med      Q1      Q3\n";
        for (const auto& [k, q] : report.identification) {
            out << "  " << std::left << std::setw(20) << ("R" + std::to_string(k) + "E") << std::right
                << "  " << fixed(q.med) << "  " << fixed(q.q1) << "  " << fixed(q.q3) << "\n";
        }
    }
    for (const auto& warning : report.warnings) {
        out << "warning: " << warning << "\n";
    }
}

int cmd_eval(const RunConfig& config, bool export_features, bool export_models, std::ostream& out) {
    const Dataset dataset = load_dataset(config.dataset_root);
    validate_run(config, dataset.meta);
    fs::create_directories(config.output_dir);
    ordered_json resolved = config.to_json();
    resolved.erase("metric");
    resolved.erase("aggregate");
    write_json(config.output_dir / "config.json", resolved);

    const EvalConfig eval_config = config.eval_config();
    const FeatureTable table = build_feature_table(dataset, eval_config.features, eval_config.window);
    const EvalReport report = evaluate(table, eval_config);

    write_summary_json(report, config.output_dir / "summary.json");
    for (const Scenario s : report.scenarios) {
        if (const auto& curve = report.pooled_det[static_cast<std::size_t>(s)]) {
            write_det_csv(*curve, config.output_dir / ("det_" + to_string(s) + ".csv"));
        }
    }
    if (report.pooled_cmc) {
        write_cmc_csv(*report.pooled_cmc, config.output_dir / "cmc.csv");
    }
    write_fold_csv(report, config.output_dir / "folds.csv");
    write_participant_csv(report, config.output_dir / "participants.csv");

    if (export_features) {
        std::vector<FeatureMatrix> selected;
        std::vector<int> positions = eval_config.channels;
        if (positions.empty()) {
            for (int c = 0; c < table.meta.channel_count; ++c) {
                positions.push_back(c);
            }
        }
        for (const auto& m : table.trials) {
            selected.push_back(select_feature_channels(m, positions));
        }
        write_feature_csv(selected, config.output_dir / "features.csv");
    }
    if (export_models) {
        std::vector<int> positions = eval_config.channels;
        if (positions.empty()) {
            for (int c = 0; c < table.meta.channel_count; ++c) {
                positions.push_back(c);
            }
        }
        for (const LooFold& fold : loo_schedule(table.meta.trials_per_gesture).folds) {
            const FoldData data = build_fold(table, positions, fold, eval_config.lambda);
            const fs::path dir = config.output_dir / "models" / ("fold" + std::to_string(fold.test_trial));
            fs::create_directories(dir);
            for (const auto& per_gesture : data.models) {
                for (const auto& model : per_gesture) {
                    write_class_model(model, dir / (model.gesture + "__" + model.user + ".mdl"));
                }
            }
        }
    }

    print_report(report, out);
    out << "reports written to " << config.output_dir.string() << "\n";
    return kExitOk;
}

int cmd_sfs(const RunConfig& config, std::ostream& out) {
    if (config.scenarios.size() != 1) {
        throw ValidationError("sfs takes exactly one --scenario");
    }
    const SfsMetric base_metric = parse_metric(config.metric, config.scenarios.front());
    SfsMetric metric = base_metric;
    metric.aggregate = config.aggregate;

    const Dataset dataset = load_dataset(config.dataset_root);
    validate_run(config, dataset.meta);
    fs::create_directories(config.output_dir);
    ordered_json resolved = config.to_json();
    resolved.erase("channels");
    resolved.erase("ranks");
    write_json(config.output_dir / "config.json", resolved);

    const EvalConfig eval_config = config.eval_config();
    const SfsTrace trace = sfs(dataset, eval_config, metric);
    write_sfs_csv(trace, config.output_dir / "sfs.csv");

    ordered_json summary;
    summary["metric"] = metric.name();
    summary["aggregate"] = to_string(metric.aggregate);
    summary["feature_set"] = to_string(eval_config.features.kind);
    summary["lambda"] = eval_config.lambda;
    summary["order"] = trace.order();
    ordered_json iterations = ordered_json::array();
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        const SfsIteration& it = trace.iterations[i];
        ordered_json entry;
        entry["iteration"] = i + 1;
        entry["selected_channel"] = it.selected_channel;
        entry["selected_error"] = it.selected_error;
        entry["range"] = it.range;
        entry["applied"] = it.applied;
        iterations.push_back(entry);
    }
    summary["iterations"] = iterations;
    write_json(config.output_dir / "sfs_summary.json", summary);

    out << "sequential forward selection on " << metric.name() << " (" << to_string(metric.aggregate)
        << " across participants)\n";
    out << "  n  channel     error     range\n";
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        const SfsIteration& it = trace.iterations[i];
        out << "  " << std::setw(1) << i + 1 << "  " << std::setw(7) << it.selected_channel << "  "
            << fixed(it.selected_error, 6) << "  " << fixed(it.range, 6) << "\n";
    }
    out << "reports written to " << config.output_dir.string() << "\n";
    return kExitOk;
}

} // namespace

ordered_json RunConfig::to_json() const {
    ordered_json doc;
    doc["dataset"] = dataset_root.string();
    doc["out"] = output_dir.string();
    doc["features"] = to_string(features.kind);
    doc["td_stat"] = to_string(features.td_stat);
    doc["td_threshold"] = features.td_threshold;
    ordered_json bands = ordered_json::array();
    for (const auto& band : features.fdt_bands) {
        bands.push_back({band.low_hz, band.high_hz});
    }
    doc["fdt_bands"] = bands;
    doc["fdt_floor"] = features.fdt_floor;
    doc["ar_order"] = features.ar_order;
    doc["window_ms"] = window.window_len_ms;
    doc["step_ms"] = window.step_ms;
    if (channels.empty()) {
        doc["channels"] = "all";
    } else {
        doc["channels"] = channels;
    }
    doc["lambda"] = lambda;
    ordered_json names = ordered_json::array();
    for (const Scenario s : scenarios) {
        names.push_back(emgauth::to_string(s));
    }
    doc["scenarios"] = names;
    doc["ranks"] = ranks;
    doc["normal_pool"] = to_string(normal_pool);
    doc["score_view"] = to_string(score_view);
    doc["metric"] = metric;
    doc["aggregate"] = to_string(aggregate);
    return doc;
}

void RunConfig::merge_json(const json& doc) {
    if (!doc.is_object()) {
        throw ValidationError("config must be a JSON object");
    }
    static const std::vector<std::string> known{
        "dataset", "out",     "features", "td_stat",   "td_threshold", "fdt_bands",
        "fdt_floor", "ar_order", "window_ms", "step_ms", "channels",     "lambda",
        "scenarios", "ranks",  "normal_pool", "score_view", "metric",   "aggregate"};
    for (const auto& [key, value] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ValidationError("unknown config key '" + key + "'");
        }
    }
    try {
        if (doc.contains("dataset")) dataset_root = doc["dataset"].get<std::string>();
        if (doc.contains("out")) output_dir = doc["out"].get<std::string>();
        if (doc.contains("features")) features.kind = parse_feature_kind(doc["features"].get<std::string>());
        if (doc.contains("td_stat")) features.td_stat = parse_amplitude_stat(doc["td_stat"].get<std::string>());
        if (doc.contains("td_threshold")) features.td_threshold = doc["td_threshold"].get<double>();
        if (doc.contains("fdt_bands")) {
            const json& bands = doc["fdt_bands"];
            if (bands.is_number_integer()) {
                features.fdt_bands = equal_bands(bands.get<int>());
            } else {
                features.fdt_bands.clear();
                for (const auto& band : bands) {
                    features.fdt_bands.push_back({band.at(0).get<double>(), band.at(1).get<double>()});
                }
            }
        }
        if (doc.contains("fdt_floor")) features.fdt_floor = doc["fdt_floor"].get<double>();
        if (doc.contains("ar_order")) features.ar_order = doc["ar_order"].get<int>();
        if (doc.contains("window_ms")) window.window_len_ms = doc["window_ms"].get<double>();
        if (doc.contains("step_ms")) window.step_ms = doc["step_ms"].get<double>();
        if (doc.contains("channels")) {
            const json& ch = doc["channels"];
            channels = ch.is_string() ? parse_channels(ch.get<std::string>()) : ch.get<std::vector<int>>();
        }
        if (doc.contains("lambda")) lambda = doc["lambda"].get<double>();
        if (doc.contains("scenarios")) {
            scenarios.clear();
            for (const auto& s : doc["scenarios"]) {
                scenarios.push_back(parse_scenario(s.get<std::string>()));
            }
        }
        if (doc.contains("ranks")) ranks = doc["ranks"].get<std::vector<int>>();
        if (doc.contains("normal_pool")) normal_pool = parse_normal_pool(doc["normal_pool"].get<std::string>());
        if (doc.contains("score_view")) score_view = parse_score_view(doc["score_view"].get<std::string>());
        if (doc.contains("metric")) metric = doc["metric"].get<std::string>();
        if (doc.contains("aggregate")) aggregate = parse_aggregate(doc["aggregate"].get<std::string>());
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid config value: ") + e.what());
    }
}

EvalConfig RunConfig::eval_config() const {
    EvalConfig config;
    config.features = features;
    config.window = window;
    config.channels = channels;
    config.lambda = lambda;
    config.scenarios = scenarios;
    config.ranks = ranks;
    config.normal_pool = normal_pool;
    config.score_view = score_view;
    return config;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    for (const auto& part : split(text, ',')) {
        const double v = parse_double(part, "integer");
        if (v != static_cast<double>(static_cast<int>(v))) {
            throw ValidationError("invalid integer '" + part + "'");
        }
        values.push_back(static_cast<int>(v));
    }
    return values;
}

std::vector<Band> parse_bands(const std::string& text) {
    if (text.find(':') == std::string::npos) {
        const double count = parse_double(text, "band count");
        if (count < 1 || count != static_cast<double>(static_cast<int>(count))) {
            throw ValidationError("band count must be a positive integer");
        }
        return equal_bands(static_cast<int>(count));
    }
    std::vector<Band> bands;
    for (const auto& part : split(text, ',')) {
        const auto edges = split(part, ':');
        if (edges.size() != 2) {
            throw ValidationError("band '" + part + "' must be low:high");
        }
        bands.push_back({parse_double(edges[0], "band edge"), parse_double(edges[1], "band edge")});
    }
    return bands;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"sEMG biometric verification and identification toolkit", "emgauth"};
    app.require_subcommand(1);

    CLI::App* synth = app.add_subcommand("synth", "Write a seeded synthetic dataset");
    SynthSpec spec;
    std::string synth_out;
    std::string synth_format = "f32le";
    synth->add_option("--users", spec.users, "Participants")->capture_default_str();
    synth->add_option("--gestures", spec.gestures, "Gestures")->capture_default_str();
    synth->add_option("--trials", spec.trials, "Trials per gesture")->capture_default_str();
    synth->add_option("--channels", spec.channels, "Channels")->capture_default_str();
    synth->add_option("--duration", spec.duration_s, "Seconds per trial")->capture_default_str();
    synth->add_option("--rate", spec.sampling_rate_hz, "Sampling rate in Hz")->capture_default_str();
    synth->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
    synth->add_option("--separation", spec.separation, "Distinctness of user signatures")
        ->capture_default_str();
    synth->add_option("--format", synth_format, "Sample file format: csv or f32le")->capture_default_str();
    synth->add_option("--out", synth_out, "Output dataset root")->required();

    CLI::App* validate = app.add_subcommand("validate", "Check a dataset directory");
    std::string validate_root;
    validate->add_option("--dataset", validate_root, "Dataset root directory")->required();

    CLI::App* eval = app.add_subcommand("eval", "Verification and identification evaluation");
    PipelineFlags eval_flags;
    eval_flags.add_to(*eval);
    bool export_features = false;
    bool export_models = false;
    eval->add_flag("--export-features", export_features, "Also write features.csv");
    eval->add_flag("--export-models", export_models, "Also write every fold's class models");

    CLI::App* select = app.add_subcommand("sfs", "Sequential forward channel selection");
    PipelineFlags sfs_flags;
    sfs_flags.add_to(*select);
    std::string metric;
    std::string aggregate;
    CLI::Option* metric_opt = select->add_option("--metric", metric, "eer, r1e, r5e or r<k>e");
    CLI::Option* aggregate_opt =
        select->add_option("--aggregate", aggregate, "Across-participant aggregate: median or mean");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return kExitOk;
        }
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return kExitValidation;
    }

    try {
        if (synth->parsed()) {
            return cmd_synth(spec, synth_format, synth_out, out);
        }
        if (validate->parsed()) {
            return cmd_validate(validate_root, out);
        }
        if (eval->parsed()) {
            set_thread_count(eval_flags.threads);
            return cmd_eval(eval_flags.resolve(), export_features, export_models, out);
        }
        if (select->parsed()) {
            set_thread_count(sfs_flags.threads);
            RunConfig config = sfs_flags.resolve();
            if (metric_opt->count() > 0) {
                config.metric = metric;
            }
            if (aggregate_opt->count() > 0) {
                config.aggregate = parse_aggregate(aggregate);
            }
            if (sfs_flags.config.empty() && !sfs_flags.given(sfs_flags.scenario)) {
                config.scenarios = {Scenario::Leaked};
            }
            parse_metric(config.metric);
            return cmd_sfs(config, out);
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitComputation;
    }
    return kExitValidation;
}

} // namespace emgauth::cli
