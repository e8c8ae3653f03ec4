#include "emgauth/eval.hpp"

#include "emgauth/error.hpp"
#include "emgauth/parallel.hpp"
#include "text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace emgauth {
namespace {

using json = nlohmann::ordered_json;
using detail::format_double;

std::size_t scenario_index(Scenario scenario) { return static_cast<std::size_t>(scenario); }

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Appends the scores of one probe trial: every window, or the median of them.
void append_scores(const ClassModel& model, const Eigen::MatrixXd& probes, ScoreView view,
                   std::vector<double>& out) {
    const Eigen::VectorXd scores = mahalanobis_scores(model, probes);
    if (view == ScoreView::TrialMedian) {
        out.push_back(median_of({scores.data(), scores.data() + scores.size()}));
    } else {
        out.insert(out.end(), scores.data(), scores.data() + scores.size());
    }
}

ScoreSet score_pools(const FoldData& fold, Scenario scenario, std::size_t gesture,
                     std::size_t user, NormalPool normal_pool, ScoreView view) {
    if (gesture >= fold.gestures.size() || user >= fold.users.size()) {
        throw ValidationError("gesture or user index out of range");
    }
    const ClassModel& model = fold.models[gesture][user];
    ScoreSet set;
    set.scenario = scenario;
    set.auth_gesture = fold.gestures[gesture];
    set.claimed_user = fold.users[user];
    append_scores(model, fold.probes[user][gesture], view, set.genuine);

    for (std::size_t v = 0; v < fold.users.size(); ++v) {
        for (std::size_t h = 0; h < fold.gestures.size(); ++h) {
            bool impostor = false;
            switch (scenario) {
            case Scenario::Normal:
                impostor = v != user &&
                           (h != gesture || normal_pool == NormalPool::IncludeAuthGesture);
                break;
            case Scenario::Leaked:
                impostor = v != user && h == gesture;
                break;
            case Scenario::Self:
                impostor = v == user && h != gesture;
                break;
            }
            if (impostor) {
                append_scores(model, fold.probes[v][h], view, set.impostor);
            }
        }
    }
    if (set.genuine.empty() || set.impostor.empty()) {
        throw ValidationError("empty " + std::string(set.genuine.empty() ? "genuine" : "impostor") +
                              " pool for scenario " + to_string(scenario) + ", gesture " +
                              set.auth_gesture + ", user " + set.claimed_user);
    }
    return set;
}

// Whether a scenario has a non-empty impostor pool for this dataset shape.
bool scenario_feasible(Scenario scenario, std::size_t users, std::size_t gestures,
                       NormalPool normal_pool) {
    switch (scenario) {
    case Scenario::Normal:
        return users >= 2 && (gestures >= 2 || normal_pool == NormalPool::IncludeAuthGesture);
    case Scenario::Leaked:
        return users >= 2;
    case Scenario::Self:
        return gestures >= 2;
    }
    return false;
}

std::vector<RankedUser> rank_users(std::span<const ClassModel> models, std::vector<double> scores) {
    std::vector<RankedUser> ranking(models.size());
    for (std::size_t v = 0; v < models.size(); ++v) {
        ranking[v] = {v, scores[v]};
    }
    std::sort(ranking.begin(), ranking.end(), [&](const RankedUser& a, const RankedUser& b) {
        if (a.score != b.score) {
            return a.score < b.score;
        }
        if (models[a.user].user != models[b.user].user) {
            return models[a.user].user < models[b.user].user;
        }
        return a.user < b.user;
    });
    return ranking;
}

std::size_t rank_of(const std::vector<RankedUser>& ranking, std::size_t true_user) {
    for (std::size_t r = 0; r < ranking.size(); ++r) {
        if (ranking[r].user == true_user) {
            return r + 1;
        }
    }
    throw ValidationError("true user missing from ranking");
}

double ratio(__int128 num, __int128 den) {
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

std::vector<int> resolve_positions(const EvalConfig& config, int channel_count) {
    std::vector<int> positions = config.channels;
    if (positions.empty()) {
        positions.resize(static_cast<std::size_t>(channel_count));
        std::iota(positions.begin(), positions.end(), 0);
    }
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (positions[i] < 0 || positions[i] >= channel_count) {
            throw ValidationError("channel " + std::to_string(positions[i]) + " out of range for " +
                                  std::to_string(channel_count) + " channels");
        }
        if (i > 0 && positions[i] <= positions[i - 1]) {
            throw ValidationError("channel list must be strictly increasing");
        }
    }
    return positions;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ValidationError("cannot write " + file.string());
    }
    out << text;
}

json quartiles_json(const Quartiles& q) {
    json j;
    j["med"] = q.med;
    j["q1"] = q.q1;
    j["q3"] = q.q3;
    return j;
}

std::string optional_cell(const std::optional<double>& value) {
    return value ? format_double(*value) : std::string();
}

} // namespace

std::string to_string(Scenario scenario) {
    switch (scenario) {
    case Scenario::Normal:
        return "normal";
    case Scenario::Leaked:
        return "leaked";
    case Scenario::Self:
        return "self";
    }
    return "unknown";
}

Scenario parse_scenario(const std::string& text) {
    for (const Scenario s : kAllScenarios) {
        if (text == to_string(s)) {
            return s;
        }
    }
    throw ValidationError("unknown scenario '" + text + "' (expected normal, leaked or self)");
}

ScoreSet build_verification_scores(const FoldData& fold, Scenario scenario, std::size_t gesture,
                                   std::size_t user, NormalPool normal_pool) {
    return score_pools(fold, scenario, gesture, user, normal_pool, ScoreView::Window);
}

DetCurve det_curve(std::span<const double> genuine, std::span<const double> impostor) {
    if (genuine.empty() || impostor.empty()) {
        throw ValidationError("DET curve needs non-empty genuine and impostor scores");
    }
    std::vector<double> g(genuine.begin(), genuine.end());
    std::vector<double> im(impostor.begin(), impostor.end());
    for (const double v : g) {
        if (!std::isfinite(v)) {
            throw ValidationError("non-finite genuine score");
        }
    }
    for (const double v : im) {
        if (!std::isfinite(v)) {
            throw ValidationError("non-finite impostor score");
        }
    }
    std::sort(g.begin(), g.end());
    std::sort(im.begin(), im.end());

    DetCurve curve;
    curve.genuine_count = static_cast<long long>(g.size());
    curve.impostor_count = static_cast<long long>(im.size());
    const auto ng = static_cast<double>(curve.genuine_count);
    const auto ni = static_cast<double>(curve.impostor_count);
    const auto add = [&](double threshold, long long accepted, long long rejected) {
        curve.points.push_back({threshold, static_cast<double>(accepted) / ni,
                                static_cast<double>(rejected) / ng, accepted, rejected});
    };

    add(-std::numeric_limits<double>::infinity(), 0, curve.genuine_count);
    std::size_t gi = 0;
    std::size_t ii = 0;
    while (gi < g.size() || ii < im.size()) {
        double t = 0.0;
        if (gi == g.size()) {
            t = im[ii];
        } else if (ii == im.size()) {
            t = g[gi];
        } else {
            t = std::min(g[gi], im[ii]);
        }
        while (gi < g.size() && g[gi] <= t) {
            ++gi;
        }
        while (ii < im.size() && im[ii] <= t) {
            ++ii;
        }
        add(t, static_cast<long long>(ii), curve.genuine_count - static_cast<long long>(gi));
    }
    add(std::numeric_limits<double>::infinity(), curve.impostor_count, 0);

    curve.eer = eer(curve);
    curve.auc = auc(curve);
    return curve;
}

DetCurve det_curve(const ScoreSet& scores) { return det_curve(scores.genuine, scores.impostor); }

double eer(const DetCurve& curve) {
    const __int128 ng = curve.genuine_count;
    const __int128 ni = curve.impostor_count;
    if (ng <= 0 || ni <= 0 || curve.points.empty()) {
        throw ValidationError("EER of an empty DET curve");
    }
    // Sign of FAR - FRR, scaled to integers: a / ni - b / ng  ~  a * ng - b * ni.
    const auto gap = [&](const DetPoint& p) {
        return static_cast<__int128>(p.impostors_accepted) * ng -
               static_cast<__int128>(p.genuines_rejected) * ni;
    };
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const DetPoint& p = curve.points[i];
        const __int128 d = gap(p);
        if (d == 0) {
            return ratio(p.impostors_accepted, ni);
        }
        if (d > 0) {
            if (i == 0) {
                return ratio(p.impostors_accepted, ni);
            }
            const DetPoint& prev = curve.points[i - 1];
            const __int128 d0 = gap(prev);
            const __int128 step = d - d0;
            const __int128 da = static_cast<__int128>(p.impostors_accepted) - prev.impostors_accepted;
            // FAR at the zero of the linear interpolant between prev and p.
            const __int128 num = static_cast<__int128>(prev.impostors_accepted) * step - d0 * da;
            return ratio(num, step * ni);
        }
    }
    return 1.0;
}

double auc(const DetCurve& curve) {
    const __int128 ng = curve.genuine_count;
    const __int128 ni = curve.impostor_count;
    if (ng <= 0 || ni <= 0 || curve.points.empty()) {
        throw ValidationError("AUC of an empty DET curve");
    }
    std::vector<std::pair<long long, long long>> pts;
    pts.reserve(curve.points.size());
    for (const auto& p : curve.points) {
        pts.emplace_back(p.impostors_accepted, p.genuines_rejected);
    }
    // FAR ascending; at equal FAR, FRR descending keeps the staircase order.
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second > b.second;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    __int128 twice_area = 0;  // in units of 1 / (ni * ng)
    for (std::size_t i = 1; i < pts.size(); ++i) {
        twice_area += static_cast<__int128>(pts[i].first - pts[i - 1].first) *
                      (pts[i].second + pts[i - 1].second);
    }
    return ratio(twice_area, 2 * ni * ng);
}

std::vector<RankedUser> identify(std::span<const ClassModel> models_for_gesture,
                                 const Eigen::Ref<const Eigen::VectorXd>& probe) {
    if (models_for_gesture.size() < 2) {
        throw ValidationError("identification needs at least 2 enrolled users");
    }
    std::vector<double> scores(models_for_gesture.size());
    for (std::size_t v = 0; v < models_for_gesture.size(); ++v) {
        scores[v] = mahalanobis_score(models_for_gesture[v], probe);
    }
    return rank_users(models_for_gesture, std::move(scores));
}

void RankTally::merge(const RankTally& other) {
    if (other.at_rank.size() != at_rank.size()) {
        throw ValidationError("cannot merge rank tallies of different user counts");
    }
    for (std::size_t i = 0; i < at_rank.size(); ++i) {
        at_rank[i] += other.at_rank[i];
    }
}

long long RankTally::total() const {
    return std::accumulate(at_rank.begin(), at_rank.end(), 0LL);
}

RankTally tally(const IdentificationResult& result) {
    RankTally t(result.user_count);
    for (const auto& probe : result.probes) {
        if (probe.ranking.size() != result.user_count) {
            throw ValidationError("ranking is not over every enrolled user");
        }
        t.add(rank_of(probe.ranking, probe.true_user));
    }
    return t;
}

double rank_k_error(const RankTally& t, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > t.user_count()) {
        throw ValidationError("rank " + std::to_string(k) + " outside 1.." +
                              std::to_string(t.user_count()));
    }
    const long long total = t.total();
    if (total == 0) {
        throw ValidationError("rank error of an empty identification result");
    }
    long long hits = 0;
    for (int r = 0; r < k; ++r) {
        hits += t.at_rank[static_cast<std::size_t>(r)];
    }
    return static_cast<double>(total - hits) / static_cast<double>(total);
}

double rank_k_error(const IdentificationResult& result, int k) {
    return rank_k_error(tally(result), k);
}

CmcCurve cmc(const RankTally& t) {
    CmcCurve curve;
    for (std::size_t k = 1; k <= t.user_count(); ++k) {
        curve.rank_errors.push_back(rank_k_error(t, static_cast<int>(k)));
    }
    return curve;
}

CmcCurve cmc(const IdentificationResult& result) { return cmc(tally(result)); }

double quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw ValidationError("quantile of an empty list");
    }
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) {
        return values.back();
    }
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

Quartiles quartiles(const std::vector<double>& values) {
    return {quantile(values, 0.5), quantile(values, 0.25), quantile(values, 0.75)};
}

const FeatureMatrix& FeatureTable::trial(std::size_t participant, std::size_t gesture,
                                         int trial) const {
    const std::size_t index =
        (participant * meta.gesture_count() + gesture) * static_cast<std::size_t>(meta.trials_per_gesture) +
        static_cast<std::size_t>(trial);
    return trials.at(index);
}

FeatureTable build_feature_table(const Dataset& dataset, const FeatureSpec& features,
                                 const WindowSpec& window) {
    dataset.meta.validate();
    const std::size_t expected = dataset.meta.participant_count() * dataset.meta.gesture_count() *
                                 static_cast<std::size_t>(dataset.meta.trials_per_gesture);
    if (dataset.trials.size() != expected) {
        throw ValidationError("dataset holds " + std::to_string(dataset.trials.size()) +
                              " trials, expected " + std::to_string(expected));
    }
    FeatureTable table;
    table.meta = dataset.meta;
    table.features = features;
    table.window = window;
    table.trials.resize(dataset.trials.size());
    parallel_for(dataset.trials.size(), [&](std::size_t i) {
        table.trials[i] =
            extract_features(dataset.trials[i], features, window, dataset.meta.sampling_rate_hz);
    });
    return table;
}

FoldData build_fold(const FeatureTable& table, std::span<const int> channel_positions,
                    const LooFold& fold, double lambda) {
    const DatasetMeta& meta = table.meta;
    const std::size_t users = meta.participant_count();
    const std::size_t gestures = meta.gesture_count();
    FoldData data;
    data.users = meta.participant_ids;
    data.gestures = meta.gesture_ids;
    data.models.assign(gestures, std::vector<ClassModel>(users));
    data.probes.assign(users, std::vector<Eigen::MatrixXd>(gestures));

    parallel_for(users * gestures, [&](std::size_t index) {
        const std::size_t u = index / gestures;
        const std::size_t g = index % gestures;
        std::vector<FeatureMatrix> train;
        for (const int t : fold.train_trials) {
            train.push_back(select_feature_channels(table.trial(u, g, t), channel_positions));
        }
        data.models[g][u] = fit_class_model(train, lambda, meta.gesture_ids[g], meta.participant_ids[u]);
        data.probes[u][g] =
            select_feature_channels(table.trial(u, g, fold.test_trial), channel_positions).rows;
    });
    return data;
}

EvalReport evaluate(const FeatureTable& table, const EvalConfig& config) {
    const DatasetMeta& meta = table.meta;
    meta.validate();
    const std::size_t users = meta.participant_count();
    const std::size_t gestures = meta.gesture_count();
    const std::vector<int> positions = resolve_positions(config, meta.channel_count);
    if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda)) {
        throw ValidationError("lambda must be a finite value >= 0");
    }
    for (const int k : config.ranks) {
        if (k < 1) {
            throw ValidationError("ranks must be >= 1");
        }
    }

    EvalReport report;
    report.feature_set = to_string(table.features.kind);
    for (const int p : positions) {
        report.channels.push_back(p);
    }
    report.lambda = config.lambda;
    report.dim = static_cast<Eigen::Index>(table.features.per_channel_dim()) *
                 static_cast<Eigen::Index>(positions.size());
    report.ranks = config.ranks;

    std::vector<Scenario> scenarios;
    for (const Scenario s : kAllScenarios) {
        if (std::find(config.scenarios.begin(), config.scenarios.end(), s) == config.scenarios.end()) {
            continue;
        }
        if (!scenario_feasible(s, users, gestures, config.normal_pool)) {
            for (const auto& id : meta.participant_ids) {
                report.warnings.push_back("scenario " + to_string(s) + ": participant " + id +
                                          " excluded (empty impostor pool)");
            }
            continue;
        }
        scenarios.push_back(s);
    }
    report.scenarios = scenarios;
    bool identification = config.identification;
    if (identification && users < 2) {
        report.warnings.push_back("identification skipped: fewer than 2 enrolled users");
        identification = false;
    }
    if (identification) {
        for (const int k : config.ranks) {
            if (static_cast<std::size_t>(k) > users) {
                report.warnings.push_back("rank " + std::to_string(k) + " exceeds the " +
                                          std::to_string(users) +
                                          " enrolled users; reported as rank " +
                                          std::to_string(users));
            }
        }
    }
    long long degenerate = 0;
    for (const auto& m : table.trials) {
        degenerate += m.degenerate_windows;
    }
    if (degenerate > 0) {
        report.warnings.push_back(std::to_string(degenerate) +
                                  " windows had a constant channel; their AR coefficients are zero");
    }

    const auto clamp_rank = [&](int k) {
        return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(k), users));
    };

    // Per participant pools, appended fold by fold.
    struct Pools {
        std::array<std::vector<double>, 3> genuine;
        std::array<std::vector<double>, 3> impostor;
        RankTally ranks;
    };
    std::vector<Pools> pools(users);
    for (auto& p : pools) {
        p.ranks = RankTally(users);
    }

    const LooSchedule schedule = loo_schedule(meta.trials_per_gesture);
    for (const LooFold& fold : schedule.folds) {
        const FoldData data = build_fold(table, positions, fold, config.lambda);
        std::vector<Pools> fold_pools(users);
        parallel_for(users, [&](std::size_t u) {
            Pools& fp = fold_pools[u];
            fp.ranks = RankTally(users);
            for (std::size_t g = 0; g < gestures; ++g) {
                for (const Scenario s : scenarios) {
                    ScoreSet set =
                        score_pools(data, s, g, u, config.normal_pool, config.score_view);
                    auto& gen = fp.genuine[scenario_index(s)];
                    auto& imp = fp.impostor[scenario_index(s)];
                    gen.insert(gen.end(), set.genuine.begin(), set.genuine.end());
                    imp.insert(imp.end(), set.impostor.begin(), set.impostor.end());
                }
                if (!identification) {
                    continue;
                }
                const std::vector<ClassModel>& models = data.models[g];
                const Eigen::MatrixXd& probes = data.probes[u][g];
                if (config.score_view == ScoreView::TrialMedian) {
                    std::vector<double> scores(users);
                    for (std::size_t v = 0; v < users; ++v) {
                        const Eigen::VectorXd s = mahalanobis_scores(models[v], probes);
                        scores[v] = median_of({s.data(), s.data() + s.size()});
                    }
                    fp.ranks.add(rank_of(rank_users(models, std::move(scores)), u));
                } else {
                    for (Eigen::Index r = 0; r < probes.rows(); ++r) {
                        fp.ranks.add(rank_of(identify(models, probes.row(r).transpose()), u));
                    }
                }
            }
        });

        for (std::size_t u = 0; u < users; ++u) {
            FoldDetail detail;
            detail.participant = meta.participant_ids[u];
            detail.test_trial = fold.test_trial;
            for (const Scenario s : scenarios) {
                const std::size_t si = scenario_index(s);
                const DetCurve curve = det_curve(fold_pools[u].genuine[si], fold_pools[u].impostor[si]);
                detail.verification[si] = VerificationResult{curve.eer, curve.auc};
                auto& gen = pools[u].genuine[si];
                auto& imp = pools[u].impostor[si];
                gen.insert(gen.end(), fold_pools[u].genuine[si].begin(), fold_pools[u].genuine[si].end());
                imp.insert(imp.end(), fold_pools[u].impostor[si].begin(),
                           fold_pools[u].impostor[si].end());
            }
            if (identification) {
                for (const int k : config.ranks) {
                    detail.rank_errors.push_back(rank_k_error(fold_pools[u].ranks, clamp_rank(k)));
                }
                pools[u].ranks.merge(fold_pools[u].ranks);
            }
            report.folds.push_back(std::move(detail));
        }
    }

    report.participants.resize(users);
    parallel_for(users, [&](std::size_t u) {
        ParticipantResult& result = report.participants[u];
        result.participant = meta.participant_ids[u];
        for (const Scenario s : scenarios) {
            const std::size_t si = scenario_index(s);
            const DetCurve curve = det_curve(pools[u].genuine[si], pools[u].impostor[si]);
            result.verification[si] = VerificationResult{curve.eer, curve.auc};
        }
        if (identification) {
            result.identification = pools[u].ranks;
        }
    });

    for (const Scenario s : scenarios) {
        const std::size_t si = scenario_index(s);
        std::vector<double> eers;
        std::vector<double> aucs;
        for (const auto& p : report.participants) {
            if (p.verification[si]) {
                eers.push_back(p.verification[si]->eer);
                aucs.push_back(p.verification[si]->auc);
            }
        }
        if (!eers.empty()) {
            report.verification[si] = ScenarioSummary{quartiles(eers), quartiles(aucs), eers.size()};
        }
        if (config.pooled_curves) {
            std::vector<double> gen;
            std::vector<double> imp;
            for (std::size_t u = 0; u < users; ++u) {
                gen.insert(gen.end(), pools[u].genuine[si].begin(), pools[u].genuine[si].end());
                imp.insert(imp.end(), pools[u].impostor[si].begin(), pools[u].impostor[si].end());
            }
            report.pooled_det[si] = det_curve(gen, imp);
        }
    }

    if (identification) {
        RankTally all(users);
        for (const auto& p : report.participants) {
            all.merge(*p.identification);
        }
        report.pooled_cmc = cmc(all);
        for (const int k : config.ranks) {
            std::vector<double> errors;
            for (const auto& p : report.participants) {
                errors.push_back(rank_k_error(*p.identification, clamp_rank(k)));
            }
            report.identification.emplace_back(k, quartiles(errors));
        }
    }
    return report;
}

EvalReport evaluate(const Dataset& dataset, const EvalConfig& config) {
    return evaluate(build_feature_table(dataset, config.features, config.window), config);
}

void write_summary_json(const EvalReport& report, const std::filesystem::path& file) {
    json doc;
    doc["feature_set"] = report.feature_set;
    doc["channels"] = report.channels;
    doc["lambda"] = report.lambda;
    doc["dim"] = report.dim;
    doc["participants"] = report.participants.size();
    for (const Scenario s : report.scenarios) {
        const auto& summary = report.verification[scenario_index(s)];
        if (!summary) {
            continue;
        }
        json entry;
        entry["eer"] = quartiles_json(summary->eer);
        entry["auc"] = quartiles_json(summary->auc);
        entry["participants"] = summary->participants;
        doc[to_string(s)] = entry;
    }
    json ident = json::object();
    for (const auto& [k, q] : report.identification) {
        ident["r" + std::to_string(k) + "e"] = quartiles_json(q);
    }
    doc["identification"] = ident;
    doc["warnings"] = report.warnings;
    write_text(file, doc.dump(2) + "\n");
}

void write_det_csv(const DetCurve& curve, const std::filesystem::path& file) {
    std::string out = "threshold,far,frr\n";
    for (const auto& p : curve.points) {
        out += format_double(p.threshold) + "," + format_double(p.far) + "," +
               format_double(p.frr) + "\n";
    }
    write_text(file, out);
}

void write_cmc_csv(const CmcCurve& curve, const std::filesystem::path& file) {
    std::string out = "rank,error\n";
    for (std::size_t k = 0; k < curve.rank_errors.size(); ++k) {
        out += std::to_string(k + 1) + "," + format_double(curve.rank_errors[k]) + "\n";
    }
    write_text(file, out);
}

void write_fold_csv(const EvalReport& report, const std::filesystem::path& file) {
    std::string out = "participant,test_trial";
    for (const Scenario s : report.scenarios) {
        out += "," + to_string(s) + "_eer," + to_string(s) + "_auc";
    }
    if (!report.identification.empty()) {
        for (const int k : report.ranks) {
            out += ",r" + std::to_string(k) + "e";
        }
    }
    out += "\n";
    for (const auto& fold : report.folds) {
        out += fold.participant + "," + std::to_string(fold.test_trial);
        for (const Scenario s : report.scenarios) {
            const auto& v = fold.verification[scenario_index(s)];
            out += "," + optional_cell(v ? std::optional<double>(v->eer) : std::nullopt) + "," +
                   optional_cell(v ? std::optional<double>(v->auc) : std::nullopt);
        }
        for (const double e : fold.rank_errors) {
            out += "," + format_double(e);
        }
        out += "\n";
    }
    write_text(file, out);
}

void write_participant_csv(const EvalReport& report, const std::filesystem::path& file) {
    std::string out = "participant";
    for (const Scenario s : report.scenarios) {
        out += "," + to_string(s) + "_eer," + to_string(s) + "_auc";
    }
    for (const auto& [k, q] : report.identification) {
        out += ",r" + std::to_string(k) + "e";
    }
    out += "\n";
    const std::size_t users = report.participants.size();
    for (const auto& p : report.participants) {
        out += p.participant;
        for (const Scenario s : report.scenarios) {
            const auto& v = p.verification[scenario_index(s)];
            out += "," + optional_cell(v ? std::optional<double>(v->eer) : std::nullopt) + "," +
                   optional_cell(v ? std::optional<double>(v->auc) : std::nullopt);
        }
        for (const auto& [k, q] : report.identification) {
            const int rank = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(k), users));
            out += "," + format_double(rank_k_error(*p.identification, rank));
        }
        out += "\n";
    }
    write_text(file, out);
}

} // namespace emgauth
