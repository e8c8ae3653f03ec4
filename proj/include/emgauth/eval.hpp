#pragma once

#include "emgauth/dataset.hpp"
#include "emgauth/features.hpp"
#include "emgauth/model.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace emgauth {

enum class Scenario { Normal, Leaked, Self };

inline constexpr std::array<Scenario, 3> kAllScenarios{Scenario::Normal, Scenario::Leaked,
                                                       Scenario::Self};

std::string to_string(Scenario scenario);
Scenario parse_scenario(const std::string& text);

// Which gestures of other users form the Normal impostor pool.
enum class NormalPool {
    ExcludeAuthGesture,  // every gesture except the authentication gesture
    IncludeAuthGesture,  // every gesture
};

// Unit of scoring. Window scores every window; TrialMedian collapses each probe
// trial to the median of its window scores.
enum class ScoreView { Window, TrialMedian };

struct ScoreSet {
    Scenario scenario = Scenario::Normal;
    std::string auth_gesture;
    std::string claimed_user;
    std::vector<double> genuine;
    std::vector<double> impostor;
};

// Models fitted on the training trials of one fold plus the held-out windows.
struct FoldData {
    std::vector<std::string> users;
    std::vector<std::string> gestures;
    std::vector<std::vector<ClassModel>> models;       // [gesture][user]
    std::vector<std::vector<Eigen::MatrixXd>> probes;  // [user][gesture], one row per window
};

// Genuine: user u performing g. Impostors, all scored against the (g, u) model:
//   Normal  other users, every gesture other than g (or every gesture, see NormalPool)
//   Leaked  other users performing g
//   Self    user u performing every gesture other than g
ScoreSet build_verification_scores(const FoldData& fold, Scenario scenario, std::size_t gesture,
                                   std::size_t user,
                                   NormalPool normal_pool = NormalPool::ExcludeAuthGesture);

// Accept iff score <= threshold.
struct DetPoint {
    double threshold = 0.0;
    double far = 0.0;
    double frr = 0.0;
    long long impostors_accepted = 0;
    long long genuines_rejected = 0;
};

struct DetCurve {
    // -inf and +inf sentinels first and last, every distinct score in between.
    std::vector<DetPoint> points;
    long long genuine_count = 0;
    long long impostor_count = 0;
    double eer = 0.0;
    double auc = 0.0;
};

DetCurve det_curve(std::span<const double> genuine, std::span<const double> impostor);
DetCurve det_curve(const ScoreSet& scores);

double eer(const DetCurve& curve);
double auc(const DetCurve& curve);

struct RankedUser {
    std::size_t user = 0;
    double score = 0.0;
};

// Ascending score; ties broken by ClassModel::user.
std::vector<RankedUser> identify(std::span<const ClassModel> models_for_gesture,
                                 const Eigen::Ref<const Eigen::VectorXd>& probe);

struct IdentifiedProbe {
    std::size_t true_user = 0;
    std::vector<RankedUser> ranking;
};

struct IdentificationResult {
    std::size_t user_count = 0;
    std::vector<IdentifiedProbe> probes;
};

// Histogram of the 1-based rank at which the true user appeared.
struct RankTally {
    std::vector<long long> at_rank;  // at_rank[r - 1]

    explicit RankTally(std::size_t user_count = 0) : at_rank(user_count, 0) {}

    void add(std::size_t rank) { ++at_rank.at(rank - 1); }
    void merge(const RankTally& other);
    long long total() const;
    std::size_t user_count() const { return at_rank.size(); }
};

RankTally tally(const IdentificationResult& result);

double rank_k_error(const IdentificationResult& result, int k);
double rank_k_error(const RankTally& tally, int k);

struct CmcCurve {
    std::vector<double> rank_errors;  // rank_errors[k - 1]
};

CmcCurve cmc(const IdentificationResult& result);
CmcCurve cmc(const RankTally& tally);

struct Quartiles {
    double med = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

// Linear interpolation between closest ranks, inclusive of the endpoints.
double quantile(std::vector<double> values, double q);
Quartiles quartiles(const std::vector<double>& values);

struct EvalConfig {
    FeatureSpec features;
    WindowSpec window;
    std::vector<int> channels;  // positions into the dataset channels; empty = all
    double lambda = kDefaultLambda;
    std::vector<Scenario> scenarios{kAllScenarios.begin(), kAllScenarios.end()};
    bool identification = true;
    std::vector<int> ranks{1, 5};
    NormalPool normal_pool = NormalPool::ExcludeAuthGesture;
    ScoreView score_view = ScoreView::Window;
    // Keep every participant's scores so pooled DET curves can be emitted.
    bool pooled_curves = true;
};

// Full-channel feature matrices for every trial of a dataset, canonical order.
struct FeatureTable {
    DatasetMeta meta;
    FeatureSpec features;
    WindowSpec window;
    std::vector<FeatureMatrix> trials;

    const FeatureMatrix& trial(std::size_t participant, std::size_t gesture, int trial) const;
};

FeatureTable build_feature_table(const Dataset& dataset, const FeatureSpec& features,
                                 const WindowSpec& window);

struct VerificationResult {
    double eer = 0.0;
    double auc = 0.0;
};

struct ParticipantResult {
    std::string participant;
    std::array<std::optional<VerificationResult>, 3> verification;  // by Scenario
    std::optional<RankTally> identification;
};

struct FoldDetail {
    std::string participant;
    int test_trial = 0;
    std::array<std::optional<VerificationResult>, 3> verification;
    std::vector<double> rank_errors;  // one per EvalConfig::ranks entry
};

struct ScenarioSummary {
    Quartiles eer;
    Quartiles auc;
    std::size_t participants = 0;
};

struct EvalReport {
    std::string feature_set;
    std::vector<int> channels;
    double lambda = 0.0;
    Eigen::Index dim = 0;
    std::vector<int> ranks;
    std::vector<Scenario> scenarios;

    std::vector<ParticipantResult> participants;
    std::array<std::optional<ScenarioSummary>, 3> verification;  // by Scenario
    std::vector<std::pair<int, Quartiles>> identification;       // rank k -> R_kE quartiles
    std::array<std::optional<DetCurve>, 3> pooled_det;
    std::optional<CmcCurve> pooled_cmc;
    std::vector<FoldDetail> folds;
    std::vector<std::string> warnings;
};

// Leave-one-trial-out over every fold, participant and authentication gesture.
// Scores are pooled per participant across folds and gestures; quartiles are
// taken across participants.
EvalReport evaluate(const FeatureTable& table, const EvalConfig& config);
EvalReport evaluate(const Dataset& dataset, const EvalConfig& config);

// Fits every (gesture, user) model on train trials and collects test-trial probes.
FoldData build_fold(const FeatureTable& table, std::span<const int> channel_positions,
                    const LooFold& fold, double lambda);

void write_summary_json(const EvalReport& report, const std::filesystem::path& file);
void write_det_csv(const DetCurve& curve, const std::filesystem::path& file);
void write_cmc_csv(const CmcCurve& curve, const std::filesystem::path& file);
void write_fold_csv(const EvalReport& report, const std::filesystem::path& file);
void write_participant_csv(const EvalReport& report, const std::filesystem::path& file);

} // namespace emgauth
