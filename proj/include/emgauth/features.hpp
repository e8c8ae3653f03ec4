#pragma once

#include "emgauth/dataset.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace emgauth {

struct WindowSpec {
    double window_len_ms = 200.0;
    double step_ms = 50.0;

    // Window and step in samples, rounded half away from zero.
    Eigen::Index window_samples(double sampling_rate_hz) const;
    Eigen::Index step_samples(double sampling_rate_hz) const;

    void validate(double sampling_rate_hz) const;
};

// [begin, begin + length) sample ranges of every window over n_samples.
struct WindowLayout {
    Eigen::Index length = 0;
    Eigen::Index step = 0;
    Eigen::Index count = 0;

    Eigen::Index begin(Eigen::Index k) const { return k * step; }
};

WindowLayout window_layout(Eigen::Index n_samples, const WindowSpec& spec,
                           double sampling_rate_hz);

// Windows as views into rec.samples (rows [k*S, k*S+W), all channels).
std::vector<Eigen::Block<const Eigen::MatrixXd>> window_signal(const TrialRecording& rec,
                                                               const WindowSpec& spec,
                                                               double sampling_rate_hz);

enum class FeatureKind { TD, FDT, AR, TD_FDT, TD_AR };
enum class AmplitudeStat { MAV, RMS };

std::string to_string(FeatureKind kind);
FeatureKind parse_feature_kind(const std::string& text);
std::string to_string(AmplitudeStat stat);
AmplitudeStat parse_amplitude_stat(const std::string& text);

// Half-open frequency band [low_hz, high_hz).
struct Band {
    double low_hz = 0.0;
    double high_hz = 0.0;
};

// count equal-width bands covering [low_hz, high_hz).
std::vector<Band> equal_bands(int count, double low_hz = 10.0, double high_hz = 500.0);

struct FeatureSpec {
    FeatureKind kind = FeatureKind::TD;
    AmplitudeStat td_stat = AmplitudeStat::MAV;
    double td_threshold = 0.0;
    std::vector<Band> fdt_bands = equal_bands(6);
    double fdt_floor = 1e-12;
    int ar_order = 6;

    int per_channel_dim() const;
    void validate(double sampling_rate_hz, Eigen::Index window_samples) const;
};

// Time-domain statistics of one channel window.
double mav(std::span<const double> x);
double rms(std::span<const double> x);
int ssc(std::span<const double> x, double threshold);
double wl(std::span<const double> x);
int zc(std::span<const double> x, double threshold);

// ln(floor + sum of one-sided DFT magnitudes in each band).
std::vector<double> fdt(std::span<const double> x, std::span<const Band> bands, double floor,
                        double sampling_rate_hz);

struct ArEstimate {
    // a_1..a_P with x_i = sum_p a_p x_{i-p} + w_i.
    std::vector<double> coeffs;
    bool degenerate = false;
};

// Burg recursion. Requires x.size() > 2 * order. Constant windows are
// degenerate and yield a zero vector.
ArEstimate ar_coeffs(std::span<const double> x, int order);

// Step-down recursion from predictor coefficients (same sign convention as
// ArEstimate) to reflection coefficients. Empty when some |k| >= 1, that is
// when the predictor has a root on or outside the unit circle.
std::optional<std::vector<double>> reflection_coefficients(std::span<const double> ar);

bool is_stable(std::span<const double> ar);

struct FeatureProvenance {
    std::string participant;
    std::string gesture;
    int trial_index = 0;
    std::vector<int> channels;
    FeatureSpec feature_spec;
    WindowSpec window_spec;
};

struct FeatureMatrix {
    // One row per window; channel blocks concatenated in channel order.
    Eigen::MatrixXd rows;
    FeatureProvenance provenance;
    // Windows whose AR estimate was degenerate on at least one channel.
    int degenerate_windows = 0;

    Eigen::Index window_count() const { return rows.rows(); }
    Eigen::Index dim() const { return rows.cols(); }
};

FeatureMatrix extract_features(const TrialRecording& rec, const FeatureSpec& spec,
                               const WindowSpec& window, double sampling_rate_hz);

// Column block of channels [channel positions] out of a full-channel matrix;
// equal to extracting features from select_channels(rec, positions).
FeatureMatrix select_feature_channels(const FeatureMatrix& full, std::span<const int> positions);

// CSV with header participant,gesture,trial,window,f0..f{D-1}.
void write_feature_csv(std::span<const FeatureMatrix> matrices, const std::filesystem::path& file);

} // namespace emgauth
