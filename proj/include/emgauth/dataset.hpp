#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace emgauth {

enum class SampleFormat { Csv, F32le };

std::string to_string(SampleFormat format);
SampleFormat parse_sample_format(const std::string& text);

// The sixteen hand and wrist gestures of the reference protocol, in order.
const std::vector<std::string>& default_gesture_ids();

struct DatasetMeta {
    double sampling_rate_hz = 2048.0;
    std::vector<std::string> participant_ids;
    std::vector<std::string> gesture_ids;
    int trials_per_gesture = 7;
    int channel_count = 8;
    std::string signal_units = "mV";
    SampleFormat format = SampleFormat::F32le;

    // Throws ValidationError on a non-positive rate, fewer than two trials,
    // no channels, or duplicate identifiers.
    void validate() const;

    std::size_t participant_count() const { return participant_ids.size(); }
    std::size_t gesture_count() const { return gesture_ids.size(); }
};

struct TrialRecording {
    std::string participant;
    std::string gesture;
    int trial_index = 0;
    // n_samples x channel_count, column-major so each channel is contiguous.
    Eigen::MatrixXd samples;
    // Source column of every channel, relative to the recording as loaded.
    std::vector<int> channels;

    Eigen::Index sample_count() const { return samples.rows(); }
    Eigen::Index channel_count() const { return samples.cols(); }
};

// Differential pairs (proximal, distal) into the columns of a monopolar recording.
struct BipolarPairing {
    std::vector<std::pair<int, int>> pairs;

    // Two electrode rings of electrode_count/2 each: pair (i, i + electrode_count/2).
    static BipolarPairing two_rings(int electrode_count);

    void validate(int electrode_count) const;
};

// Trials are stored in canonical order: participant-major, then gesture, then
// trial index. A Dataset always holds every declared trial.
struct Dataset {
    DatasetMeta meta;
    std::vector<TrialRecording> trials;

    std::size_t index_of(std::size_t participant, std::size_t gesture, int trial) const;
    const TrialRecording& trial(std::size_t participant, std::size_t gesture, int trial) const;
};

struct SynthSpec {
    int users = 6;
    int gestures = 4;
    int trials = 7;
    int channels = 8;
    double duration_s = 5.0;
    double sampling_rate_hz = 2048.0;
    std::uint64_t seed = 42;
    double separation = 10.0;

    void validate() const;
};

struct ValidationIssue {
    enum class Kind { MissingTrial, Unreadable, ColumnMismatch, LengthOutlier, NonFinite };

    Kind kind;
    std::string participant;
    std::string gesture;
    int trial_index = -1;
    // Row and column of the first offending sample (NonFinite only).
    std::optional<Eigen::Index> sample_index;
    std::optional<Eigen::Index> channel;
    std::string message;
};

std::string to_string(ValidationIssue::Kind kind);

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool clean() const { return issues.empty(); }
};

// Result of a lenient load: whatever could be read plus the problems found.
struct DatasetScan {
    DatasetMeta meta;
    std::vector<TrialRecording> recordings;
    std::vector<ValidationIssue> issues;
};

DatasetMeta read_meta(const std::filesystem::path& root);
void write_meta(const DatasetMeta& meta, const std::filesystem::path& root);

std::filesystem::path trial_path(const std::filesystem::path& root, const DatasetMeta& meta,
                                 const std::string& participant, const std::string& gesture,
                                 int trial_index);

// Strict load: every declared trial must exist, match the channel count and
// contain only finite samples. An optional pairing.json is applied to every
// trial, after which meta.channel_count is the number of bipolar channels.
Dataset load_dataset(const std::filesystem::path& root);

// Lenient load for validation: missing or unreadable trials become issues
// instead of errors, and recordings with non-finite samples are kept.
DatasetScan scan_dataset(const std::filesystem::path& root);

std::optional<BipolarPairing> read_pairing(const std::filesystem::path& root);
void write_pairing(const BipolarPairing& pairing, const std::filesystem::path& root);

// Writes meta.json and one file per trial in meta.format.
void write_dataset(const Dataset& dataset, const std::filesystem::path& root);

TrialRecording read_trial(const std::filesystem::path& file, SampleFormat format,
                          int channel_count);
void write_trial(const TrialRecording& rec, const std::filesystem::path& file,
                 SampleFormat format);

TrialRecording derive_bipolar(const TrialRecording& monopolar, const BipolarPairing& pairing);

// channel_set must be non-empty and strictly increasing.
TrialRecording select_channels(const TrialRecording& rec, std::span<const int> channel_set);

Dataset synth_dataset(const SynthSpec& spec);

ValidationReport validate_dataset(const DatasetMeta& meta,
                                  std::span<const TrialRecording> recordings);

} // namespace emgauth
