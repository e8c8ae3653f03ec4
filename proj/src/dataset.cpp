#include "emgauth/dataset.hpp"

#include "emgauth/error.hpp"
#include "emgauth/features.hpp"
#include "emgauth/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace emgauth {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string read_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw DatasetError(file.string(), "cannot open file");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DatasetError(file.string(), "cannot open file for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw DatasetError(file.string(), "write failed");
    }
}

void append_double(std::string& out, double value) {
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    out.append(buffer, result.ptr);
}

std::string trial_label(const std::string& participant, const std::string& gesture, int trial) {
    return "participant=" + participant + " gesture=" + gesture +
           " trial=" + std::to_string(trial);
}

// Splits a line on commas without allocating per field.
std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view trim(std::string_view text) {
    while (!text.empty() && (text.back() == '\r' || text.back() == ' ' || text.back() == '\t')) {
        text.remove_suffix(1);
    }
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    return text;
}

TrialRecording read_csv_trial(const fs::path& file, int channel_count) {
    const std::string content = read_file(file);
    std::vector<double> values;
    std::size_t pos = 0;
    std::size_t line_number = 0;
    bool header_seen = false;

    while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string::npos) {
            end = content.size();
        }
        const std::string_view line = trim(std::string_view(content).substr(pos, end - pos));
        pos = end + 1;
        ++line_number;
        if (line.empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (!header_seen) {
            header_seen = true;
            if (static_cast<int>(fields.size()) != channel_count) {
                throw DatasetError(file.string(), "header has " + std::to_string(fields.size()) +
                                                      " columns, expected " +
                                                      std::to_string(channel_count));
            }
            for (int c = 0; c < channel_count; ++c) {
                if (trim(fields[c]) != "ch" + std::to_string(c)) {
                    throw DatasetError(file.string(), "header column " + std::to_string(c) +
                                                          " must be ch" + std::to_string(c));
                }
            }
            continue;
        }
        if (static_cast<int>(fields.size()) != channel_count) {
            throw DatasetError(file.string(), "line " + std::to_string(line_number) + " has " +
                                                  std::to_string(fields.size()) +
                                                  " columns, expected " +
                                                  std::to_string(channel_count));
        }
        for (const auto raw : fields) {
            const auto field = trim(raw);
            double value = 0.0;
            const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
            if (result.ec != std::errc() || result.ptr != field.data() + field.size()) {
                throw DatasetError(file.string(), "line " + std::to_string(line_number) +
                                                      ": cannot parse '" + std::string(field) +
                                                      "'");
            }
            values.push_back(value);
        }
    }
    if (!header_seen) {
        throw DatasetError(file.string(), "empty file");
    }

    TrialRecording rec;
    const Eigen::Index rows = static_cast<Eigen::Index>(values.size()) / channel_count;
    rec.samples.resize(rows, channel_count);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (int c = 0; c < channel_count; ++c) {
            rec.samples(r, c) = values[static_cast<std::size_t>(r * channel_count + c)];
        }
    }
    return rec;
}

TrialRecording read_f32_trial(const fs::path& file, int channel_count) {
    const std::string content = read_file(file);
    const std::size_t row_bytes = 4 * static_cast<std::size_t>(channel_count);
    if (content.size() % row_bytes != 0) {
        throw DatasetError(file.string(), "size " + std::to_string(content.size()) +
                                              " is not a multiple of 4 * " +
                                              std::to_string(channel_count) + " channels");
    }
    TrialRecording rec;
    const Eigen::Index rows = static_cast<Eigen::Index>(content.size() / row_bytes);
    rec.samples.resize(rows, channel_count);
    const char* data = content.data();
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (int c = 0; c < channel_count; ++c) {
            std::uint32_t bits = 0;
            std::memcpy(&bits, data, 4);
            data += 4;
            if constexpr (std::endian::native == std::endian::big) {
                bits = __builtin_bswap32(bits);
            }
            rec.samples(r, c) = static_cast<double>(std::bit_cast<float>(bits));
        }
    }
    return rec;
}

std::vector<int> iota_channels(Eigen::Index count) {
    std::vector<int> channels(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < channels.size(); ++i) {
        channels[i] = static_cast<int>(i);
    }
    return channels;
}

std::optional<std::pair<Eigen::Index, Eigen::Index>> first_non_finite(const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (!std::isfinite(m(r, c))) {
                return std::make_pair(r, c);
            }
        }
    }
    return std::nullopt;
}

// Independent, reproducible random stream for one (tag, a, b, c) entity.
std::mt19937_64 stream_for(std::uint64_t seed, std::uint32_t tag, std::uint32_t a,
                           std::uint32_t b = 0, std::uint32_t c = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      tag, a, b, c};
    return std::mt19937_64(seq);
}

struct PolePair {
    double radius = 0.0;
    double angle = 0.0;
};

constexpr int kSynthArOrder = 6;
constexpr int kSynthPolePairs = kSynthArOrder / 2;
constexpr int kSynthBurnIn = 512;
constexpr int kSynthMaxRedraws = 32;

std::array<PolePair, kSynthPolePairs> draw_poles(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> radius(0.55, 0.92);
    std::uniform_real_distribution<double> angle(0.04 * std::numbers::pi, 0.45 * std::numbers::pi);
    std::array<PolePair, kSynthPolePairs> poles;
    for (auto& pole : poles) {
        pole.radius = radius(rng);
        pole.angle = angle(rng);
    }
    return poles;
}

// Predictor coefficients a_1..a_6 whose characteristic polynomial has the given
// conjugate pole pairs.
std::vector<double> ar_from_poles(const std::array<PolePair, kSynthPolePairs>& poles) {
    std::vector<double> poly{1.0};
    for (const auto& pole : poles) {
        const double quad[3] = {1.0, -2.0 * pole.radius * std::cos(pole.angle),
                                pole.radius * pole.radius};
        std::vector<double> next(poly.size() + 2, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            for (int j = 0; j < 3; ++j) {
                next[i + static_cast<std::size_t>(j)] += poly[i] * quad[j];
            }
        }
        poly = std::move(next);
    }
    std::vector<double> ar(kSynthArOrder);
    for (int p = 0; p < kSynthArOrder; ++p) {
        ar[static_cast<std::size_t>(p)] = -poly[static_cast<std::size_t>(p) + 1];
    }
    return ar;
}

struct ClassSignature {
    std::vector<double> gains;  // per channel
    std::vector<double> ar;
    double innovation_sd = 1.0;  // yields unit process variance
};

} // namespace

std::string to_string(SampleFormat format) {
    return format == SampleFormat::Csv ? "csv" : "f32le";
}

SampleFormat parse_sample_format(const std::string& text) {
    if (text == "csv") {
        return SampleFormat::Csv;
    }
    if (text == "f32le" || text == "f32") {
        return SampleFormat::F32le;
    }
    throw ValidationError("unknown sample format '" + text + "' (expected csv or f32le)");
}

const std::vector<std::string>& default_gesture_ids() {
    static const std::vector<std::string> ids{"LP",   "TA",  "TLFO", "TIFO", "TLFE", "TIFE",
                                              "IMFE", "LFE", "IFE",  "TE",   "WF",   "WE",
                                              "FS",   "FP",  "HO",   "HC"};
    return ids;
}

void DatasetMeta::validate() const {
    if (!(sampling_rate_hz > 0.0) || !std::isfinite(sampling_rate_hz)) {
        throw ValidationError("sampling_rate_hz must be positive");
    }
    if (channel_count < 1) {
        throw ValidationError("channel count must be at least 1");
    }
    if (trials_per_gesture < 2) {
        throw ValidationError("trials_per_gesture must be at least 2 for leave-one-out");
    }
    if (participant_ids.empty() || gesture_ids.empty()) {
        throw ValidationError("participant and gesture lists must be non-empty");
    }
    const auto check_unique = [](const std::vector<std::string>& ids, const char* what) {
        std::set<std::string> seen;
        for (const auto& id : ids) {
            if (id.empty()) {
                throw ValidationError(std::string("empty ") + what + " identifier");
            }
            if (!seen.insert(id).second) {
                throw ValidationError(std::string("duplicate ") + what + " identifier '" + id +
                                      "'");
            }
        }
    };
    check_unique(participant_ids, "participant");
    check_unique(gesture_ids, "gesture");
}

BipolarPairing BipolarPairing::two_rings(int electrode_count) {
    if (electrode_count < 2 || electrode_count % 2 != 0) {
        throw ValidationError("two-ring pairing needs an even electrode count");
    }
    BipolarPairing pairing;
    const int half = electrode_count / 2;
    for (int i = 0; i < half; ++i) {
        pairing.pairs.emplace_back(i, i + half);
    }
    return pairing;
}

void BipolarPairing::validate(int electrode_count) const {
    if (pairs.empty()) {
        throw ValidationError("pairing has no pairs");
    }
    std::set<int> used;
    for (const auto& [proximal, distal] : pairs) {
        for (const int index : {proximal, distal}) {
            if (index < 0 || index >= electrode_count) {
                throw ValidationError("pairing electrode index " + std::to_string(index) +
                                      " out of range for " + std::to_string(electrode_count) +
                                      " electrodes");
            }
            if (!used.insert(index).second) {
                throw ValidationError("pairing reuses electrode " + std::to_string(index));
            }
        }
    }
}

std::size_t Dataset::index_of(std::size_t participant, std::size_t gesture, int trial) const {
    return (participant * meta.gesture_count() + gesture) *
               static_cast<std::size_t>(meta.trials_per_gesture) +
           static_cast<std::size_t>(trial);
}

const TrialRecording& Dataset::trial(std::size_t participant, std::size_t gesture,
                                     int trial) const {
    return trials.at(index_of(participant, gesture, trial));
}

void SynthSpec::validate() const {
    if (users < 1 || gestures < 1 || trials < 1 || channels < 1) {
        throw ValidationError("synthetic dataset counts must be at least 1");
    }
    if (!(duration_s > 0.0) || !(sampling_rate_hz > 0.0)) {
        throw ValidationError("duration and sampling rate must be positive");
    }
    if (!(separation >= 0.0) || !std::isfinite(separation)) {
        throw ValidationError("separation must be a finite value >= 0");
    }
    if (std::llround(duration_s * sampling_rate_hz) < 1) {
        throw ValidationError("duration is shorter than one sample");
    }
}

std::string to_string(ValidationIssue::Kind kind) {
    switch (kind) {
    case ValidationIssue::Kind::MissingTrial:
        return "missing-trial";
    case ValidationIssue::Kind::Unreadable:
        return "unreadable";
    case ValidationIssue::Kind::ColumnMismatch:
        return "column-mismatch";
    case ValidationIssue::Kind::LengthOutlier:
        return "length-outlier";
    case ValidationIssue::Kind::NonFinite:
        return "non-finite";
    }
    return "unknown";
}

DatasetMeta read_meta(const fs::path& root) {
    const fs::path file = root / "meta.json";
    const std::string text = read_file(file);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DatasetError(file.string(), std::string("corrupt metadata: ") + e.what());
    }
    const auto require = [&](const char* key) -> const json& {
        if (!doc.is_object() || !doc.contains(key)) {
            throw DatasetError(file.string(), std::string("missing key '") + key + "'");
        }
        return doc.at(key);
    };
    const auto string_list = [&](const char* key) {
        const json& value = require(key);
        if (!value.is_array()) {
            throw DatasetError(file.string(), std::string("'") + key + "' must be an array");
        }
        std::vector<std::string> out;
        for (const auto& item : value) {
            if (!item.is_string()) {
                throw DatasetError(file.string(),
                                   std::string("'") + key + "' must contain strings");
            }
            out.push_back(item.get<std::string>());
        }
        return out;
    };

    DatasetMeta meta;
    const json& rate = require("sampling_rate_hz");
    if (!rate.is_number()) {
        throw DatasetError(file.string(), "'sampling_rate_hz' must be a number");
    }
    meta.sampling_rate_hz = rate.get<double>();
    meta.participant_ids = string_list("participants");
    meta.gesture_ids = string_list("gestures");
    const json& trials = require("trials_per_gesture");
    const json& channels = require("channels");
    if (!trials.is_number_integer() || !channels.is_number_integer()) {
        throw DatasetError(file.string(), "'trials_per_gesture' and 'channels' must be integers");
    }
    meta.trials_per_gesture = trials.get<int>();
    meta.channel_count = channels.get<int>();
    if (doc.contains("units")) {
        if (!doc.at("units").is_string()) {
            throw DatasetError(file.string(), "'units' must be a string");
        }
        meta.signal_units = doc.at("units").get<std::string>();
    }
    const json& format = require("format");
    if (!format.is_string()) {
        throw DatasetError(file.string(), "'format' must be a string");
    }
    try {
        meta.format = parse_sample_format(format.get<std::string>());
        meta.validate();
    } catch (const ValidationError& e) {
        throw DatasetError(file.string(), e.what());
    }
    return meta;
}

void write_meta(const DatasetMeta& meta, const fs::path& root) {
    json doc;
    doc["sampling_rate_hz"] = meta.sampling_rate_hz;
    doc["participants"] = meta.participant_ids;
    doc["gestures"] = meta.gesture_ids;
    doc["trials_per_gesture"] = meta.trials_per_gesture;
    doc["channels"] = meta.channel_count;
    doc["units"] = meta.signal_units;
    doc["format"] = to_string(meta.format);
    fs::create_directories(root);
    write_file(root / "meta.json", doc.dump(2) + "\n");
}

fs::path trial_path(const fs::path& root, const DatasetMeta& meta, const std::string& participant,
                    const std::string& gesture, int trial_index) {
    const char* extension = meta.format == SampleFormat::Csv ? ".csv" : ".f32";
    return root / "data" / participant / gesture / (std::to_string(trial_index) + extension);
}

TrialRecording read_trial(const fs::path& file, SampleFormat format, int channel_count) {
    TrialRecording rec = format == SampleFormat::Csv ? read_csv_trial(file, channel_count)
                                                     : read_f32_trial(file, channel_count);
    rec.channels = iota_channels(rec.channel_count());
    return rec;
}

void write_trial(const TrialRecording& rec, const fs::path& file, SampleFormat format) {
    fs::create_directories(file.parent_path());
    std::string out;
    const Eigen::Index rows = rec.sample_count();
    const Eigen::Index cols = rec.channel_count();
    if (format == SampleFormat::Csv) {
        out.reserve(static_cast<std::size_t>(rows * cols) * 12 + 64);
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (c > 0) {
                out.push_back(',');
            }
            out += "ch" + std::to_string(c);
        }
        out.push_back('\n');
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                if (c > 0) {
                    out.push_back(',');
                }
                append_double(out, rec.samples(r, c));
            }
            out.push_back('\n');
        }
    } else {
        out.resize(static_cast<std::size_t>(rows * cols) * 4);
        char* data = out.data();
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(rec.samples(r, c)));
                if constexpr (std::endian::native == std::endian::big) {
                    bits = __builtin_bswap32(bits);
                }
                std::memcpy(data, &bits, 4);
                data += 4;
            }
        }
    }
    write_file(file, out);
}

std::optional<BipolarPairing> read_pairing(const fs::path& root) {
    const fs::path file = root / "pairing.json";
    if (!fs::exists(file)) {
        return std::nullopt;
    }
    json doc;
    try {
        doc = json::parse(read_file(file));
    } catch (const json::parse_error& e) {
        throw DatasetError(file.string(), std::string("corrupt pairing: ") + e.what());
    }
    if (!doc.is_array()) {
        throw DatasetError(file.string(), "pairing must be an array of [proximal, distal] pairs");
    }
    BipolarPairing pairing;
    for (const auto& item : doc) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_number_integer() ||
            !item[1].is_number_integer()) {
            throw DatasetError(file.string(), "each pair must be [proximal, distal] integers");
        }
        pairing.pairs.emplace_back(item[0].get<int>(), item[1].get<int>());
    }
    return pairing;
}

void write_pairing(const BipolarPairing& pairing, const fs::path& root) {
    json doc = json::array();
    for (const auto& [proximal, distal] : pairing.pairs) {
        doc.push_back({proximal, distal});
    }
    fs::create_directories(root);
    write_file(root / "pairing.json", doc.dump() + "\n");
}

Dataset load_dataset(const fs::path& root) {
    Dataset dataset;
    dataset.meta = read_meta(root);
    const DatasetMeta& meta = dataset.meta;
    const auto pairing = read_pairing(root);
    if (pairing) {
        try {
            pairing->validate(meta.channel_count);
        } catch (const ValidationError& e) {
            throw DatasetError((root / "pairing.json").string(), e.what());
        }
    }

    dataset.trials.resize(meta.participant_count() * meta.gesture_count() *
                          static_cast<std::size_t>(meta.trials_per_gesture));
    parallel_for(dataset.trials.size(), [&](std::size_t index) {
        const std::size_t per_participant =
            meta.gesture_count() * static_cast<std::size_t>(meta.trials_per_gesture);
        const std::size_t p = index / per_participant;
        const std::size_t g = (index % per_participant) / static_cast<std::size_t>(meta.trials_per_gesture);
        const int t = static_cast<int>(index % static_cast<std::size_t>(meta.trials_per_gesture));
        const std::string& participant = meta.participant_ids[p];
        const std::string& gesture = meta.gesture_ids[g];
        const fs::path file = trial_path(root, meta, participant, gesture, t);
        if (!fs::exists(file)) {
            throw DatasetError(file.string(),
                               "missing trial " + trial_label(participant, gesture, t));
        }
        TrialRecording rec = read_trial(file, meta.format, meta.channel_count);
        if (const auto bad = first_non_finite(rec.samples)) {
            throw DatasetError(file.string(), "non-finite sample at row " +
                                                  std::to_string(bad->first) + ", channel " +
                                                  std::to_string(bad->second));
        }
        rec.participant = participant;
        rec.gesture = gesture;
        rec.trial_index = t;
        if (pairing) {
            rec = derive_bipolar(rec, *pairing);
            rec.channels = iota_channels(rec.channel_count());
        }
        dataset.trials[index] = std::move(rec);
    });
    if (pairing) {
        dataset.meta.channel_count = static_cast<int>(pairing->pairs.size());
    }
    return dataset;
}

DatasetScan scan_dataset(const fs::path& root) {
    DatasetScan scan;
    scan.meta = read_meta(root);
    const DatasetMeta& meta = scan.meta;
    std::optional<BipolarPairing> pairing;
    try {
        pairing = read_pairing(root);
        if (pairing) {
            pairing->validate(meta.channel_count);
        }
    } catch (const ValidationError& e) {
        scan.issues.push_back({ValidationIssue::Kind::Unreadable, "", "", -1, std::nullopt,
                               std::nullopt, std::string("pairing.json: ") + e.what()});
        pairing.reset();
    }

    for (const auto& participant : meta.participant_ids) {
        for (const auto& gesture : meta.gesture_ids) {
            for (int t = 0; t < meta.trials_per_gesture; ++t) {
                const fs::path file = trial_path(root, meta, participant, gesture, t);
                if (!fs::exists(file)) {
                    continue;  // reported by validate_dataset
                }
                try {
                    TrialRecording rec = read_trial(file, meta.format, meta.channel_count);
                    rec.participant = participant;
                    rec.gesture = gesture;
                    rec.trial_index = t;
                    if (pairing) {
                        rec = derive_bipolar(rec, *pairing);
                        rec.channels = iota_channels(rec.channel_count());
                    }
                    scan.recordings.push_back(std::move(rec));
                } catch (const DatasetError& e) {
                    scan.issues.push_back({ValidationIssue::Kind::Unreadable, participant, gesture,
                                           t, std::nullopt, std::nullopt, e.what()});
                }
            }
        }
    }
    if (pairing) {
        scan.meta.channel_count = static_cast<int>(pairing->pairs.size());
    }
    return scan;
}

void write_dataset(const Dataset& dataset, const fs::path& root) {
    dataset.meta.validate();
    write_meta(dataset.meta, root);
    for (const auto& rec : dataset.trials) {
        write_trial(rec, trial_path(root, dataset.meta, rec.participant, rec.gesture, rec.trial_index),
                    dataset.meta.format);
    }
}

TrialRecording derive_bipolar(const TrialRecording& monopolar, const BipolarPairing& pairing) {
    pairing.validate(static_cast<int>(monopolar.channel_count()));
    TrialRecording out;
    out.participant = monopolar.participant;
    out.gesture = monopolar.gesture;
    out.trial_index = monopolar.trial_index;
    out.samples.resize(monopolar.sample_count(), static_cast<Eigen::Index>(pairing.pairs.size()));
    for (std::size_t k = 0; k < pairing.pairs.size(); ++k) {
        const auto [proximal, distal] = pairing.pairs[k];
        out.samples.col(static_cast<Eigen::Index>(k)) =
            monopolar.samples.col(proximal) - monopolar.samples.col(distal);
    }
    out.channels = iota_channels(out.channel_count());
    return out;
}

TrialRecording select_channels(const TrialRecording& rec, std::span<const int> channel_set) {
    if (channel_set.empty()) {
        throw ValidationError("channel set is empty");
    }
    for (std::size_t i = 0; i < channel_set.size(); ++i) {
        if (channel_set[i] < 0 || channel_set[i] >= rec.channel_count()) {
            throw ValidationError("channel " + std::to_string(channel_set[i]) +
                                  " out of range for " + std::to_string(rec.channel_count()) +
                                  " channels");
        }
        if (i > 0 && channel_set[i] <= channel_set[i - 1]) {
            throw ValidationError("channel set must be strictly increasing");
        }
    }
    TrialRecording out;
    out.participant = rec.participant;
    out.gesture = rec.gesture;
    out.trial_index = rec.trial_index;
    out.samples.resize(rec.sample_count(), static_cast<Eigen::Index>(channel_set.size()));
    for (std::size_t k = 0; k < channel_set.size(); ++k) {
        out.samples.col(static_cast<Eigen::Index>(k)) = rec.samples.col(channel_set[k]);
        out.channels.push_back(rec.channels.empty() ? channel_set[k]
                                                    : rec.channels[static_cast<std::size_t>(channel_set[k])]);
    }
    return out;
}

Dataset synth_dataset(const SynthSpec& spec) {
    spec.validate();
    const double mix = spec.separation / (1.0 + spec.separation);
    const double trial_jitter = 0.1 / (1.0 + spec.separation);
    const auto users = static_cast<std::size_t>(spec.users);
    const auto gestures = static_cast<std::size_t>(spec.gestures);
    const auto channels = static_cast<std::size_t>(spec.channels);

    Dataset dataset;
    DatasetMeta& meta = dataset.meta;
    meta.sampling_rate_hz = spec.sampling_rate_hz;
    meta.trials_per_gesture = spec.trials;
    meta.channel_count = spec.channels;
    meta.signal_units = "mV";
    meta.format = SampleFormat::F32le;
    for (int u = 0; u < spec.users; ++u) {
        char id[16];
        std::snprintf(id, sizeof(id), "P%02d", u + 1);
        meta.participant_ids.emplace_back(id);
    }
    for (int g = 0; g < spec.gestures; ++g) {
        if (spec.gestures <= static_cast<int>(default_gesture_ids().size())) {
            meta.gesture_ids.push_back(default_gesture_ids()[static_cast<std::size_t>(g)]);
        } else {
            char id[16];
            std::snprintf(id, sizeof(id), "G%02d", g + 1);
            meta.gesture_ids.emplace_back(id);
        }
    }

    // Gesture-level signature shared by all users: log2 gain in [-1, 1] per
    // channel and a pole layout for the AR spectrum.
    std::vector<std::vector<double>> base_gain(gestures);
    std::vector<std::array<PolePair, kSynthPolePairs>> base_poles(gestures);
    for (std::size_t g = 0; g < gestures; ++g) {
        auto rng = stream_for(spec.seed, 1, static_cast<std::uint32_t>(g));
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        for (std::size_t c = 0; c < channels; ++c) {
            base_gain[g].push_back(unit(rng));
        }
        base_poles[g] = draw_poles(rng);
    }

    // Users sit at evenly spread levels in [-1, 1]; mix blends the user-specific
    // part in, so separation 0 leaves every user identically distributed.
    std::vector<ClassSignature> signatures(users * gestures);
    for (std::size_t u = 0; u < users; ++u) {
        const double level =
            users > 1 ? 2.0 * static_cast<double>(u) / static_cast<double>(users - 1) - 1.0 : 0.0;
        for (std::size_t g = 0; g < gestures; ++g) {
            auto rng = stream_for(spec.seed, 2, static_cast<std::uint32_t>(u),
                                  static_cast<std::uint32_t>(g));
            std::uniform_real_distribution<double> unit(-1.0, 1.0);
            ClassSignature& sig = signatures[u * gestures + g];
            for (std::size_t c = 0; c < channels; ++c) {
                const double user_part = 0.8 * level + 0.2 * unit(rng);
                sig.gains.push_back(std::exp2((1.0 - mix) * base_gain[g][c] + mix * user_part));
            }
            std::optional<std::vector<double>> reflection;
            for (int attempt = 0; attempt < kSynthMaxRedraws && !reflection; ++attempt) {
                const auto user_poles = draw_poles(rng);
                std::array<PolePair, kSynthPolePairs> poles;
                for (int k = 0; k < kSynthPolePairs; ++k) {
                    poles[k].radius = (1.0 - mix) * base_poles[g][k].radius + mix * user_poles[k].radius;
                    poles[k].angle = (1.0 - mix) * base_poles[g][k].angle + mix * user_poles[k].angle;
                }
                sig.ar = ar_from_poles(poles);
                reflection = reflection_coefficients(sig.ar);
            }
            if (!reflection) {
                throw ComputationError("could not draw a stable AR signature after " +
                                       std::to_string(kSynthMaxRedraws) + " attempts");
            }
            double variance_ratio = 1.0;
            for (const double k : *reflection) {
                variance_ratio *= 1.0 - k * k;
            }
            sig.innovation_sd = std::sqrt(variance_ratio);
        }
    }

    const Eigen::Index n_samples = std::llround(spec.duration_s * spec.sampling_rate_hz);
    const auto trials = static_cast<std::size_t>(spec.trials);
    dataset.trials.resize(users * gestures * trials);
    parallel_for(dataset.trials.size(), [&](std::size_t index) {
        const std::size_t u = index / (gestures * trials);
        const std::size_t g = (index / trials) % gestures;
        const std::size_t t = index % trials;
        const ClassSignature& sig = signatures[u * gestures + g];
        auto rng = stream_for(spec.seed, 3, static_cast<std::uint32_t>(u),
                              static_cast<std::uint32_t>(g), static_cast<std::uint32_t>(t));
        std::normal_distribution<double> normal(0.0, 1.0);

        TrialRecording rec;
        rec.participant = meta.participant_ids[u];
        rec.gesture = meta.gesture_ids[g];
        rec.trial_index = static_cast<int>(t);
        rec.samples.resize(n_samples, spec.channels);
        rec.channels = iota_channels(spec.channels);
        std::vector<double> history(kSynthArOrder, 0.0);  // history[0] = x_{i-1}
        for (std::size_t c = 0; c < channels; ++c) {
            const double gain = sig.gains[c] * std::exp(trial_jitter * normal(rng));
            std::fill(history.begin(), history.end(), 0.0);
            for (Eigen::Index i = -kSynthBurnIn; i < n_samples; ++i) {
                double x = sig.innovation_sd * normal(rng);
                for (int p = 0; p < kSynthArOrder; ++p) {
                    x += sig.ar[static_cast<std::size_t>(p)] * history[static_cast<std::size_t>(p)];
                }
                std::copy_backward(history.begin(), history.end() - 1, history.end());
                history[0] = x;
                if (i >= 0) {
                    // Quantized to single precision, as an f32 recording would be.
                    rec.samples(i, static_cast<Eigen::Index>(c)) =
                        static_cast<double>(static_cast<float>(gain * x));
                }
            }
        }
        dataset.trials[index] = std::move(rec);
    });
    return dataset;
}

ValidationReport validate_dataset(const DatasetMeta& meta,
                                  std::span<const TrialRecording> recordings) {
    ValidationReport report;
    std::set<std::tuple<std::string, std::string, int>> present;
    for (const auto& rec : recordings) {
        present.emplace(rec.participant, rec.gesture, rec.trial_index);
    }
    for (const auto& participant : meta.participant_ids) {
        for (const auto& gesture : meta.gesture_ids) {
            for (int t = 0; t < meta.trials_per_gesture; ++t) {
                if (!present.count({participant, gesture, t})) {
                    report.issues.push_back({ValidationIssue::Kind::MissingTrial, participant,
                                             gesture, t, std::nullopt, std::nullopt,
                                             "missing trial " + trial_label(participant, gesture, t)});
                }
            }
        }
    }

    std::vector<Eigen::Index> lengths;
    for (const auto& rec : recordings) {
        lengths.push_back(rec.sample_count());
    }
    double median_length = 0.0;
    if (!lengths.empty()) {
        std::vector<Eigen::Index> sorted = lengths;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t mid = sorted.size() / 2;
        median_length = sorted.size() % 2 == 1
                            ? static_cast<double>(sorted[mid])
                            : 0.5 * static_cast<double>(sorted[mid - 1] + sorted[mid]);
    }

    for (const auto& rec : recordings) {
        const std::string label = trial_label(rec.participant, rec.gesture, rec.trial_index);
        if (rec.channel_count() != meta.channel_count) {
            report.issues.push_back({ValidationIssue::Kind::ColumnMismatch, rec.participant,
                                     rec.gesture, rec.trial_index, std::nullopt, std::nullopt,
                                     label + ": " + std::to_string(rec.channel_count()) +
                                         " channels, expected " +
                                         std::to_string(meta.channel_count)});
        }
        const double length = static_cast<double>(rec.sample_count());
        if (std::abs(length - median_length) > 0.2 * median_length) {
            report.issues.push_back({ValidationIssue::Kind::LengthOutlier, rec.participant,
                                     rec.gesture, rec.trial_index, std::nullopt, std::nullopt,
                                     label + ": " + std::to_string(rec.sample_count()) +
                                         " samples, median " + std::to_string(median_length)});
        }
        if (const auto bad = first_non_finite(rec.samples)) {
            report.issues.push_back({ValidationIssue::Kind::NonFinite, rec.participant,
                                     rec.gesture, rec.trial_index, bad->first, bad->second,
                                     label + ": non-finite sample at index " +
                                         std::to_string(bad->first) + ", channel " +
                                         std::to_string(bad->second)});
        }
    }
    return report;
}

} // namespace emgauth
