#include "emgauth/features.hpp"

#include "emgauth/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <mutex>

namespace emgauth {
namespace {

// FFTW planning is not thread-safe; execution with new arrays is. Plans are
// made with FFTW_ESTIMATE so the chosen algorithm, and therefore every output
// bit, is the same on every run.
class RealDftPlans {
public:
    ~RealDftPlans() {
        for (auto& [size, plan] : plans_) {
            fftw_destroy_plan(plan);
        }
    }

    fftw_plan get(int size) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(size);
        if (it != plans_.end()) {
            return it->second;
        }
        std::vector<double> in(static_cast<std::size_t>(size));
        std::vector<std::complex<double>> out(static_cast<std::size_t>(size / 2 + 1));
        fftw_plan plan = fftw_plan_dft_r2c_1d(size, in.data(),
                                              reinterpret_cast<fftw_complex*>(out.data()),
                                              FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr) {
            throw ComputationError("FFTW could not plan a DFT of size " + std::to_string(size));
        }
        plans_.emplace(size, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<int, fftw_plan> plans_;
};

RealDftPlans& dft_plans() {
    static RealDftPlans plans;
    return plans;
}

void check_band_layout(std::span<const Band> bands, double sampling_rate_hz) {
    if (bands.empty()) {
        throw ValidationError("FDT needs at least one band");
    }
    const double nyquist = sampling_rate_hz / 2.0;
    for (std::size_t i = 0; i < bands.size(); ++i) {
        const Band& band = bands[i];
        if (!(band.low_hz >= 0.0) || !(band.high_hz > band.low_hz) || band.high_hz > nyquist) {
            throw ValidationError("FDT band [" + std::to_string(band.low_hz) + ", " +
                                  std::to_string(band.high_hz) +
                                  ") is empty or outside the Nyquist range (0, " +
                                  std::to_string(nyquist) + ")");
        }
        if (i > 0 && band.low_hz < bands[i - 1].high_hz) {
            throw ValidationError("FDT bands must be ascending and non-overlapping");
        }
    }
}

bool has_td(FeatureKind kind) {
    return kind == FeatureKind::TD || kind == FeatureKind::TD_FDT || kind == FeatureKind::TD_AR;
}

bool has_fdt(FeatureKind kind) {
    return kind == FeatureKind::FDT || kind == FeatureKind::TD_FDT;
}

bool has_ar(FeatureKind kind) {
    return kind == FeatureKind::AR || kind == FeatureKind::TD_AR;
}

} // namespace

Eigen::Index WindowSpec::window_samples(double sampling_rate_hz) const {
    return static_cast<Eigen::Index>(std::llround(window_len_ms * sampling_rate_hz / 1000.0));
}

Eigen::Index WindowSpec::step_samples(double sampling_rate_hz) const {
    return static_cast<Eigen::Index>(std::llround(step_ms * sampling_rate_hz / 1000.0));
}

void WindowSpec::validate(double sampling_rate_hz) const {
    if (!(window_len_ms > 0.0) || !(step_ms > 0.0)) {
        throw ValidationError("window length and step must be positive");
    }
    if (window_len_ms < step_ms) {
        throw ValidationError("window length must be at least the step");
    }
    if (window_samples(sampling_rate_hz) < 1 || step_samples(sampling_rate_hz) < 1) {
        throw ValidationError("window and step must each span at least one sample");
    }
}

WindowLayout window_layout(Eigen::Index n_samples, const WindowSpec& spec,
                           double sampling_rate_hz) {
    spec.validate(sampling_rate_hz);
    WindowLayout layout;
    layout.length = spec.window_samples(sampling_rate_hz);
    layout.step = spec.step_samples(sampling_rate_hz);
    if (n_samples < layout.length) {
        throw ValidationError("recording of " + std::to_string(n_samples) +
                              " samples is shorter than one window of " +
                              std::to_string(layout.length));
    }
    layout.count = (n_samples - layout.length) / layout.step + 1;
    return layout;
}

std::vector<Eigen::Block<const Eigen::MatrixXd>> window_signal(const TrialRecording& rec,
                                                               const WindowSpec& spec,
                                                               double sampling_rate_hz) {
    const WindowLayout layout = window_layout(rec.sample_count(), spec, sampling_rate_hz);
    std::vector<Eigen::Block<const Eigen::MatrixXd>> windows;
    windows.reserve(static_cast<std::size_t>(layout.count));
    for (Eigen::Index k = 0; k < layout.count; ++k) {
        windows.push_back(rec.samples.middleRows(layout.begin(k), layout.length));
    }
    return windows;
}

std::string to_string(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::TD:
        return "td";
    case FeatureKind::FDT:
        return "fdt";
    case FeatureKind::AR:
        return "ar";
    case FeatureKind::TD_FDT:
        return "td+fdt";
    case FeatureKind::TD_AR:
        return "td+ar";
    }
    return "unknown";
}

FeatureKind parse_feature_kind(const std::string& text) {
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::replace(lower.begin(), lower.end(), '_', '+');
    for (const FeatureKind kind : {FeatureKind::TD, FeatureKind::FDT, FeatureKind::AR,
                                   FeatureKind::TD_FDT, FeatureKind::TD_AR}) {
        if (lower == to_string(kind)) {
            return kind;
        }
    }
    throw ValidationError("unknown feature set '" + text +
                          "' (expected td, fdt, ar, td+fdt or td+ar)");
}

std::string to_string(AmplitudeStat stat) { return stat == AmplitudeStat::MAV ? "mav" : "rms"; }

AmplitudeStat parse_amplitude_stat(const std::string& text) {
    if (text == "mav") {
        return AmplitudeStat::MAV;
    }
    if (text == "rms") {
        return AmplitudeStat::RMS;
    }
    throw ValidationError("unknown amplitude statistic '" + text + "' (expected mav or rms)");
}

std::vector<Band> equal_bands(int count, double low_hz, double high_hz) {
    if (count < 1 || !(high_hz > low_hz)) {
        throw ValidationError("equal_bands needs count >= 1 and high > low");
    }
    std::vector<Band> bands;
    const double width = (high_hz - low_hz) / count;
    for (int i = 0; i < count; ++i) {
        const double low = low_hz + width * i;
        const double high = i + 1 == count ? high_hz : low_hz + width * (i + 1);
        bands.push_back({low, high});
    }
    return bands;
}

int FeatureSpec::per_channel_dim() const {
    int dim = 0;
    if (has_td(kind)) {
        dim += 4;
    }
    if (has_fdt(kind)) {
        dim += static_cast<int>(fdt_bands.size());
    }
    if (has_ar(kind)) {
        dim += ar_order;
    }
    return dim;
}

void FeatureSpec::validate(double sampling_rate_hz, Eigen::Index window_samples) const {
    if (!(td_threshold >= 0.0)) {
        throw ValidationError("TD threshold must be >= 0");
    }
    if (has_td(kind) && window_samples < 3) {
        throw ValidationError("TD features need windows of at least 3 samples");
    }
    if (has_fdt(kind)) {
        check_band_layout(fdt_bands, sampling_rate_hz);
        if (!(fdt_floor > 0.0)) {
            throw ValidationError("FDT floor must be positive");
        }
    }
    if (has_ar(kind)) {
        if (ar_order < 1) {
            throw ValidationError("AR order must be positive");
        }
        if (window_samples <= 2 * static_cast<Eigen::Index>(ar_order)) {
            throw ValidationError("AR order " + std::to_string(ar_order) +
                                  " needs windows longer than " + std::to_string(2 * ar_order) +
                                  " samples");
        }
    }
}

double mav(std::span<const double> x) {
    double sum = 0.0;
    for (const double v : x) {
        sum += std::abs(v);
    }
    return sum / static_cast<double>(x.size());
}

double rms(std::span<const double> x) {
    double sum = 0.0;
    for (const double v : x) {
        sum += v * v;
    }
    return std::sqrt(sum / static_cast<double>(x.size()));
}

int ssc(std::span<const double> x, double threshold) {
    int count = 0;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        if ((x[i] - x[i - 1]) * (x[i] - x[i + 1]) >= threshold) {
            ++count;
        }
    }
    return count;
}

double wl(std::span<const double> x) {
    double sum = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        sum += std::abs(x[i] - x[i - 1]);
    }
    return sum;
}

int zc(std::span<const double> x, double threshold) {
    int count = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        if (x[i] * x[i + 1] < 0.0 && std::abs(x[i] - x[i + 1]) >= threshold) {
            ++count;
        }
    }
    return count;
}

std::vector<double> fdt(std::span<const double> x, std::span<const Band> bands, double floor,
                        double sampling_rate_hz) {
    check_band_layout(bands, sampling_rate_hz);
    if (x.empty()) {
        throw ValidationError("FDT of an empty window");
    }
    const int n = static_cast<int>(x.size());
    thread_local std::vector<double> in;
    thread_local std::vector<std::complex<double>> out;
    in.assign(x.begin(), x.end());
    out.resize(static_cast<std::size_t>(n / 2 + 1));
    fftw_execute_dft_r2c(dft_plans().get(n), in.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));

    const double bin_hz = sampling_rate_hz / n;
    std::vector<double> result;
    result.reserve(bands.size());
    for (const Band& band : bands) {
        double sum = 0.0;
        const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(band.low_hz / bin_hz)));
        for (std::size_t k = first; k < out.size(); ++k) {
            const double f = static_cast<double>(k) * bin_hz;
            if (f < band.low_hz) {
                continue;
            }
            if (f >= band.high_hz) {
                break;
            }
            sum += std::abs(out[k]);
        }
        result.push_back(std::log(floor + sum));
    }
    return result;
}

ArEstimate ar_coeffs(std::span<const double> x, int order) {
    if (order < 1) {
        throw ValidationError("AR order must be positive");
    }
    if (x.size() <= 2 * static_cast<std::size_t>(order)) {
        throw ValidationError("AR order " + std::to_string(order) + " needs more than " +
                              std::to_string(2 * order) + " samples");
    }
    ArEstimate estimate;
    estimate.coeffs.assign(static_cast<std::size_t>(order), 0.0);
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) {
        estimate.degenerate = true;
        return estimate;
    }

    const std::size_t n = x.size();
    std::vector<double> forward(x.begin(), x.end());
    std::vector<double> backward(x.begin(), x.end());
    // Prediction-error filter 1 + c_1 z^-1 + ... ; a_p = -c_p.
    std::vector<double> filter(static_cast<std::size_t>(order) + 1, 0.0);
    filter[0] = 1.0;

    for (std::size_t m = 0; m < static_cast<std::size_t>(order); ++m) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = m + 1; i < n; ++i) {
            num += forward[i] * backward[i - 1];
            den += forward[i] * forward[i] + backward[i - 1] * backward[i - 1];
        }
        if (den <= 0.0) {
            break;  // perfectly predicted; higher-order terms stay zero
        }
        const double k = -2.0 * num / den;

        for (std::size_t i = n - 1; i > m; --i) {
            const double f = forward[i];
            forward[i] = f + k * backward[i - 1];
            backward[i] = backward[i - 1] + k * f;
        }
        const std::size_t next = m + 1;
        std::vector<double> updated(filter);
        for (std::size_t j = 1; j <= next; ++j) {
            updated[j] = filter[j] + k * filter[next - j];
        }
        filter = std::move(updated);
    }

    for (std::size_t p = 0; p < static_cast<std::size_t>(order); ++p) {
        estimate.coeffs[p] = -filter[p + 1];
    }
    return estimate;
}

std::optional<std::vector<double>> reflection_coefficients(std::span<const double> ar) {
    const std::size_t order = ar.size();
    std::vector<double> c(order + 1);
    c[0] = 1.0;
    for (std::size_t p = 0; p < order; ++p) {
        c[p + 1] = -ar[p];
    }
    std::vector<double> k(order);
    for (std::size_t m = order; m >= 1; --m) {
        const double km = c[m];
        if (!(std::abs(km) < 1.0)) {
            return std::nullopt;
        }
        k[m - 1] = km;
        const double scale = 1.0 - km * km;
        std::vector<double> lower(m);
        lower[0] = 1.0;
        for (std::size_t j = 1; j < m; ++j) {
            lower[j] = (c[j] - km * c[m - j]) / scale;
        }
        c.assign(lower.begin(), lower.end());
    }
    return k;
}

bool is_stable(std::span<const double> ar) { return reflection_coefficients(ar).has_value(); }

FeatureMatrix extract_features(const TrialRecording& rec, const FeatureSpec& spec,
                               const WindowSpec& window, double sampling_rate_hz) {
    const WindowLayout layout = window_layout(rec.sample_count(), window, sampling_rate_hz);
    spec.validate(sampling_rate_hz, layout.length);

    const Eigen::Index channels = rec.channel_count();
    const int block = spec.per_channel_dim();
    FeatureMatrix out;
    out.rows.resize(layout.count, block * channels);
    out.provenance = {rec.participant, rec.gesture, rec.trial_index, rec.channels, spec, window};
    if (out.provenance.channels.empty()) {
        for (Eigen::Index c = 0; c < channels; ++c) {
            out.provenance.channels.push_back(static_cast<int>(c));
        }
    }

    for (Eigen::Index k = 0; k < layout.count; ++k) {
        bool degenerate = false;
        for (Eigen::Index c = 0; c < channels; ++c) {
            const double* column = rec.samples.col(c).data();
            const std::span<const double> x(column + layout.begin(k),
                                            static_cast<std::size_t>(layout.length));
            Eigen::Index col = c * block;
            if (has_td(spec.kind)) {
                out.rows(k, col++) = spec.td_stat == AmplitudeStat::MAV ? mav(x) : rms(x);
                out.rows(k, col++) = zc(x, spec.td_threshold);
                out.rows(k, col++) = ssc(x, spec.td_threshold);
                out.rows(k, col++) = wl(x);
            }
            if (has_fdt(spec.kind)) {
                for (const double v : fdt(x, spec.fdt_bands, spec.fdt_floor, sampling_rate_hz)) {
                    out.rows(k, col++) = v;
                }
            }
            if (has_ar(spec.kind)) {
                const ArEstimate ar = ar_coeffs(x, spec.ar_order);
                degenerate = degenerate || ar.degenerate;
                for (const double v : ar.coeffs) {
                    out.rows(k, col++) = v;
                }
            }
        }
        if (degenerate) {
            ++out.degenerate_windows;
        }
    }
    return out;
}

FeatureMatrix select_feature_channels(const FeatureMatrix& full, std::span<const int> positions) {
    const int block = full.provenance.feature_spec.per_channel_dim();
    const auto channels = static_cast<Eigen::Index>(full.provenance.channels.size());
    if (positions.empty()) {
        throw ValidationError("channel set is empty");
    }
    FeatureMatrix out;
    out.provenance = full.provenance;
    out.provenance.channels.clear();
    out.degenerate_windows = full.degenerate_windows;
    out.rows.resize(full.rows.rows(), block * static_cast<Eigen::Index>(positions.size()));
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const int pos = positions[i];
        if (pos < 0 || pos >= channels) {
            throw ValidationError("channel " + std::to_string(pos) + " out of range for " +
                                  std::to_string(channels) + " channels");
        }
        if (i > 0 && pos <= positions[i - 1]) {
            throw ValidationError("channel set must be strictly increasing");
        }
        out.rows.middleCols(static_cast<Eigen::Index>(i) * block, block) =
            full.rows.middleCols(static_cast<Eigen::Index>(pos) * block, block);
        out.provenance.channels.push_back(full.provenance.channels[static_cast<std::size_t>(pos)]);
    }
    return out;
}

void write_feature_csv(std::span<const FeatureMatrix> matrices, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw ValidationError("cannot write " + file.string());
    }
    const Eigen::Index dim = matrices.empty() ? 0 : matrices.front().dim();
    out << "participant,gesture,trial,window";
    for (Eigen::Index d = 0; d < dim; ++d) {
        out << ",f" << d;
    }
    out << '\n';
    out.precision(17);
    for (const auto& m : matrices) {
        for (Eigen::Index r = 0; r < m.rows.rows(); ++r) {
            out << m.provenance.participant << ',' << m.provenance.gesture << ','
                << m.provenance.trial_index << ',' << r;
            for (Eigen::Index d = 0; d < m.rows.cols(); ++d) {
                out << ',' << m.rows(r, d);
            }
            out << '\n';
        }
    }
}

} // namespace emgauth
