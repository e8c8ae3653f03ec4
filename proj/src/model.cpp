#include "emgauth/model.hpp"

#include "emgauth/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

namespace emgauth {
namespace {

constexpr char kModelMagic[8] = {'E', 'M', 'G', 'A', 'M', 'D', 'L', '1'};
constexpr std::uint32_t kModelVersion = 1;

void factorize(ClassModel& model) {
    Eigen::LLT<Eigen::MatrixXd> llt(model.covariance_reg);
    if (llt.info() != Eigen::Success || !(llt.rcond() > std::numeric_limits<double>::epsilon())) {
        throw SingularCovarianceError(
            "covariance of class gesture=" + model.gesture + " user=" + model.user +
            " is numerically singular at lambda=" + std::to_string(model.regularization_lambda));
    }
    model.cholesky_lower = llt.matrixL();
    const Eigen::Index dim = model.covariance_reg.rows();
    model.precision = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
    model.precision = 0.5 * (model.precision + model.precision.transpose()).eval();
}

void put_u32(std::string& out, std::uint32_t value) {
    if constexpr (std::endian::native == std::endian::big) {
        value = __builtin_bswap32(value);
    }
    out.append(reinterpret_cast<const char*>(&value), 4);
}

void put_f64(std::string& out, double value) {
    auto bits = std::bit_cast<std::uint64_t>(value);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    out.append(reinterpret_cast<const char*>(&bits), 8);
}

class Reader {
public:
    Reader(std::string data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}

    void take(void* dst, std::size_t n) {
        if (pos_ + n > data_.size()) {
            throw ValidationError(path_ + ": truncated model file");
        }
        std::memcpy(dst, data_.data() + pos_, n);
        pos_ += n;
    }

    std::uint32_t u32() {
        std::uint32_t v = 0;
        take(&v, 4);
        if constexpr (std::endian::native == std::endian::big) {
            v = __builtin_bswap32(v);
        }
        return v;
    }

    double f64() {
        std::uint64_t v = 0;
        take(&v, 8);
        if constexpr (std::endian::native == std::endian::big) {
            v = __builtin_bswap64(v);
        }
        return std::bit_cast<double>(v);
    }

    std::string str() {
        const std::uint32_t n = u32();
        std::string s(n, '\0');
        take(s.data(), n);
        return s;
    }

    bool done() const { return pos_ == data_.size(); }

private:
    std::string data_;
    std::string path_;
    std::size_t pos_ = 0;
};

} // namespace

ClassModel fit_class_model(const Eigen::MatrixXd& training_rows, double lambda,
                           std::string gesture, std::string user) {
    const Eigen::Index n = training_rows.rows();
    const Eigen::Index dim = training_rows.cols();
    if (n < 2) {
        throw ValidationError("class gesture=" + gesture + " user=" + user +
                              " needs at least 2 training windows, got " + std::to_string(n));
    }
    if (dim < 1) {
        throw ValidationError("training rows have zero dimension");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ValidationError("lambda must be a finite value >= 0");
    }
    if (!training_rows.allFinite()) {
        throw ValidationError("class gesture=" + gesture + " user=" + user +
                              " has non-finite training features");
    }

    // Canonical row order makes every sum below independent of input order.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index d = 0; d < dim; ++d) {
            const double x = training_rows(a, d);
            const double y = training_rows(b, d);
            if (x != y) {
                return x < y;
            }
        }
        return false;
    });
    Eigen::MatrixXd sorted(n, dim);
    for (Eigen::Index r = 0; r < n; ++r) {
        sorted.row(r) = training_rows.row(order[static_cast<std::size_t>(r)]);
    }

    ClassModel model;
    model.gesture = std::move(gesture);
    model.user = std::move(user);
    model.training_window_count = static_cast<long>(n);
    model.regularization_lambda = lambda;

    model.centroid = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index r = 0; r < n; ++r) {
        model.centroid += sorted.row(r).transpose();
    }
    model.centroid /= static_cast<double>(n);

    sorted.rowwise() -= model.centroid.transpose();
    model.covariance = (sorted.transpose() * sorted) / static_cast<double>(n - 1);
    model.covariance = 0.5 * (model.covariance + model.covariance.transpose()).eval();

    model.covariance_reg = model.covariance;
    if (lambda > 0.0) {
        const double trace = model.covariance.trace();
        const double ridge = trace > 0.0 ? lambda * trace / static_cast<double>(dim) : kAbsoluteRidge;
        model.covariance_reg.diagonal().array() += ridge;
    }
    factorize(model);
    return model;
}

ClassModel fit_class_model(std::span<const FeatureMatrix> training, double lambda,
                           std::string gesture, std::string user) {
    Eigen::Index rows = 0;
    Eigen::Index dim = -1;
    for (const auto& m : training) {
        if (dim >= 0 && m.dim() != dim) {
            throw ValidationError("training matrices differ in feature dimension");
        }
        dim = m.dim();
        rows += m.window_count();
    }
    Eigen::MatrixXd stacked(rows, std::max<Eigen::Index>(dim, 0));
    Eigen::Index at = 0;
    for (const auto& m : training) {
        stacked.middleRows(at, m.window_count()) = m.rows;
        at += m.window_count();
    }
    return fit_class_model(stacked, lambda, std::move(gesture), std::move(user));
}

double mahalanobis_score(const ClassModel& model, const Eigen::Ref<const Eigen::VectorXd>& p) {
    if (p.size() != model.dim()) {
        throw ValidationError("probe dimension " + std::to_string(p.size()) +
                              " does not match model dimension " + std::to_string(model.dim()));
    }
    Eigen::VectorXd whitened = p - model.centroid;
    model.cholesky_lower.triangularView<Eigen::Lower>().solveInPlace(whitened);
    return whitened.norm();
}

Eigen::VectorXd mahalanobis_scores(const ClassModel& model, const Eigen::MatrixXd& probes) {
    Eigen::VectorXd scores(probes.rows());
    for (Eigen::Index r = 0; r < probes.rows(); ++r) {
        scores(r) = mahalanobis_score(model, probes.row(r).transpose());
    }
    return scores;
}

LooSchedule loo_schedule(int trial_count) {
    if (trial_count < 2) {
        throw ValidationError("leave-one-out needs at least 2 trials, got " +
                              std::to_string(trial_count));
    }
    LooSchedule schedule;
    for (int test = 0; test < trial_count; ++test) {
        LooFold fold;
        fold.test_trial = test;
        for (int t = 0; t < trial_count; ++t) {
            if (t != test) {
                fold.train_trials.push_back(t);
            }
        }
        schedule.folds.push_back(std::move(fold));
    }
    return schedule;
}

void write_class_model(const ClassModel& model, const std::filesystem::path& file) {
    std::string out(kModelMagic, sizeof(kModelMagic));
    put_u32(out, kModelVersion);
    put_u32(out, static_cast<std::uint32_t>(model.gesture.size()));
    out += model.gesture;
    put_u32(out, static_cast<std::uint32_t>(model.user.size()));
    out += model.user;
    const Eigen::Index dim = model.dim();
    put_f64(out, static_cast<double>(dim));
    put_f64(out, model.regularization_lambda);
    put_f64(out, static_cast<double>(model.training_window_count));
    for (Eigen::Index i = 0; i < dim; ++i) {
        put_f64(out, model.centroid(i));
    }
    for (const Eigen::MatrixXd* m : {&model.covariance, &model.covariance_reg}) {
        for (Eigen::Index r = 0; r < dim; ++r) {
            for (Eigen::Index c = 0; c < dim; ++c) {
                put_f64(out, (*m)(r, c));
            }
        }
    }
    std::ofstream stream(file, std::ios::binary | std::ios::trunc);
    if (!stream) {
        throw ValidationError("cannot write " + file.string());
    }
    stream.write(out.data(), static_cast<std::streamsize>(out.size()));
}

ClassModel read_class_model(const std::filesystem::path& file) {
    std::ifstream stream(file, std::ios::binary);
    if (!stream) {
        throw ValidationError("cannot open " + file.string());
    }
    std::string data((std::istreambuf_iterator<char>(stream)), std::istreambuf_iterator<char>());
    Reader in(std::move(data), file.string());

    char magic[8];
    in.take(magic, sizeof(magic));
    if (std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
        throw ValidationError(file.string() + ": not a class model file");
    }
    if (const auto version = in.u32(); version != kModelVersion) {
        throw ValidationError(file.string() + ": unsupported model version " +
                              std::to_string(version));
    }
    ClassModel model;
    model.gesture = in.str();
    model.user = in.str();
    const double dim_value = in.f64();
    if (!(dim_value >= 1.0) || dim_value != std::floor(dim_value) || dim_value > 1e6) {
        throw ValidationError(file.string() + ": invalid dimension");
    }
    const auto dim = static_cast<Eigen::Index>(dim_value);
    model.regularization_lambda = in.f64();
    model.training_window_count = static_cast<long>(in.f64());
    model.centroid.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        model.centroid(i) = in.f64();
    }
    for (Eigen::MatrixXd* m : {&model.covariance, &model.covariance_reg}) {
        m->resize(dim, dim);
        for (Eigen::Index r = 0; r < dim; ++r) {
            for (Eigen::Index c = 0; c < dim; ++c) {
                (*m)(r, c) = in.f64();
            }
        }
    }
    if (!in.done()) {
        throw ValidationError(file.string() + ": trailing bytes after model");
    }
    factorize(model);
    return model;
}

} // namespace emgauth
