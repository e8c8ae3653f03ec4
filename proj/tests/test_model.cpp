#include "oracles.hpp"

#include "emgauth/error.hpp"
#include "emgauth/model.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace emgauth;

namespace {

Eigen::MatrixXd gaussian_rows(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
    std::normal_distribution<double> n01;
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < d; ++c) m(r, c) = n01(rng) * (1.0 + c) + 0.3 * c;
    return m;
}

} // namespace

TEST_CASE("hand computed fit") {
    Eigen::MatrixXd rows(2, 1);
    rows << 1, 3;
    const auto m = fit_class_model(rows, 0.0, "g", "u");
    CHECK(m.centroid(0) == 2.0);
    CHECK(m.covariance(0, 0) == 2.0);
    CHECK(m.training_window_count == 2);
    CHECK(mahalanobis_score(m, Eigen::VectorXd::Constant(1, 4.0)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("equal rows fall back to an absolute ridge") {
    Eigen::MatrixXd rows(5, 3);
    rows.rowwise() = Eigen::RowVector3d(1, -2, 0.5);
    const auto m = fit_class_model(rows, 1e-3, "g", "u");
    CHECK(m.centroid == rows.row(0).transpose());
    CHECK(m.covariance.isZero(0));
    CHECK(m.covariance_reg.isApprox(kAbsoluteRidge * Eigen::MatrixXd::Identity(3, 3)));
    CHECK(m.precision.allFinite());
    CHECK_THROWS_AS(fit_class_model(rows, 0.0, "g", "u"), SingularCovarianceError);
}

TEST_CASE("singular covariance at lambda 0 names the class") {
    Eigen::MatrixXd rows(4, 2);
    rows << 1, 2, 2, 4, 3, 6, 4, 8;
    try {
        fit_class_model(rows, 0.0, "fist", "P07");
        FAIL("expected singular covariance");
    } catch (const SingularCovarianceError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("fist") != std::string::npos);
        CHECK(msg.find("P07") != std::string::npos);
    }
    CHECK_NOTHROW(fit_class_model(rows, 1e-3, "fist", "P07"));
}

TEST_CASE("fit matches two-pass oracle") {
    std::mt19937_64 rng(1);
    const auto rows = gaussian_rows(rng, 500, 8);
    const auto m = fit_class_model(rows, 0.0, "g", "u");
    Eigen::VectorXd mu;
    Eigen::MatrixXd cov;
    oracle::mean_cov(rows, mu, cov);
    CHECK((m.centroid - mu).norm() <= 1e-10 * mu.norm());
    CHECK((m.covariance - cov).norm() <= 1e-10 * cov.norm());
}

TEST_CASE("model invariants") {
    std::mt19937_64 rng(2);
    for (double lambda : {0.0, 1e-3, 0.5}) {
        const auto rows = gaussian_rows(rng, 60, 6);
        const auto m = fit_class_model(rows, lambda, "g", "u");
        CHECK((m.covariance - m.covariance.transpose()).norm() <= 1e-10 * m.covariance.norm());
        const Eigen::MatrixXd id = m.precision * m.covariance_reg;
        CHECK((id - Eigen::MatrixXd::Identity(6, 6)).norm() <= 1e-6);
        CHECK(m.covariance_reg.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff() > 0);
        const double ridge = lambda * m.covariance.trace() / 6;
        CHECK((m.covariance_reg - m.covariance - ridge * Eigen::MatrixXd::Identity(6, 6)).norm() <= 1e-12);
        for (Eigen::Index r = 0; r < rows.rows(); ++r) {
            const double s = mahalanobis_score(m, rows.row(r).transpose());
            CHECK(std::isfinite(s));
            CHECK(s >= 0);
        }
    }
}

TEST_CASE("analytic scores") {
    ClassModel m;
    Eigen::MatrixXd rows(4, 2);
    rows << 1, 1, -1, -1, 1, -1, -1, 1;
    m = fit_class_model(rows * std::sqrt(0.75), 0.0, "g", "u");
    CHECK(m.covariance.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-12));
    CHECK(mahalanobis_score(m, Eigen::Vector2d(3, 4)) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(mahalanobis_score(m, m.centroid) == 0.0);

    Eigen::MatrixXd scaled = rows * std::sqrt(0.75);
    scaled.col(0) *= 2.0;
    const auto d = fit_class_model(scaled, 0.0, "g", "u");
    CHECK(d.covariance.isApprox(Eigen::Vector2d(4, 1).asDiagonal().toDenseMatrix(), 1e-12));
    CHECK(mahalanobis_score(d, Eigen::Vector2d(2, 3)) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-12));
}

TEST_CASE("scores match explicit-inverse oracle") {
    std::mt19937_64 rng(3);
    const auto rows = gaussian_rows(rng, 80, 5);
    const auto m = fit_class_model(rows, 1e-3, "g", "u");
    const auto probes = gaussian_rows(rng, 20, 5);
    const Eigen::VectorXd s = mahalanobis_scores(m, probes);
    for (Eigen::Index r = 0; r < 20; ++r) {
        CHECK(s(r) == doctest::Approx(oracle::mahalanobis(m.centroid, m.covariance_reg, probes.row(r).transpose()))
                          .epsilon(1e-10));
    }
    CHECK_THROWS_AS(mahalanobis_score(m, Eigen::VectorXd::Zero(4)), ValidationError);
}

TEST_CASE("affine invariance at lambda 0") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index d = 2 + trial % 6;
        const auto rows = gaussian_rows(rng, 40 + 5 * d, d);
        Eigen::MatrixXd a(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) a(i, j) = n01(rng);
        a += 2.0 * Eigen::MatrixXd::Identity(d, d);
        Eigen::VectorXd b(d);
        for (Eigen::Index i = 0; i < d; ++i) b(i) = n01(rng);
        const Eigen::MatrixXd moved = (rows * a.transpose()).rowwise() + b.transpose();
        const auto m1 = fit_class_model(rows, 0.0, "g", "u");
        const auto m2 = fit_class_model(moved, 0.0, "g", "u");
        const auto probes = gaussian_rows(rng, 10, d);
        for (Eigen::Index r = 0; r < 10; ++r) {
            const Eigen::VectorXd p = probes.row(r).transpose();
            CHECK(mahalanobis_score(m2, a * p + b) == doctest::Approx(mahalanobis_score(m1, p)).epsilon(1e-6));
        }
    }
}

TEST_CASE("fit is independent of row order") {
    std::mt19937_64 rng(5);
    const auto rows = gaussian_rows(rng, 100, 4);
    std::vector<Eigen::Index> perm(100);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd shuffled(100, 4);
    for (Eigen::Index r = 0; r < 100; ++r) shuffled.row(r) = rows.row(perm[r]);
    const auto a = fit_class_model(rows, 1e-3, "g", "u");
    const auto b = fit_class_model(shuffled, 1e-3, "g", "u");
    CHECK(a.centroid == b.centroid);
    CHECK(a.covariance == b.covariance);
    CHECK(a.precision == b.precision);
}

TEST_CASE("fit preconditions") {
    CHECK_THROWS_AS(fit_class_model(Eigen::MatrixXd::Ones(1, 3), 1e-3, "g", "u"), ValidationError);
    Eigen::MatrixXd rows = Eigen::MatrixXd::Random(5, 2);
    CHECK_THROWS_AS(fit_class_model(rows, -1.0, "g", "u"), ValidationError);
    rows(2, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fit_class_model(rows, 1e-3, "g", "u"), ValidationError);
}

TEST_CASE("feature matrices stack for fitting") {
    std::mt19937_64 rng(6);
    FeatureMatrix a, b;
    a.rows = gaussian_rows(rng, 7, 3);
    b.rows = gaussian_rows(rng, 9, 3);
    Eigen::MatrixXd both(16, 3);
    both << a.rows, b.rows;
    const std::vector<FeatureMatrix> parts{a, b};
    const auto m = fit_class_model(std::span<const FeatureMatrix>(parts), 1e-3, "g", "u");
    CHECK(m.training_window_count == 16);
    CHECK(m.covariance == fit_class_model(both, 1e-3, "g", "u").covariance);
}

TEST_CASE("loo schedule") {
    const auto s7 = loo_schedule(7);
    REQUIRE(s7.folds.size() == 7);
    CHECK(s7.folds[0].test_trial == 0);
    CHECK(s7.folds[0].train_trials == std::vector<int>{1, 2, 3, 4, 5, 6});
    CHECK(loo_schedule(2).folds.size() == 2);
    CHECK_THROWS_AS(loo_schedule(1), ValidationError);
    for (int n = 2; n < 12; ++n) {
        std::vector<int> seen(n, 0);
        for (const auto& f : loo_schedule(n).folds) {
            ++seen[f.test_trial];
            CHECK(f.train_trials.size() == static_cast<std::size_t>(n - 1));
            CHECK(std::find(f.train_trials.begin(), f.train_trials.end(), f.test_trial) == f.train_trials.end());
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    }
}

TEST_CASE("model store round trip") {
    std::mt19937_64 rng(7);
    const auto m = fit_class_model(gaussian_rows(rng, 30, 4), 1e-3, "wrist_flex", "P03");
    const auto file = std::filesystem::temp_directory_path() / "emgauth_model.mdl";
    write_class_model(m, file);
    const auto back = read_class_model(file);
    CHECK(back.gesture == "wrist_flex");
    CHECK(back.user == "P03");
    CHECK(back.training_window_count == 30);
    CHECK(back.regularization_lambda == 1e-3);
    CHECK(back.centroid == m.centroid);
    CHECK(back.covariance == m.covariance);
    CHECK(back.covariance_reg == m.covariance_reg);
    CHECK(back.precision == m.precision);
    {
        std::ofstream out(file, std::ios::binary | std::ios::app);
        out << 'x';
    }
    CHECK_THROWS_AS(read_class_model(file), ValidationError);
    std::filesystem::remove(file);
}
