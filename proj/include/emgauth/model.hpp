#pragma once

#include "emgauth/features.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace emgauth {

// Centroid and regularized covariance of one (gesture, user) class.
struct ClassModel {
    std::string gesture;
    std::string user;
    Eigen::VectorXd centroid;
    Eigen::MatrixXd covariance;      // unbiased sample covariance
    Eigen::MatrixXd covariance_reg;  // covariance + shrinkage term
    Eigen::MatrixXd precision;       // inverse of covariance_reg
    Eigen::MatrixXd cholesky_lower;  // L with L * L^T = covariance_reg
    long training_window_count = 0;
    double regularization_lambda = 0.0;

    Eigen::Index dim() const { return centroid.size(); }
};

inline constexpr double kDefaultLambda = 1e-3;
// Added to the diagonal when lambda > 0 but the covariance has zero trace.
inline constexpr double kAbsoluteRidge = 1e-12;

// Rows are sorted lexicographically before accumulation, so the fit is
// bit-for-bit independent of training row order. Regularization:
//   covariance_reg = covariance + lambda * trace(covariance) / D * I
// Throws SingularCovarianceError when covariance_reg is not positive definite.
ClassModel fit_class_model(const Eigen::MatrixXd& training_rows, double lambda,
                           std::string gesture = {}, std::string user = {});

ClassModel fit_class_model(std::span<const FeatureMatrix> training, double lambda,
                           std::string gesture = {}, std::string user = {});

// sqrt((p - mu)^T * precision * (p - mu)), evaluated through the Cholesky factor.
double mahalanobis_score(const ClassModel& model, const Eigen::Ref<const Eigen::VectorXd>& p);

// Scores every row of probes against model.
Eigen::VectorXd mahalanobis_scores(const ClassModel& model, const Eigen::MatrixXd& probes);

struct LooFold {
    std::vector<int> train_trials;
    int test_trial = 0;
};

struct LooSchedule {
    std::vector<LooFold> folds;
};

LooSchedule loo_schedule(int trial_count);

// Binary model store: magic, version, gesture and user names, then D, lambda,
// training count, centroid, covariance and covariance_reg as little-endian f64.
void write_class_model(const ClassModel& model, const std::filesystem::path& file);
ClassModel read_class_model(const std::filesystem::path& file);

} // namespace emgauth
