#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "taxoqa/error.hpp"

namespace taxoqa::stats {

// Dense real matrix with optional row/column labels.
struct Matrix {
    Eigen::MatrixXd values;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;

    Matrix() = default;
    explicit Matrix(Eigen::MatrixXd v, std::vector<std::string> rows = {}, std::vector<std::string> cols = {});

    Eigen::Index rows() const noexcept { return values.rows(); }
    Eigen::Index cols() const noexcept { return values.cols(); }
    std::string row_name(Eigen::Index i) const;
    // Throws NumericError on non-finite values or label/dimension mismatch.
    void validate() const;
};

// Cosine similarity between every pair of rows. Labels carry over to both axes.
Matrix pairwise_cosine(const Matrix& m);

// Average ranks (1-based); ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

struct RsaResult {
    double mean = 0;
    // Absent for a single full-matrix comparison.
    std::optional<double> sd;
    std::vector<double> per_subset;
};

// Spearman correlation between the strict upper triangles of two similarity
// matrices. With subsets > 0, averages over random label subsets.
RsaResult rsa(const Matrix& a, const Matrix& b, std::size_t subsets = 0, std::size_t subset_size = 100,
              std::uint64_t seed = 0);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
// Two-sided tail probability P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);
double normal_two_sided_p(double z);

struct TTestResult {
    double t = 0;
    double p = 1;
    double mean_x = 0;
    double mean_y = 0;
    std::size_t df = 0;
};

TTestResult paired_t_test(std::span<const double> x, std::span<const double> y);

struct RegressionResult {
    // Intercept first.
    std::vector<double> coefficients;
    std::vector<double> standard_errors;
    std::vector<double> statistics;
    std::vector<double> p_values;
    // Logistic fits only.
    std::vector<double> odds_ratios;
    // Columns removed as constant or collinear; they report coefficient 0.
    std::vector<bool> dropped;
    bool converged = false;
    bool separation = false;
    std::size_t n_iterations = 0;
    double log_likelihood = 0;
    std::vector<double> gradient;
};

struct LogisticOptions {
    std::size_t max_iterations = 100;
    double gradient_tolerance = 1e-8;
    double divergence_norm = 1e4;
};

// Maximum-likelihood logistic regression on [1, features]. Labels are 0/1.
RegressionResult logistic_fit(const Matrix& features, std::span<const int> labels,
                              const LogisticOptions& options = {});

struct PcaResult {
    // k x d, unit-norm rows.
    Eigen::MatrixXd components;
    std::vector<double> explained_variance;
    Eigen::VectorXd mean;
    // Sum of all covariance eigenvalues.
    double total_variance = 0;

    Eigen::MatrixXd project(const Eigen::MatrixXd& x) const;
};

PcaResult pca(const Matrix& x, std::size_t k);

struct SvmOptions {
    double c = 1.0;
    std::size_t iterations = 100000;
    // A point counts toward the margin error when y * f(x) < 1 - margin_tolerance.
    double margin_tolerance = 1e-3;
};

struct SvmResult {
    Eigen::VectorXd weights;
    double bias = 0;
    double regularization_c = 1;
    double svm_error = 0;
    double objective = 0;
};

// Primal objective 0.5 |w|^2 + c * sum hinge(y (w.x + b)).
double svm_objective(const Eigen::MatrixXd& x, std::span<const int> labels, const Eigen::VectorXd& w, double b,
                     double c);
// Labels are +1/-1.
SvmResult svm_fit(const Matrix& x, std::span<const int> labels, const SvmOptions& options = {});

struct WhitenOptions {
    // Add eps = 1e-6 * trace / d to the diagonal when the covariance is near-singular.
    bool ridge = false;
};

class RankDeficientError : public NumericError {
public:
    using NumericError::NumericError;
};

Matrix whiten(const Matrix& u, const WhitenOptions& options = {});

struct GroupedRecord {
    std::string group;
    double x = 0;
    double y = 0;
};

struct GroupFit {
    double intercept = 0;
    double slope = 0;
    std::size_t n = 0;
    // False when the group inherited the global estimates.
    bool own_fit = false;
};

struct GroupedRegressionResult {
    // [intercept, slope] with HC1 standard errors and t-based p-values.
    RegressionResult global;
    std::map<std::string, GroupFit> groups;
};

GroupedRegressionResult grouped_regression(std::span<const GroupedRecord> records);

}  // namespace taxoqa::stats
