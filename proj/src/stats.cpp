#include "taxoqa/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "taxoqa/random.hpp"

namespace taxoqa::stats {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
    if (!ok) throw NumericError(what);
}

}  // namespace

Matrix::Matrix(Eigen::MatrixXd v, std::vector<std::string> rows, std::vector<std::string> cols)
    : values(std::move(v)), row_labels(std::move(rows)), col_labels(std::move(cols)) {}

std::string Matrix::row_name(Eigen::Index i) const {
    if (static_cast<std::size_t>(i) < row_labels.size()) return row_labels[static_cast<std::size_t>(i)];
    return "#" + std::to_string(i);
}

void Matrix::validate() const {
    require(row_labels.empty() || static_cast<Eigen::Index>(row_labels.size()) == rows(),
            "row labels do not match the row count");
    require(col_labels.empty() || static_cast<Eigen::Index>(col_labels.size()) == cols(),
            "column labels do not match the column count");
    require(values.allFinite(), "matrix contains non-finite values");
}

Matrix pairwise_cosine(const Matrix& m) {
    m.validate();
    const Eigen::VectorXd norms = m.values.rowwise().norm();
    for (Eigen::Index i = 0; i < norms.size(); ++i)
        require(norms[i] > 0, "zero-norm row '" + m.row_name(i) + "'");
    const Eigen::MatrixXd unit = norms.cwiseInverse().asDiagonal() * m.values;
    Eigen::MatrixXd out = unit * unit.transpose();
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        out(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) out(i, j) = out(j, i);
    }
    return Matrix(std::move(out), m.row_labels, m.row_labels);
}

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "length mismatch");
    require(x.size() >= 2, "need at least two observations");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    require(sxx > 0 && syy > 0, "correlation of a constant input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "length mismatch");
    require(x.size() >= 3, "spearman needs at least three observations");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

namespace {

std::vector<double> upper_triangle(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx) {
    std::vector<double> out;
    out.reserve(idx.size() * (idx.size() - 1) / 2);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = i + 1; j < idx.size(); ++j) out.push_back(m(idx[i], idx[j]));
    return out;
}

}  // namespace

RsaResult rsa(const Matrix& a, const Matrix& b, std::size_t subsets, std::size_t subset_size, std::uint64_t seed) {
    a.validate();
    b.validate();
    require(a.rows() == a.cols() && b.rows() == b.cols(), "rsa needs square matrices");
    require(a.rows() == b.rows(), "rsa matrices differ in size");
    if (!a.row_labels.empty() && !b.row_labels.empty())
        require(a.row_labels == b.row_labels, "rsa matrices have different labels");
    const auto n = static_cast<std::size_t>(a.rows());

    RsaResult r;
    if (subsets == 0) {
        std::vector<Eigen::Index> all(n);
        std::iota(all.begin(), all.end(), 0);
        r.mean = spearman(upper_triangle(a.values, all), upper_triangle(b.values, all));
        r.per_subset.push_back(r.mean);
        return r;
    }
    require(subset_size <= n, "subset size exceeds the number of concepts");
    std::vector<Eigen::Index> all(n);
    std::iota(all.begin(), all.end(), 0);
    Rng rng(seed);
    for (std::size_t s = 0; s < subsets; ++s) {
        auto idx = rng.sample(std::span<const Eigen::Index>(all), subset_size);
        std::sort(idx.begin(), idx.end());
        r.per_subset.push_back(spearman(upper_triangle(a.values, idx), upper_triangle(b.values, idx)));
    }
    const double k = static_cast<double>(subsets);
    r.mean = std::accumulate(r.per_subset.begin(), r.per_subset.end(), 0.0) / k;
    double ss = 0;
    for (double v : r.per_subset) ss += (v - r.mean) * (v - r.mean);
    r.sd = subsets > 1 ? std::sqrt(ss / (k - 1)) : 0.0;
    return r;
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-16;
    const double qab = a + b, qap = a + 1, qam = a - 1;
    double c = 1, d = 1 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1 / d;
    double h = d;
    for (int m = 1; m <= 1000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1) < kEps) return h;
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    require(a > 0 && b > 0, "incomplete beta needs positive parameters");
    require(x >= 0 && x <= 1, "incomplete beta argument outside [0, 1]");
    if (x == 0 || x == 1) return x;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                             b * std::log1p(-x);
    if (x < (a + 1) / (a + b + 2)) return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
    return 1 - std::exp(log_front) * beta_continued_fraction(b, a, 1 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    require(df > 0, "t distribution needs positive degrees of freedom");
    if (std::isinf(t)) return 0.0;
    if (t == 0) return 1.0;
    return std::clamp(incomplete_beta(df / 2, 0.5, df / (df + t * t)), 0.0, 1.0);
}

double normal_two_sided_p(double z) {
    if (std::isinf(z)) return 0.0;
    return std::clamp(std::erfc(std::abs(z) / std::sqrt(2.0)), 0.0, 1.0);
}

TTestResult paired_t_test(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "paired samples differ in length");
    require(x.size() >= 2, "paired t-test needs at least two pairs");
    const double n = static_cast<double>(x.size());
    TTestResult r;
    r.mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
    r.mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
    r.df = x.size() - 1;
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
    const double md = std::accumulate(d.begin(), d.end(), 0.0) / n;
    double ss = 0;
    for (double v : d) ss += (v - md) * (v - md);
    if (ss == 0) {
        require(md == 0, "paired differences have zero variance");
        return r;
    }
    r.t = md / (std::sqrt(ss / (n - 1)) / std::sqrt(n));
    r.p = student_t_two_sided_p(r.t, static_cast<double>(r.df));
    return r;
}

namespace {

double log1p_exp(double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

double logistic(double v) {
    if (v >= 0) return 1 / (1 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1 + e);
}

double log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = x * beta;
    double ll = 0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - log1p_exp(eta[i]);
    return ll;
}

// Greedy left-to-right selection of linearly independent columns.
std::vector<bool> independent_columns(const Eigen::MatrixXd& x) {
    std::vector<bool> keep(static_cast<std::size_t>(x.cols()), false);
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const Eigen::VectorXd col = x.col(j);
        const double norm = col.norm();
        if (norm == 0) continue;
        Eigen::VectorXd residual = col;
        if (!kept.empty()) {
            Eigen::MatrixXd basis(x.rows(), static_cast<Eigen::Index>(kept.size()));
            for (std::size_t k = 0; k < kept.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = x.col(kept[k]);
            const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(col);
            residual = col - basis * coef;
        }
        if (residual.norm() > 1e-9 * norm) {
            keep[static_cast<std::size_t>(j)] = true;
            kept.push_back(j);
        }
    }
    return keep;
}

}  // namespace

RegressionResult logistic_fit(const Matrix& features, std::span<const int> labels, const LogisticOptions& options) {
    features.validate();
    const Eigen::Index n = features.rows();
    const Eigen::Index p = features.cols() + 1;
    require(static_cast<Eigen::Index>(labels.size()) == n, "labels do not match the number of rows");
    require(n > p, "logistic regression needs more observations than parameters");
    Eigen::VectorXd y(n);
    bool any0 = false, any1 = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int v = labels[static_cast<std::size_t>(i)];
        require(v == 0 || v == 1, "logistic labels must be 0 or 1");
        y[i] = v;
        any0 = any0 || v == 0;
        any1 = any1 || v == 1;
    }
    require(any0 && any1, "logistic regression needs both classes");

    Eigen::MatrixXd x(n, p);
    x.col(0).setOnes();
    x.rightCols(p - 1) = features.values;

    RegressionResult r;
    r.dropped.assign(static_cast<std::size_t>(p), false);
    const auto keep = independent_columns(x);
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (keep[static_cast<std::size_t>(j)])
            cols.push_back(j);
        else
            r.dropped[static_cast<std::size_t>(j)] = true;
    }
    require(!cols.empty() && cols.front() == 0, "degenerate design matrix");
    const auto q = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd xr(n, q);
    for (Eigen::Index k = 0; k < q; ++k) xr.col(k) = x.col(cols[static_cast<std::size_t>(k)]);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
    double ll = log_likelihood(xr, y, beta);
    Eigen::MatrixXd hessian(q, q);
    Eigen::VectorXd grad(q);
    auto evaluate = [&]() {
        const Eigen::VectorXd eta = xr * beta;
        Eigen::VectorXd prob(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            prob[i] = logistic(eta[i]);
            w[i] = prob[i] * (1 - prob[i]);
        }
        grad = xr.transpose() * (y - prob);
        hessian = xr.transpose() * w.asDiagonal() * xr;
        return prob;
    };

    Eigen::VectorXd prob = evaluate();
    for (r.n_iterations = 0; r.n_iterations < options.max_iterations; ++r.n_iterations) {
        if (grad.cwiseAbs().maxCoeff() < options.gradient_tolerance) {
            r.converged = true;
            break;
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
        if (ldlt.info() != Eigen::Success) break;
        const Eigen::VectorXd step = ldlt.solve(grad);
        if (!step.allFinite()) break;
        double t = 1.0;
        Eigen::VectorXd next = beta + step;
        double next_ll = log_likelihood(xr, y, next);
        while (next_ll < ll && t > 1e-10) {
            t /= 2;
            next = beta + t * step;
            next_ll = log_likelihood(xr, y, next);
        }
        beta = next;
        ll = next_ll;
        prob = evaluate();
        if (beta.norm() > options.divergence_norm) break;
    }

    const double max_residual = (y - prob).cwiseAbs().maxCoeff();
    if (beta.norm() > options.divergence_norm || max_residual < 1e-6) {
        r.separation = true;
        r.converged = false;
    }

    Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(q, q, kInf);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(hessian);
    if (lu.isInvertible()) cov = lu.inverse();

    r.log_likelihood = ll;
    r.coefficients.assign(static_cast<std::size_t>(p), 0.0);
    r.standard_errors.assign(static_cast<std::size_t>(p), kInf);
    r.statistics.assign(static_cast<std::size_t>(p), 0.0);
    r.p_values.assign(static_cast<std::size_t>(p), 1.0);
    for (Eigen::Index k = 0; k < q; ++k) {
        const auto j = static_cast<std::size_t>(cols[static_cast<std::size_t>(k)]);
        r.coefficients[j] = beta[k];
        const double var = cov(k, k);
        r.standard_errors[j] = var >= 0 ? std::sqrt(var) : kInf;
        r.statistics[j] = std::isfinite(r.standard_errors[j]) ? beta[k] / r.standard_errors[j] : 0.0;
        r.p_values[j] = normal_two_sided_p(r.statistics[j]);
    }
    r.odds_ratios.resize(static_cast<std::size_t>(p));
    for (std::size_t j = 0; j < r.coefficients.size(); ++j) r.odds_ratios[j] = std::exp(r.coefficients[j]);

    // Gradient of the log-likelihood over every column, dropped ones included.
    Eigen::VectorXd full_beta = Eigen::VectorXd::Zero(p);
    for (std::size_t j = 0; j < r.coefficients.size(); ++j) full_beta[static_cast<Eigen::Index>(j)] = r.coefficients[j];
    const Eigen::VectorXd eta = x * full_beta;
    Eigen::VectorXd resid(n);
    for (Eigen::Index i = 0; i < n; ++i) resid[i] = y[i] - logistic(eta[i]);
    const Eigen::VectorXd g = x.transpose() * resid;
    r.gradient.assign(g.data(), g.data() + g.size());
    return r;
}

Eigen::MatrixXd PcaResult::project(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean.transpose()) * components.transpose();
}

PcaResult pca(const Matrix& x, std::size_t k) {
    x.validate();
    require(x.rows() >= 2, "pca needs at least two rows");
    require(k >= 1 && static_cast<Eigen::Index>(k) <= std::min(x.rows() - 1, x.cols()),
            "requested more components than the data supports");
    PcaResult r;
    r.mean = x.values.colwise().mean();
    const Eigen::MatrixXd centered = x.values.rowwise() - r.mean.transpose();
    const double denom = static_cast<double>(x.rows() - 1);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    r.total_variance = s.squaredNorm() / denom;
    r.components.resize(static_cast<Eigen::Index>(k), x.cols());
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(k); ++i) {
        Eigen::VectorXd v = svd.matrixV().col(i);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0) v = -v;
        r.components.row(i) = v.normalized().transpose();
        r.explained_variance.push_back(s[i] * s[i] / denom);
    }
    return r;
}

double svm_objective(const Eigen::MatrixXd& x, std::span<const int> labels, const Eigen::VectorXd& w, double b,
                     double c) {
    double hinge = 0;
    const Eigen::VectorXd f = x * w;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        hinge += std::max(0.0, 1 - labels[static_cast<std::size_t>(i)] * (f[i] + b));
    return 0.5 * w.squaredNorm() + c * hinge;
}

SvmResult svm_fit(const Matrix& x, std::span<const int> labels, const SvmOptions& options) {
    x.validate();
    const Eigen::Index n = x.rows();
    require(static_cast<Eigen::Index>(labels.size()) == n, "labels do not match the number of rows");
    require(options.c > 0, "svm regularization must be positive");
    bool pos = false, neg = false;
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int v = labels[static_cast<std::size_t>(i)];
        require(v == 1 || v == -1, "svm labels must be +1 or -1");
        y[i] = v;
        pos = pos || v == 1;
        neg = neg || v == -1;
    }
    require(pos && neg, "svm needs both classes");

    const double lambda = 1.0 / (static_cast<double>(n) * options.c);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
    double b = 0;
    Eigen::VectorXd best_w = w;
    double best_b = b;
    double best = kInf;
    Eigen::VectorXd gw(x.cols());
    for (std::size_t t = 1; t <= options.iterations; ++t) {
        const Eigen::VectorXd margin = (y.array() * ((x.values * w).array() + b)).matrix();
        double hinge = 0;
        gw.setZero();
        double gb = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (margin[i] < 1) {
                hinge += 1 - margin[i];
                gw -= y[i] * x.values.row(i).transpose();
                gb -= y[i];
            }
        }
        const double objective = 0.5 * w.squaredNorm() + options.c * hinge;
        if (objective < best) {
            best = objective;
            best_w = w;
            best_b = b;
        }
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double inv_n = 1.0 / static_cast<double>(n);
        w -= eta * (lambda * w + inv_n * gw);
        b -= eta * inv_n * gb;
    }
    const double final_objective = svm_objective(x.values, labels, w, b, options.c);
    if (final_objective < best) {
        best = final_objective;
        best_w = w;
        best_b = b;
    }

    SvmResult r;
    r.weights = best_w;
    r.bias = best_b;
    r.regularization_c = options.c;
    r.objective = best;
    const Eigen::VectorXd f = x.values * best_w;
    std::size_t errors = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (y[i] * (f[i] + best_b) < 1 - options.margin_tolerance) ++errors;
    r.svm_error = static_cast<double>(errors) / static_cast<double>(n);
    return r;
}

Matrix whiten(const Matrix& u, const WhitenOptions& options) {
    u.validate();
    if (u.rows() <= u.cols())
        throw RankDeficientError("whitening needs more rows than columns (" + std::to_string(u.rows()) + " x " +
                                 std::to_string(u.cols()) + "); enable the ridge option");
    const Eigen::VectorXd mean = u.values.colwise().mean();
    const Eigen::MatrixXd centered = u.values.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(u.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const double largest = eig.eigenvalues().maxCoeff();
    if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(largest, 1e-300)) {
        if (!options.ridge) throw RankDeficientError("covariance is rank deficient; enable the ridge option");
        const double eps = 1e-6 * cov.trace() / static_cast<double>(cov.cols());
        cov.diagonal().array() += eps;
        eig.compute(cov);
    }
    const Eigen::MatrixXd inv_sqrt =
        eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    return Matrix(centered * inv_sqrt, u.row_labels, u.col_labels);
}

namespace {

struct Line {
    double intercept = 0;
    double slope = 0;
};

Line ols_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    return {my - slope * mx, slope};
}

bool has_two_distinct(const std::vector<double>& x) {
    return std::any_of(x.begin(), x.end(), [&](double v) { return v != x.front(); });
}

}  // namespace

GroupedRegressionResult grouped_regression(std::span<const GroupedRecord> records) {
    require(records.size() >= 3, "grouped regression needs at least three records");
    std::vector<double> xs, ys;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_group;
    for (const auto& rec : records) {
        require(std::isfinite(rec.x) && std::isfinite(rec.y), "non-finite regression record");
        xs.push_back(rec.x);
        ys.push_back(rec.y);
        by_group[rec.group].first.push_back(rec.x);
        by_group[rec.group].second.push_back(rec.y);
    }
    require(has_two_distinct(xs), "every regression record has the same x");

    const Line global = ols_line(xs, ys);
    const auto n = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd resid(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        design(i, 0) = 1;
        design(i, 1) = xs[k];
        resid[i] = ys[k] - global.intercept - global.slope * xs[k];
    }
    const Eigen::MatrixXd bread = (design.transpose() * design).inverse();
    const Eigen::MatrixXd meat = design.transpose() * resid.cwiseAbs2().asDiagonal() * design;
    const double df = static_cast<double>(n - 2);
    const Eigen::MatrixXd cov = bread * meat * bread * (static_cast<double>(n) / df);

    GroupedRegressionResult out;
    auto& g = out.global;
    g.coefficients = {global.intercept, global.slope};
    g.dropped = {false, false};
    g.converged = true;
    for (Eigen::Index k = 0; k < 2; ++k) {
        const double se = std::sqrt(std::max(cov(k, k), 0.0));
        const double beta = g.coefficients[static_cast<std::size_t>(k)];
        g.standard_errors.push_back(se);
        double stat = 0;
        if (se > 0)
            stat = beta / se;
        else if (beta != 0)
            stat = beta > 0 ? kInf : -kInf;
        g.statistics.push_back(stat);
        g.p_values.push_back(student_t_two_sided_p(stat, df));
    }

    for (const auto& [name, xy] : by_group) {
        GroupFit fit;
        fit.n = xy.first.size();
        if (fit.n >= 2 && has_two_distinct(xy.first)) {
            const Line line = ols_line(xy.first, xy.second);
            fit.intercept = line.intercept;
            fit.slope = line.slope;
            fit.own_fit = true;
        } else {
            fit.intercept = global.intercept;
            fit.slope = global.slope;
        }
        out.groups.emplace(name, fit);
    }
    return out;
}

}  // namespace taxoqa::stats
