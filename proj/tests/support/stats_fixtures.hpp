#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "taxoqa/random.hpp"

namespace taxoqa::testing {

// 50 points on a regular grid, labels drawn from a logistic model with
// intercept -0.5 and slope 1.2.
struct LogisticFixture {
    std::vector<double> x;
    std::vector<int> y;
};

inline LogisticFixture logistic_fixture() {
    LogisticFixture f;
    Rng rng(20240611);
    for (int i = 0; i < 50; ++i) {
        const double x = -2.45 + 0.1 * i;
        const double p = 1 / (1 + std::exp(-(-0.5 + 1.2 * x)));
        f.x.push_back(x);
        f.y.push_back(rng.uniform() < p ? 1 : 0);
    }
    return f;
}

inline double logistic_log_likelihood(const LogisticFixture& f, double b0, double b1) {
    double ll = 0;
    for (std::size_t i = 0; i < f.x.size(); ++i) {
        const double eta = b0 + b1 * f.x[i];
        // log(1 + e^eta), stable.
        const double soft = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
        ll += f.y[i] * eta - soft;
    }
    return ll;
}

// Coarse grid followed by shrinking compass search; derivative free.
inline std::array<double, 2> grid_likelihood_maximum(const LogisticFixture& f) {
    double best0 = 0, best1 = 0, best = -std::numeric_limits<double>::infinity();
    for (double b0 = -5; b0 <= 5; b0 += 0.05)
        for (double b1 = -5; b1 <= 5; b1 += 0.05) {
            const double ll = logistic_log_likelihood(f, b0, b1);
            if (ll > best) {
                best = ll;
                best0 = b0;
                best1 = b1;
            }
        }
    for (double h = 0.05; h > 1e-10; h /= 2) {
        bool moved = true;
        while (moved) {
            moved = false;
            for (const auto& [d0, d1] : {std::pair{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}, {h, h}, {-h, -h},
                                         {h, -h}, {-h, h}}) {
                const double ll = logistic_log_likelihood(f, best0 + d0, best1 + d1);
                if (ll > best) {
                    best = ll;
                    best0 += d0;
                    best1 += d1;
                    moved = true;
                }
            }
        }
    }
    return {best0, best1};
}

// Roots of the characteristic polynomial of a symmetric 3x3 matrix by the
// trigonometric cubic formula, descending.
inline std::array<double, 3> symmetric3_eigenvalues(const Eigen::Matrix3d& a) {
    const double c2 = -a.trace();
    const double c1 = a(0, 0) * a(1, 1) + a(0, 0) * a(2, 2) + a(1, 1) * a(2, 2) - a(0, 1) * a(1, 0) -
                      a(0, 2) * a(2, 0) - a(1, 2) * a(2, 1);
    const double c0 = -(a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                        a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                        a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)));
    // x^3 + c2 x^2 + c1 x + c0; substitute x = t - c2/3.
    const double p = c1 - c2 * c2 / 3;
    const double q = 2 * c2 * c2 * c2 / 27 - c2 * c1 / 3 + c0;
    const double m = 2 * std::sqrt(-p / 3);
    const double arg = std::clamp(3 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3;
    std::array<double, 3> roots;
    for (int k = 0; k < 3; ++k) roots[k] = m * std::cos(theta - 2 * M_PI * k / 3) - c2 / 3;
    std::sort(roots.begin(), roots.end(), std::greater<>());
    return roots;
}

// Dual soft-margin SVM by projected gradient ascent:
// max sum a - 0.5 a'Qa  s.t. 0 <= a <= c, y'a = 0.
struct DualSvm {
    Eigen::VectorXd w;
    double b = 0;
    double primal = 0;
};

inline Eigen::VectorXd project_box_hyperplane(const Eigen::VectorXd& v, const Eigen::VectorXd& y, double c) {
    // Find mu so that sum y_i clip(v_i - mu y_i, 0, c) = 0 by bisection.
    auto g = [&](double mu) {
        double s = 0;
        for (Eigen::Index i = 0; i < v.size(); ++i) s += y[i] * std::clamp(v[i] - mu * y[i], 0.0, c);
        return s;
    };
    double lo = -1e6, hi = 1e6;
    for (int it = 0; it < 200; ++it) {
        const double mid = (lo + hi) / 2;
        if (g(mid) > 0)
            lo = mid;
        else
            hi = mid;
    }
    const double mu = (lo + hi) / 2;
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = std::clamp(v[i] - mu * y[i], 0.0, c);
    return out;
}

inline DualSvm dual_svm(const Eigen::MatrixXd& x, const std::vector<int>& labels, double c) {
    const Eigen::Index n = x.rows();
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = labels[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd q = (y.asDiagonal() * x) * (y.asDiagonal() * x).transpose();
    const double step = 1.0 / std::max(1e-12, q.operatorNorm());
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (int it = 0; it < 200000; ++it) {
        const Eigen::VectorXd grad = Eigen::VectorXd::Ones(n) - q * a;
        a = project_box_hyperplane(a + step * grad, y, c);
    }
    DualSvm d;
    d.w = x.transpose() * a.cwiseProduct(y);
    // Bias from free support vectors, else the midpoint of the feasible interval.
    double sum = 0;
    int count = 0;
    const Eigen::VectorXd f = x * d.w;
    for (Eigen::Index i = 0; i < n; ++i)
        if (a[i] > 1e-6 * c && a[i] < c * (1 - 1e-6)) {
            sum += y[i] - f[i];
            ++count;
        }
    if (count > 0) {
        d.b = sum / count;
    } else {
        double lo = -1e300, hi = 1e300;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (y[i] > 0)
                lo = std::max(lo, 1 - f[i]);
            else
                hi = std::min(hi, -1 - f[i]);
        }
        d.b = (lo + hi) / 2;
    }
    double hinge = 0;
    for (Eigen::Index i = 0; i < n; ++i) hinge += std::max(0.0, 1 - y[i] * (f[i] + d.b));
    d.primal = 0.5 * d.w.squaredNorm() + c * hinge;
    return d;
}

// Two Gaussian clouds in 2-D with centres +/- `offset` along the first axis.
inline void gaussian_clouds(Rng& rng, std::size_t per_class, double offset, double sd, Eigen::MatrixXd& x,
                            std::vector<int>& labels) {
    x.resize(static_cast<Eigen::Index>(2 * per_class), 2);
    labels.clear();
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const int label = i < per_class ? 1 : -1;
        const auto r = static_cast<Eigen::Index>(i);
        x(r, 0) = label * offset + sd * rng.normal();
        x(r, 1) = sd * rng.normal();
        labels.push_back(label);
    }
}

}  // namespace taxoqa::testing
