#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "loplab/error.hpp"
#include "loplab/pcm.hpp"

namespace loplab {

struct PerronOptions {
    double tolerance = 1e-14;
    std::size_t max_iterations = 1'000'000;
};

struct PerronResult {
    double lambda_max = 0.0;
    Eigen::VectorXd w;  ///< right Perron vector, unit sum
    std::size_t iterations = 0;
    double residual = 0.0;  ///< max |(A w - lambda w)_i|

    Weights weights() const { return Weights::normalized(std::vector<double>(w.data(), w.data() + w.size())); }
};

namespace detail {

inline void check_positive_square(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw DimensionMismatch("perron: matrix must be square and non-empty");
    if (!(a.array() > 0.0).all() || !a.allFinite()) throw Error("perron: all entries must be finite and strictly positive");
}

/// Power iteration from `start` (positive, any scale). Stops once both the
/// unit-sum iterate and the eigenvalue estimate sum(A x) change by at most
/// `tolerance` relatively.
inline PerronResult power_iteration(const Eigen::MatrixXd& a, Eigen::VectorXd x, const PerronOptions& opts) {
    x /= x.sum();
    double lambda = std::numeric_limits<double>::infinity();
    Eigen::VectorXd y(x.size());
    for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
        y.noalias() = a * x;
        const double next_lambda = y.sum();
        y /= next_lambda;
        const double vec_change = ((y - x).array().abs() / y.array()).maxCoeff();
        const double lambda_change = std::abs(next_lambda - lambda) / next_lambda;
        x.swap(y);
        lambda = next_lambda;
        if (vec_change <= opts.tolerance && lambda_change <= opts.tolerance) {
            PerronResult r;
            r.lambda_max = (a * x).sum();
            r.residual = (a * x - r.lambda_max * x).cwiseAbs().maxCoeff();
            r.w = std::move(x);
            r.iterations = it;
            return r;
        }
    }
    throw ConvergenceError("perron: power iteration did not converge within the iteration cap");
}

}  // namespace detail

/// Dominant eigenpair of a positive matrix by power iteration from the
/// uniform vector.
inline PerronResult perron(const Eigen::MatrixXd& a, const PerronOptions& opts = {}) {
    detail::check_positive_square(a);
    return detail::power_iteration(a, Eigen::VectorXd::Constant(a.rows(), 1.0 / static_cast<double>(a.rows())), opts);
}

inline PerronResult perron(const GeneralPcm& pcm, const PerronOptions& opts = {}) { return perron(pcm.to_dense(), opts); }

struct EmOptions {
    double lambda_tolerance = 1e-12;    ///< lambda_max change per sweep
    double gradient_tolerance = 1e-11;  ///< max |d lambda_max / d log x_ij|
    std::size_t max_sweeps = 10'000;
    PerronOptions perron{};
};

struct CompletionResult {
    GeneralPcm completed;
    std::vector<GeneralPcm::Entry> filled;  ///< upper-triangular filled positions
    double lambda_max = 0.0;
    PerronResult perron;
    Eigen::VectorXd left;  ///< left Perron vector, unit sum
    std::vector<double> lambda_history;  ///< lambda_max after each sweep, starting from the all-ones fill
    std::size_t sweeps = 0;
    double gradient_norm = 0.0;
};

namespace detail {

/// lambda_max of the completion as a function of t = log x over the missing
/// upper positions. With this parametrization lambda_max is convex, and its
/// gradient is (v_i a_ij w_j - v_j a_ji w_i) / (v . w) with v, w the left and
/// right Perron vectors.
class LambdaSurface {
public:
    struct Point {
        Eigen::VectorXd t;
        Eigen::MatrixXd a;
        PerronResult right;
        Eigen::VectorXd left;
        Eigen::VectorXd gradient;
        double lambda = 0.0;
    };

    LambdaSurface(const GeneralPcm& pcm, const PerronOptions& opts) : opts_(opts), base_(pcm.size(), pcm.size()) {
        const std::size_t n = pcm.size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) base_(idx(i), idx(j)) = pcm.known(i, j) ? pcm.value(i, j) : 1.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!pcm.known(i, j)) missing_.push_back({i, j});
            }
        }
    }

    std::size_t dimension() const { return missing_.size(); }
    std::span<const Edge> missing() const { return missing_; }

    Point evaluate(const Eigen::VectorXd& t, const Point* warm) const {
        Point p;
        p.t = t;
        p.a = base_;
        for (std::size_t k = 0; k < missing_.size(); ++k) {
            const double x = std::exp(t[idx(k)]);
            p.a(idx(missing_[k].from), idx(missing_[k].to)) = x;
            p.a(idx(missing_[k].to), idx(missing_[k].from)) = 1.0 / x;
        }
        const auto n = base_.rows();
        const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
        p.right = power_iteration(p.a, warm ? warm->right.w : uniform, opts_);
        p.left = power_iteration(p.a.transpose(), warm ? warm->left : uniform, opts_).w;
        p.lambda = p.right.lambda_max;
        const double vw = p.left.dot(p.right.w);
        p.gradient.resize(static_cast<Eigen::Index>(missing_.size()));
        for (std::size_t k = 0; k < missing_.size(); ++k) {
            const auto i = idx(missing_[k].from);
            const auto j = idx(missing_[k].to);
            p.gradient[idx(k)] = (p.left[i] * p.a(i, j) * p.right.w[j] - p.left[j] * p.a(j, i) * p.right.w[i]) / vw;
        }
        return p;
    }

    /// Central differences of the analytic gradient.
    Eigen::MatrixXd hessian(const Point& at) const {
        constexpr double h = 1e-4;
        const auto d = static_cast<Eigen::Index>(missing_.size());
        Eigen::MatrixXd hess(d, d);
        for (Eigen::Index k = 0; k < d; ++k) {
            Eigen::VectorXd tp = at.t;
            Eigen::VectorXd tm = at.t;
            tp[k] += h;
            tm[k] -= h;
            hess.col(k) = (evaluate(tp, &at).gradient - evaluate(tm, &at).gradient) / (2.0 * h);
        }
        return 0.5 * (hess + hess.transpose());
    }

private:
    static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

    PerronOptions opts_;
    Eigen::MatrixXd base_;
    std::vector<Edge> missing_;
};

inline Eigen::VectorXd newton_direction(const Eigen::MatrixXd& hess, const Eigen::VectorXd& grad) {
    const auto d = hess.rows();
    const double scale = std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
    double shift = 0.0;
    for (int attempt = 0; attempt < 40; ++attempt) {
        Eigen::LLT<Eigen::MatrixXd> llt(hess + shift * Eigen::MatrixXd::Identity(d, d));
        if (llt.info() == Eigen::Success) {
            Eigen::VectorXd p = llt.solve(-grad);
            if (p.allFinite() && p.dot(grad) < 0.0) return p;
        }
        shift = shift == 0.0 ? 1e-10 * scale : shift * 10.0;
    }
    return -grad;
}

}  // namespace detail

/// Completion of an incomplete matrix minimizing lambda_max over the missing
/// entries, found by damped Newton steps on t = log x. Every accepted sweep
/// keeps lambda_max non-increasing up to rounding.
inline CompletionResult em_complete(const GeneralPcm& pcm, const EmOptions& opts = {}) {
    if (!is_weakly_connected(pcm)) throw NotConnected();

    detail::LambdaSurface surface(pcm, opts.perron);
    const auto d = static_cast<Eigen::Index>(surface.dimension());
    auto point = surface.evaluate(Eigen::VectorXd::Zero(d), nullptr);

    CompletionResult result{pcm, {}, 0.0, {}, {}, {point.lambda}, 0, 0.0};
    double grad_norm = d > 0 ? point.gradient.cwiseAbs().maxCoeff() : 0.0;
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * point.lambda;

    while (d > 0 && grad_norm > opts.gradient_tolerance) {
        if (result.sweeps >= opts.max_sweeps) throw ConvergenceError("em_complete: sweep cap reached");
        const Eigen::VectorXd step = detail::newton_direction(surface.hessian(point), point.gradient);
        const double slope = point.gradient.dot(step);

        bool accepted = false;
        double scale = 1.0;
        for (int halving = 0; halving < 40 && !accepted; ++halving, scale *= 0.5) {
            auto trial = surface.evaluate(point.t + scale * step, &point);
            const double trial_grad = trial.gradient.cwiseAbs().maxCoeff();
            const bool armijo = trial.lambda <= point.lambda + 1e-4 * scale * slope;
            const bool flat = trial.lambda <= point.lambda + slack && trial_grad < grad_norm;
            if (armijo || flat) {
                const double change = point.lambda - trial.lambda;
                const double moved = scale * step.cwiseAbs().maxCoeff();
                point = std::move(trial);
                grad_norm = trial_grad;
                accepted = true;
                ++result.sweeps;
                result.lambda_history.push_back(point.lambda);
                if (std::abs(change) < opts.lambda_tolerance && moved < 1e-10) grad_norm = 0.0;
            }
        }
        if (!accepted) {
            // No representable decrease left; accept only if already stationary.
            if (grad_norm <= 1e-8) break;
            throw ConvergenceError("em_complete: line search failed away from a stationary point");
        }
    }

    std::vector<GeneralPcm::Entry> filled;
    GeneralPcm completed = pcm;
    for (std::size_t k = 0; k < surface.dimension(); ++k) {
        const Edge e = surface.missing()[k];
        const double x = std::exp(point.t[static_cast<Eigen::Index>(k)]);
        filled.push_back({e.from, e.to, x});
        completed = completed.with_entry(e.from, e.to, x);
    }
    result.completed = std::move(completed);
    result.filled = std::move(filled);
    result.lambda_max = point.lambda;
    result.perron = std::move(point.right);
    result.left = std::move(point.left);
    result.gradient_norm = d > 0 ? point.gradient.cwiseAbs().maxCoeff() : 0.0;
    return result;
}

/// max over filled positions of |x_ij w_j / w_i - 1|: distance of the
/// completion from being reproduced by its own Perron ratios.
inline double fixpoint_residual(const CompletionResult& r) {
    double worst = 0.0;
    for (const auto& f : r.filled) {
        const auto i = static_cast<Eigen::Index>(f.row);
        const auto j = static_cast<Eigen::Index>(f.col);
        worst = std::max(worst, std::abs(f.value * r.perron.w[j] / r.perron.w[i] - 1.0));
    }
    return worst;
}

/// max over filled positions of |x_ij^2 v_i w_j / (v_j w_i) - 1|, which is
/// zero exactly at a stationary point of lambda_max.
inline double stationarity_residual(const CompletionResult& r) {
    double worst = 0.0;
    for (const auto& f : r.filled) {
        const auto i = static_cast<Eigen::Index>(f.row);
        const auto j = static_cast<Eigen::Index>(f.col);
        const double ratio = f.value * f.value * r.left[i] * r.perron.w[j] / (r.left[j] * r.perron.w[i]);
        worst = std::max(worst, std::abs(ratio - 1.0));
    }
    return worst;
}

inline Weights em_weights(const GeneralPcm& pcm, const EmOptions& opts = {}) {
    if (pcm.is_complete()) return perron(pcm, opts.perron).weights();
    return em_complete(pcm, opts).perron.weights();
}

/// (lambda_max - n) / excess, where excess is the random-matrix mean
/// lambda_max minus n. Clamped at 0 against rounding below n.
inline double cr_index(const Eigen::MatrixXd& a, double random_excess) {
    if (!(random_excess > 0.0)) throw Error("cr_index: random index excess must be > 0");
    const double n = static_cast<double>(a.rows());
    return std::max(0.0, (perron(a).lambda_max - n) / random_excess);
}

inline double cr_index(const GeneralPcm& pcm, double random_excess) { return cr_index(pcm.to_dense(), random_excess); }

/// The 17 values 1/9, ..., 1/2, 1, 2, ..., 9.
inline const std::array<double, 17>& saaty_scale() {
    static const std::array<double, 17> scale = [] {
        std::array<double, 17> s{};
        for (int k = 0; k < 8; ++k) s[static_cast<std::size_t>(k)] = 1.0 / (9 - k);
        for (int k = 0; k < 9; ++k) s[static_cast<std::size_t>(8 + k)] = 1.0 + k;
        return s;
    }();
    return scale;
}

/// Uniform index in [0, 17) from raw 64-bit mt19937_64 output by rejection,
/// so draws depend only on the engine (fully specified by the standard).
inline std::size_t draw_saaty_index(std::mt19937_64& rng) {
    constexpr std::uint64_t buckets = 17;
    constexpr std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % buckets;
    for (;;) {
        const std::uint64_t u = rng();
        if (u < limit) return static_cast<std::size_t>(u % buckets);
    }
}

/// Random reciprocal matrix with each upper entry drawn in row-major order.
inline Eigen::MatrixXd random_saaty_matrix(std::size_t n, std::mt19937_64& rng) {
    const auto& scale = saaty_scale();
    const auto sn = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd a = Eigen::MatrixXd::Ones(sn, sn);
    for (Eigen::Index i = 0; i < sn; ++i) {
        for (Eigen::Index j = i + 1; j < sn; ++j) {
            a(i, j) = scale[draw_saaty_index(rng)];
            a(j, i) = 1.0 / a(i, j);
        }
    }
    return a;
}

/// Monte Carlo mean lambda_max over `samples` random n x n Saaty-scale
/// matrices, seeded with mt19937_64(seed).
inline double estimate_random_index(std::size_t n, std::size_t samples, std::uint64_t seed) {
    if (n < 3) throw Error("estimate_random_index: n must be >= 3");
    if (samples < 1) throw Error("estimate_random_index: samples must be >= 1");
    std::mt19937_64 rng(seed);
    double total = 0.0;
    for (std::size_t s = 0; s < samples; ++s) total += perron(random_saaty_matrix(n, rng)).lambda_max;
    return total / static_cast<double>(samples);
}

}  // namespace loplab
