#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "dnt/errors.hpp"
#include "dnt/features.hpp"

namespace dnt {

/// Symmetric positive semidefinite matrix M defining d(a,b) = sqrt((a-b)' M (a-b)).
struct MetricMatrix {
    Eigen::MatrixXd m;

    static MetricMatrix identity(std::size_t d)
    {
        return {Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))};
    }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(m.rows()); }

    double asymmetry() const { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

    double min_eigenvalue() const
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    bool is_valid(double sym_tol = 1e-10, double psd_tol = 1e-8) const
    {
        return m.rows() == m.cols() && asymmetry() < sym_tol && min_eigenvalue() >= -psd_tol;
    }

    bool operator==(const MetricMatrix& o) const
    {
        return m.rows() == o.m.rows() && m.cols() == o.m.cols() && m == o.m;
    }
};

/// delta' M delta, with tiny negative round-off (> -1e-10) clamped to zero.
inline double squared_mahalanobis(std::span<const double> a, std::span<const double> b, const MetricMatrix& m)
{
    if (a.size() != b.size() || a.size() != m.dim()) throw DimensionError("mahalanobis: dimension mismatch");
    const auto d = static_cast<Eigen::Index>(a.size());
    Eigen::VectorXd delta(d);
    for (Eigen::Index i = 0; i < d; ++i) delta[i] = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)];
    // sequential sum in index order: with M = I this is the plain Euclidean sum, bit for bit
    const Eigen::VectorXd md = m.m * delta;
    double q = 0;
    for (Eigen::Index i = 0; i < d; ++i) q += delta[i] * md[i];
    if (q < 0 && q > -1e-10) q = 0;
    return q;
}

inline double mahalanobis_distance(std::span<const double> a, std::span<const double> b, const MetricMatrix& m)
{
    return std::sqrt(std::max(0.0, squared_mahalanobis(a, b, m)));
}

inline double mahalanobis_distance(const FeatureVector& a, const FeatureVector& b, const MetricMatrix& m)
{
    return mahalanobis_distance(a.values, b.values, m);
}

/// Projection onto the PSD cone: symmetrize, then zero the negative eigenvalues.
inline Eigen::MatrixXd project_psd(const Eigen::MatrixXd& a)
{
    const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd out = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
}

/// Factor U = Q sqrt(Lambda) with U U' = M; maps v to U' v.
class MetricFactor {
public:
    explicit MetricFactor(const MetricMatrix& m)
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m.m + m.m.transpose()));
        u_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(u_.rows()); }

    const Eigen::MatrixXd& u() const noexcept { return u_; }

    std::vector<double> apply(std::span<const double> v) const
    {
        if (v.size() != dim()) throw DimensionError("transform: dimension mismatch");
        const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
        const Eigen::VectorXd y = u_.transpose() * x;
        return {y.data(), y.data() + y.size()};
    }

private:
    Eigen::MatrixXd u_;
};

inline FeatureVector transform(const FeatureVector& v, const MetricMatrix& m)
{
    FeatureVector out = v;
    out.values = MetricFactor(m).apply(v.values);
    return out;
}

/// Stacks equal-length feature vectors as the rows of a matrix.
inline Eigen::MatrixXd to_matrix(std::span<const FeatureVector> vs)
{
    if (vs.empty()) return {};
    const auto d = vs.front().size();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(vs.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (vs[i].size() != d) throw DimensionError("to_matrix: ragged feature vectors");
        for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vs[i].values[j];
    }
    return x;
}

struct Triplet {
    std::uint32_t focal;
    std::uint32_t positive;
    std::uint32_t negative;

    bool operator==(const Triplet&) const = default;
    auto operator<=>(const Triplet&) const = default;
};

struct TripletSet {
    std::vector<Triplet> triplets;
    /// Distinct (focal, positive) target-neighbour pairs, in construction order.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> target_pairs;
    std::size_t k = 0;
};

/// Target neighbours and impostor triplets, computed once under the Euclidean metric.
///
/// For each focal point: the k nearest same-class points are its targets; the
/// impostors are the different-class points among its 3k nearest neighbours
/// overall. Distance ties go to the lower index. Points whose class has fewer
/// than k + 1 members cannot have k targets and are not used as focal points.
inline TripletSet build_triplets(const Eigen::MatrixXd& x, std::span<const int> labels, std::size_t k)
{
    const auto n = static_cast<std::size_t>(x.rows());
    if (labels.size() != n) throw DimensionError("build_triplets: label count differs from point count");
    if (k == 0) throw DomainError("build_triplets: k must be positive");
    for (int l : labels) {
        if (l != 0 && l != 1) throw DomainError("build_triplets: labels must be 0 or 1");
    }
    const auto count0 = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 0));
    const std::size_t class_size[2] = {count0, n - count0};
    if (class_size[0] < k + 1 && class_size[1] < k + 1) {
        throw TrainingError("build_triplets: no class has k + 1 members");
    }

    TripletSet out;
    out.k = k;
    std::vector<std::uint32_t> order(n);
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int li = labels[i];
        if (class_size[li] < k + 1) continue;
        const Eigen::VectorXd d2 = (x.rowwise() - x.row(static_cast<Eigen::Index>(i))).rowwise().squaredNorm();
        for (std::size_t j = 0; j < n; ++j) dist[j] = d2[static_cast<Eigen::Index>(j)];
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return dist[a] < dist[b]; });

        std::vector<std::uint32_t> targets;
        std::vector<std::uint32_t> impostors;
        std::size_t seen = 0;
        for (std::uint32_t j : order) {
            if (j == i) continue;
            if (labels[j] == li) {
                if (targets.size() < k) targets.push_back(j);
            } else if (seen < 3 * k) {
                impostors.push_back(j);
            }
            ++seen;
            if (targets.size() == k && seen >= 3 * k) break;
        }
        for (std::uint32_t j : targets) {
            out.target_pairs.emplace_back(static_cast<std::uint32_t>(i), j);
            for (std::uint32_t l : impostors) {
                out.triplets.push_back({static_cast<std::uint32_t>(i), j, l});
            }
        }
    }
    if (out.target_pairs.empty()) throw TrainingError("build_triplets: no target pairs");
    return out;
}

inline TripletSet build_triplets(std::span<const FeatureVector> features, std::span<const int> labels, std::size_t k)
{
    return build_triplets(to_matrix(features), labels, k);
}

struct LmnnConfig {
    std::size_t k = 25;
    double push_weight = 1.0;
    double margin = 1.0;
    std::size_t max_iters = 200;
    double step_size = 1e-3;
    double tolerance = 1e-6;
    /// Verify symmetry/PSD of every iterate; throws TrainingError on violation.
    bool check_each_iter = false;
};

struct LmnnFit {
    MetricMatrix metric;
    double initial_loss = 0;
    double final_loss = 0;
    std::vector<double> loss_history; ///< loss at M0 and at every accepted step
    std::size_t iterations = 0;       ///< gradient steps attempted
    std::size_t triplet_count = 0;
};

namespace detail {

// Loss and gradient over a fixed triplet set, with pair differences stacked
// as matrix rows so that each pass is two dense products.
class LmnnObjective {
public:
    LmnnObjective(const Eigen::MatrixXd& x, const TripletSet& ts, double mu, double margin)
        : mu_(mu), margin_(margin)
    {
        const auto d = x.cols();
        pull_.resize(static_cast<Eigen::Index>(ts.target_pairs.size()), d);
        std::vector<std::int64_t> pull_index(static_cast<std::size_t>(x.rows()) * static_cast<std::size_t>(x.rows()), -1);
        auto key = [&](std::uint32_t a, std::uint32_t b) {
            return static_cast<std::size_t>(a) * static_cast<std::size_t>(x.rows()) + b;
        };
        for (std::size_t p = 0; p < ts.target_pairs.size(); ++p) {
            const auto [i, j] = ts.target_pairs[p];
            pull_.row(static_cast<Eigen::Index>(p)) = x.row(i) - x.row(j);
            pull_index[key(i, j)] = static_cast<std::int64_t>(p);
        }
        std::vector<std::int64_t> push_index(pull_index.size(), -1);
        std::vector<std::pair<std::uint32_t, std::uint32_t>> push_pairs;
        terms_.reserve(ts.triplets.size());
        for (const auto& t : ts.triplets) {
            auto& slot = push_index[key(t.focal, t.negative)];
            if (slot < 0) {
                slot = static_cast<std::int64_t>(push_pairs.size());
                push_pairs.emplace_back(t.focal, t.negative);
            }
            terms_.push_back({static_cast<std::uint32_t>(pull_index[key(t.focal, t.positive)]),
                              static_cast<std::uint32_t>(slot)});
        }
        push_.resize(static_cast<Eigen::Index>(push_pairs.size()), d);
        for (std::size_t q = 0; q < push_pairs.size(); ++q) {
            push_.row(static_cast<Eigen::Index>(q)) = x.row(push_pairs[q].first) - x.row(push_pairs[q].second);
        }
    }

    struct Eval {
        double loss = 0;
        Eigen::VectorXd pull_d2;
        Eigen::VectorXd push_d2;
    };

    Eval evaluate(const Eigen::MatrixXd& m) const
    {
        Eval e;
        e.pull_d2 = (pull_ * m).cwiseProduct(pull_).rowwise().sum();
        e.push_d2 = push_.rows() > 0 ? Eigen::VectorXd((push_ * m).cwiseProduct(push_).rowwise().sum())
                                     : Eigen::VectorXd();
        double hinge = 0;
        for (const auto& t : terms_) {
            const double v = margin_ + e.pull_d2[t.pull] - e.push_d2[t.push];
            if (v > 0) hinge += v;
        }
        e.loss = e.pull_d2.sum() + mu_ * hinge;
        return e;
    }

    Eigen::MatrixXd gradient(const Eval& e) const
    {
        Eigen::VectorXd w_pull = Eigen::VectorXd::Ones(pull_.rows());
        Eigen::VectorXd w_push = Eigen::VectorXd::Zero(push_.rows());
        for (const auto& t : terms_) {
            if (margin_ + e.pull_d2[t.pull] - e.push_d2[t.push] > 0) {
                w_pull[t.pull] += mu_;
                w_push[t.push] -= mu_;
            }
        }
        Eigen::MatrixXd g = pull_.transpose() * w_pull.asDiagonal() * pull_;
        if (push_.rows() > 0) g.noalias() += push_.transpose() * w_push.asDiagonal() * push_;
        return g;
    }

    std::size_t triplet_count() const noexcept { return terms_.size(); }

private:
    struct Term {
        std::uint32_t pull;
        std::uint32_t push;
    };

    double mu_;
    double margin_;
    Eigen::MatrixXd pull_;
    Eigen::MatrixXd push_;
    std::vector<Term> terms_;
};

} // namespace detail

/// LMNN by full-batch projected gradient descent on M, starting from the identity.
///
/// A step that raises the loss is rejected and the step size halved; training
/// stops after max_iters attempted steps or when an accepted step changes the
/// loss by less than `tolerance` relative. The accepted iterates have
/// non-increasing loss, so the returned metric is the best one seen.
inline LmnnFit fit_lmnn(const Eigen::MatrixXd& x, std::span<const int> labels, const LmnnConfig& cfg)
{
    if (!(cfg.push_weight > 0) || !(cfg.margin > 0) || !(cfg.step_size > 0) || !(cfg.tolerance > 0) || cfg.k == 0) {
        throw DomainError("LmnnConfig: all parameters must be positive");
    }
    const TripletSet ts = build_triplets(x, labels, cfg.k);
    const detail::LmnnObjective objective(x, ts, cfg.push_weight, cfg.margin);

    LmnnFit fit;
    fit.triplet_count = objective.triplet_count();
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(x.cols(), x.cols());
    auto current = objective.evaluate(m);
    if (!std::isfinite(current.loss)) throw TrainingError("LMNN loss is not finite at initialization");
    fit.initial_loss = current.loss;
    fit.loss_history.push_back(current.loss);

    double step = cfg.step_size;
    Eigen::MatrixXd g = objective.gradient(current);
    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
        ++fit.iterations;
        Eigen::MatrixXd candidate = project_psd(m - step * g);
        if (cfg.check_each_iter) {
            const MetricMatrix probe{candidate};
            if (!probe.is_valid()) throw TrainingError("LMNN iterate left the PSD cone");
        }
        auto next = objective.evaluate(candidate);
        if (!std::isfinite(next.loss)) throw TrainingError("LMNN training diverged (non-finite loss)");
        if (next.loss < current.loss) {
            const double rel = (current.loss - next.loss) / std::max(std::fabs(current.loss), 1e-300);
            m = std::move(candidate);
            current = std::move(next);
            fit.loss_history.push_back(current.loss);
            if (rel < cfg.tolerance) break;
            g = objective.gradient(current);
        } else {
            step *= 0.5;
        }
    }
    fit.metric = MetricMatrix{m};
    fit.final_loss = current.loss;
    return fit;
}

inline LmnnFit fit_lmnn(std::span<const FeatureVector> features, std::span<const int> labels, const LmnnConfig& cfg)
{
    return fit_lmnn(to_matrix(features), labels, cfg);
}

inline MetricMatrix train_metric(const Eigen::MatrixXd& x, std::span<const int> labels, const LmnnConfig& cfg)
{
    return fit_lmnn(x, labels, cfg).metric;
}

inline MetricMatrix train_metric(std::span<const FeatureVector> features, std::span<const int> labels,
                                 const LmnnConfig& cfg)
{
    return fit_lmnn(features, labels, cfg).metric;
}

} // namespace dnt
