#pragma once

#include <algorithm>
#include <cmath>
#include <memory>

#include "amc/types.hpp"

namespace amc {

/// RBF kernel k(x,z) = exp(-|x-z|^2 / gamma). gamma is a squared length
/// scale, so k is in (0,1] and k(x,x) = 1.
inline double rbf_kernel(const cpoint& x, const cpoint& z, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("rbf_kernel: gamma must be positive");
    return std::exp(-std::norm(x - z) / gamma);
}

/// gamma = 2 * median pairwise squared distance over a deterministic
/// <=200-point subsample. Adapts the kernel width to the point cloud scale.
inline double median_heuristic_gamma(const std::vector<cpoint>& points) {
    if (points.size() < 2) throw std::invalid_argument("median_heuristic_gamma: need >= 2 points");
    std::vector<cpoint> sub;
    const std::size_t target = 200;
    if (points.size() <= target) {
        sub = points;
    } else {
        const std::size_t stride = points.size() / target;
        for (std::size_t i = 0; i < target; ++i) sub.push_back(points[i * stride]);
    }
    std::vector<double> d2;
    d2.reserve(sub.size() * (sub.size() - 1) / 2);
    for (std::size_t i = 0; i < sub.size(); ++i)
        for (std::size_t j = i + 1; j < sub.size(); ++j) d2.push_back(std::norm(sub[i] - sub[j]));
    auto mid = d2.begin() + d2.size() / 2;
    std::nth_element(d2.begin(), mid, d2.end());
    const double med = *mid;
    return med > 0.0 ? 2.0 * med : 1.0;
}

/// Dense RBF Gram matrix, shareable across binary subproblems trained on the
/// same point set (the kernel does not depend on labels).
class KernelMatrix {
public:
    KernelMatrix(const std::vector<cpoint>& points, double gamma)
        : n_(points.size()), gamma_(gamma), data_(n_ * n_) {
        if (!(gamma > 0.0)) throw std::invalid_argument("KernelMatrix: gamma must be positive");
        for (std::size_t i = 0; i < n_; ++i) {
            data_[i * n_ + i] = 1.0;
            for (std::size_t j = i + 1; j < n_; ++j) {
                const double k = std::exp(-std::norm(points[i] - points[j]) / gamma);
                data_[i * n_ + j] = k;
                data_[j * n_ + i] = k;
            }
        }
    }

    std::size_t size() const { return n_; }
    double gamma() const { return gamma_; }
    const double* row(std::size_t i) const { return data_.data() + i * n_; }
    double at(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

private:
    std::size_t n_;
    double gamma_;
    std::vector<double> data_;
};

struct SvmHyperParams {
    double c_reg = 10.0;     // slack penalty
    double gamma = 0.0;      // RBF width; <= 0 selects the median heuristic
    double kkt_tol = 1e-3;
    std::size_t max_passes = 0;  // pair-update cap; 0 means 100 * N

    void validate() const {
        if (!(c_reg > 0.0)) throw std::invalid_argument("c_reg must be positive");
        if (!(kkt_tol > 0.0 && kkt_tol <= 0.1)) throw std::invalid_argument("kkt_tol must be in (0, 0.1]");
    }
};

/// Trained binary classifier in dual form.
struct DualSolution {
    std::vector<double> alphas;
    double bias = 0.0;
    bool converged = false;
    double gamma = 0.0;
    double c_reg = 0.0;
    std::vector<std::size_t> sv_indices;          // alpha > sv_eps
    std::vector<std::size_t> bounded_sv_indices;  // alpha >= C - sv_eps (margin violators)
    LabeledSet training_points;                   // +/-1 relabeled copy
    std::vector<double> train_margins;            // sum_m alpha_m y_m K(x_m, x_n), no bias

    double sv_eps() const { return 1e-6 * c_reg; }
};

/// Value of the kernelized dual objective
///   sum_n a_n - 1/2 sum_n sum_m a_n a_m y_n y_m K(x_n, x_m)
/// for an arbitrary multiplier vector. No feasibility check.
inline double dual_objective(const std::vector<double>& alphas, const LabeledSet& data,
                             double gamma) {
    if (alphas.size() != data.size()) throw std::invalid_argument("dual_objective: size mismatch");
    const std::size_t n = alphas.size();
    double linear = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        linear += alphas[i];
        if (alphas[i] == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (alphas[j] == 0.0) continue;
            quad += alphas[i] * alphas[j] * data.labels[i] * data.labels[j] *
                    rbf_kernel(data.points[i], data.points[j], gamma);
        }
    }
    return linear - 0.5 * quad;
}

/// Maximize the dual by pairwise coordinate ascent (maximal-violating-pair
/// selection). Keeps sum(alpha*y) = 0 and 0 <= alpha <= C exactly; stops when
/// the KKT violation gap falls below kkt_tol. Deterministic.
inline DualSolution solve_dual(const LabeledSet& data, const SvmHyperParams& hp,
                               const KernelMatrix* shared_gram = nullptr) {
    hp.validate();
    const std::size_t n = data.size();
    if (n < 2) throw std::invalid_argument("solve_dual: need at least two points");
    bool has_pos = false, has_neg = false;
    for (int y : data.labels) {
        if (y == 1) has_pos = true;
        else if (y == -1) has_neg = true;
        else throw std::invalid_argument("solve_dual: labels must be +/-1");
    }
    if (!has_pos || !has_neg) throw std::invalid_argument("solve_dual: both labels required");

    std::unique_ptr<KernelMatrix> owned;
    const KernelMatrix* gram = shared_gram;
    double gamma = hp.gamma;
    if (!gram) {
        if (gamma <= 0.0) gamma = median_heuristic_gamma(data.points);
        owned = std::make_unique<KernelMatrix>(data.points, gamma);
        gram = owned.get();
    } else {
        if (gram->size() != n) throw std::invalid_argument("solve_dual: gram size mismatch");
        gamma = gram->gamma();
    }

    const double c = hp.c_reg;
    const std::size_t max_iters = hp.max_passes ? hp.max_passes : 100 * n;

    std::vector<double> alpha(n, 0.0);
    std::vector<double> f(n, 0.0);  // sum_m alpha_m y_m K(m, n)
    const auto& y = data.labels;

    bool converged = false;
    double up_val = 0.0, low_val = 0.0;
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        // i maximizes y-f over points free to increase their alpha along +y,
        // j minimizes it over points free to decrease; gap <= tol is KKT.
        std::ptrdiff_t i = -1, j = -1;
        up_val = -std::numeric_limits<double>::infinity();
        low_val = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            const double v = y[k] - f[k];
            const bool can_up = (y[k] > 0 && alpha[k] < c) || (y[k] < 0 && alpha[k] > 0.0);
            const bool can_down = (y[k] > 0 && alpha[k] > 0.0) || (y[k] < 0 && alpha[k] < c);
            if (can_up && v > up_val) {
                up_val = v;
                i = static_cast<std::ptrdiff_t>(k);
            }
            if (can_down && v < low_val) {
                low_val = v;
                j = static_cast<std::ptrdiff_t>(k);
            }
        }
        if (i < 0 || j < 0 || up_val - low_val <= hp.kkt_tol) {
            converged = (i < 0 || j < 0) ? true : (up_val - low_val <= hp.kkt_tol);
            break;
        }

        const std::size_t ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
        const double eta = std::max(gram->at(ii, ii) + gram->at(jj, jj) - 2.0 * gram->at(ii, jj), 1e-12);
        double t = (up_val - low_val) / eta;
        // box limits for alpha_i moving along +y_i and alpha_j along -y_j
        t = std::min(t, y[ii] > 0 ? c - alpha[ii] : alpha[ii]);
        t = std::min(t, y[jj] > 0 ? alpha[jj] : c - alpha[jj]);
        if (t <= 0.0) break;  // numerically stuck at a bound

        alpha[ii] += y[ii] * t;
        alpha[jj] -= y[jj] * t;
        // snap to the box to keep constraints exact
        for (std::size_t k : {ii, jj}) {
            if (alpha[k] < 1e-12 * c) alpha[k] = 0.0;
            if (alpha[k] > c - 1e-12 * c) alpha[k] = c;
        }
        const double* row_i = gram->row(ii);
        const double* row_j = gram->row(jj);
        for (std::size_t k = 0; k < n; ++k) f[k] += t * (row_i[k] - row_j[k]);
    }

    DualSolution sol;
    sol.alphas = std::move(alpha);
    sol.converged = converged;
    sol.gamma = gamma;
    sol.c_reg = c;
    sol.training_points = data;
    sol.train_margins = std::move(f);

    const double eps = sol.sv_eps();
    double bias_sum = 0.0;
    std::size_t bias_count = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (sol.alphas[k] > eps) {
            sol.sv_indices.push_back(k);
            if (sol.alphas[k] >= c - eps) sol.bounded_sv_indices.push_back(k);
            else {
                bias_sum += y[k] - sol.train_margins[k];
                ++bias_count;
            }
        }
    }
    if (bias_count > 0) sol.bias = bias_sum / double(bias_count);
    else sol.bias = 0.5 * (up_val + low_val);  // no free SVs: midpoint of the KKT interval
    return sol;
}

/// Decision value and label for a new point: score = bias + SV kernel sum,
/// label = sign(score) with sign(0) = +1.
inline std::pair<double, int> decision(const DualSolution& model, const cpoint& x) {
    double score = model.bias;
    for (std::size_t k : model.sv_indices)
        score += model.alphas[k] * model.training_points.labels[k] *
                 rbf_kernel(model.training_points.points[k], x, model.gamma);
    return {score, score >= 0.0 ? 1 : -1};
}

/// One-vs-rest reduction: one binary dual per class, trained on the shared
/// point set with +/-1 relabeling. Class prediction is the argmax of the
/// per-class scores (ties to the lowest class index).
struct MulticlassModel {
    std::vector<DualSolution> binaries;  // index c -> model for class c+1
    int num_classes = 0;

    int predict(const cpoint& x) const {
        int best = 1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < num_classes; ++c) {
            const double s = decision(binaries[c], x).first;
            if (s > best_score) {
                best_score = s;
                best = c + 1;
            }
        }
        return best;
    }
};

inline MulticlassModel train_multiclass(const LabeledSet& data, const SvmHyperParams& hp,
                                        const KernelMatrix* shared_gram = nullptr) {
    int m = 0;
    for (int l : data.labels) {
        if (l < 1) throw std::invalid_argument("train_multiclass: labels must be 1..M");
        m = std::max(m, l);
    }
    if (m < 2) throw std::invalid_argument("train_multiclass: need at least two classes");

    MulticlassModel model;
    model.num_classes = m;
    model.binaries.reserve(m);
    for (int c = 1; c <= m; ++c) {
        LabeledSet binary;
        binary.points = data.points;
        binary.labels.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            binary.labels[i] = data.labels[i] == c ? 1 : -1;
        model.binaries.push_back(solve_dual(binary, hp, shared_gram));
    }
    return model;
}

/// Split the training set into correct vs incorrect symbols: a symbol is
/// incorrect iff it is a margin violator (bounded SV) in its own class's
/// binary model, or the argmax prediction disagrees with its label.
inline std::pair<LabeledSet, LabeledSet> filter_correct(const MulticlassModel& model,
                                                        const LabeledSet& data) {
    const std::size_t n = data.size();
    for (const auto& b : model.binaries)
        if (b.training_points.size() != n)
            throw std::invalid_argument("filter_correct: model/data size mismatch");

    LabeledSet correct, incorrect;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = data.labels[i];
        const DualSolution& own = model.binaries[label - 1];
        bool bad = own.alphas[i] >= own.c_reg - own.sv_eps();
        if (!bad) {
            int best = 1;
            double best_score = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < model.num_classes; ++c) {
                const DualSolution& b = model.binaries[c];
                const double s = b.train_margins[i] + b.bias;
                if (s > best_score) {
                    best_score = s;
                    best = c + 1;
                }
            }
            bad = best != label;
        }
        auto& dst = bad ? incorrect : correct;
        dst.points.push_back(data.points[i]);
        dst.labels.push_back(label);
    }
    return {std::move(correct), std::move(incorrect)};
}

}  // namespace amc
