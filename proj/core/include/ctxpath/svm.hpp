#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctxpath/error.hpp"
#include "ctxpath/matrix.hpp"

namespace ctxpath {

struct KernelParams {
    double gamma = 1.0;

    friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

/// exp(-gamma * |x - y|^2)
double rbf_kernel(std::span<const double> x, std::span<const double> y, KernelParams p);

/// gamma = 1 / (m * v), v the mean population variance over the m columns of x.
double scale_gamma(const Matrix& x);

struct SmoOptions {
    double C = 1.0;
    KernelParams kernel;
    double tol = 1e-3;
    // Iteration budget is max_passes * n pair updates; 0 selects 10 * n passes.
    std::size_t max_passes = 0;
    // Gram matrix is cached in full up to this many samples, rows are
    // recomputed on demand beyond it.
    std::size_t full_cache_limit = 4096;
};

struct BinarySvm {
    Matrix support_vectors;          // s x m
    std::vector<double> dual_coef;   // alpha_i * y_i
    double bias = 0.0;
    double C = 1.0;
    KernelParams kernel;
    bool converged = true;
    std::size_t iterations = 0;

    std::size_t dim() const noexcept { return support_vectors.cols(); }
    std::size_t support_count() const noexcept { return dual_coef.size(); }

    friend bool operator==(const BinarySvm&, const BinarySvm&) = default;
};

/// Soft-margin RBF SVM dual solved by SMO with maximal-violating-pair working
/// set selection. Labels must be -1 or +1 with both present.
BinarySvm smo_train(const Matrix& x, std::span<const int> y, const SmoOptions& options,
                    Diagnostics* diag = nullptr);

/// sum_i coef_i K(sv_i, x) + b
double svm_decision(const BinarySvm& model, std::span<const double> x);

/// Dual objective sum(alpha) - 1/2 sum_ij coef_i coef_j K(sv_i, sv_j).
double dual_objective(const BinarySvm& model);

struct PairMachine {
    std::size_t first = 0;   // index into MulticlassSvm::classes, maps to +1
    std::size_t second = 0;  // maps to -1
    BinarySvm machine;

    friend bool operator==(const PairMachine&, const PairMachine&) = default;
};

struct MulticlassSvm {
    std::vector<int> classes;  // ascending
    std::vector<PairMachine> pairs;
    KernelParams kernel;

    std::size_t dim() const noexcept { return pairs.empty() ? 0 : pairs.front().machine.dim(); }

    friend bool operator==(const MulticlassSvm&, const MulticlassSvm&) = default;
};

struct OvoPrediction {
    int label = 0;
    std::vector<int> votes;      // per entry of MulticlassSvm::classes
    std::vector<double> scores;  // summed signed decision margins, same order
};

MulticlassSvm ovo_train(const Matrix& x, std::span<const int> labels, const SmoOptions& options,
                        std::size_t threads = 1, Diagnostics* diag = nullptr);

OvoPrediction ovo_predict(const MulticlassSvm& model, std::span<const double> x);

/// Index of the winner: most votes, then largest score, then lowest index.
std::size_t vote_winner(std::span<const int> votes, std::span<const double> scores);

}  // namespace ctxpath
