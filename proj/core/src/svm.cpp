#include "ctxpath/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "ctxpath/parallel.hpp"

namespace ctxpath {

namespace {

constexpr double kTau = 1e-12;
constexpr double kSupportThreshold = 1e-12;

double squared_distance(std::span<const double> x, std::span<const double> y) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        acc += d * d;
    }
    return acc;
}

// Kernel rows K(x_i, .) either from a cached Gram matrix or computed on demand.
class KernelRows {
public:
    KernelRows(const Matrix& x, KernelParams p, std::size_t full_cache_limit)
        : x_(x), p_(p), n_(x.rows()), full_(n_ <= full_cache_limit) {
        if (full_) {
            gram_.assign(n_ * n_, 0.0);
            for (std::size_t i = 0; i < n_; ++i) {
                gram_[i * n_ + i] = 1.0;
                for (std::size_t j = i + 1; j < n_; ++j) {
                    const double k = std::exp(-p_.gamma * squared_distance(x_.row(i), x_.row(j)));
                    gram_[i * n_ + j] = k;
                    gram_[j * n_ + i] = k;
                }
            }
        } else {
            buffers_[0].resize(n_);
            buffers_[1].resize(n_);
        }
    }

    // `slot` selects one of two scratch rows in on-demand mode.
    std::span<const double> row(std::size_t i, int slot) {
        if (full_) return {gram_.data() + i * n_, n_};
        auto& buf = buffers_[slot];
        if (cached_[slot] != i) {
            for (std::size_t j = 0; j < n_; ++j)
                buf[j] = j == i ? 1.0 : std::exp(-p_.gamma * squared_distance(x_.row(i), x_.row(j)));
            cached_[slot] = i;
        }
        return buf;
    }

private:
    const Matrix& x_;
    KernelParams p_;
    std::size_t n_;
    bool full_;
    std::vector<double> gram_;
    std::vector<double> buffers_[2];
    std::size_t cached_[2] = {std::numeric_limits<std::size_t>::max(),
                              std::numeric_limits<std::size_t>::max()};
};

}  // namespace

double rbf_kernel(std::span<const double> x, std::span<const double> y, KernelParams p) {
    if (x.size() != y.size())
        throw Error(ErrorCode::DimMismatch, "kernel arguments have dims " + std::to_string(x.size()) +
                                                " and " + std::to_string(y.size()));
    return std::exp(-p.gamma * squared_distance(x, y));
}

double scale_gamma(const Matrix& x) {
    const std::size_t n = x.rows(), m = x.cols();
    if (n == 0 || m == 0) return 1.0;
    double var_sum = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += x(r, c);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) ss += (x(r, c) - mean) * (x(r, c) - mean);
        var_sum += ss / static_cast<double>(n);
    }
    const double var = var_sum / static_cast<double>(m);
    return var > 0.0 ? 1.0 / (static_cast<double>(m) * var) : 1.0;
}

BinarySvm smo_train(const Matrix& x, std::span<const int> y, const SmoOptions& options,
                    Diagnostics* diag) {
    const std::size_t n = x.rows();
    if (y.size() != n) throw Error(ErrorCode::DimMismatch, "label count does not match sample count");
    if (n < 2) throw Error(ErrorCode::InsufficientSamples, "SVM training needs at least 2 samples");
    if (!(options.C > 0.0)) throw Error(ErrorCode::InvalidArgument, "C must be positive");
    if (!(options.kernel.gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
    bool has_pos = false, has_neg = false;
    for (int label : y) {
        if (label == 1) has_pos = true;
        else if (label == -1) has_neg = true;
        else throw Error(ErrorCode::InvalidArgument, "binary labels must be -1 or +1");
    }
    if (!has_pos || !has_neg)
        throw Error(ErrorCode::SingleClassData, "binary SVM training data contains a single class");

    const double C = options.C;
    const std::size_t passes = options.max_passes == 0 ? 10 * n : options.max_passes;
    const std::size_t max_iter = passes * n;

    KernelRows kernel(x, options.kernel, options.full_cache_limit);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // G = Q alpha - 1
    auto yi = [&](std::size_t i) { return static_cast<double>(y[i]); };
    auto in_up = [&](std::size_t t) { return y[t] == 1 ? alpha[t] < C : alpha[t] > 0.0; };
    auto in_low = [&](std::size_t t) { return y[t] == 1 ? alpha[t] > 0.0 : alpha[t] < C; };

    BinarySvm model;
    model.C = C;
    model.kernel = options.kernel;
    model.converged = false;

    std::size_t iter = 0;
    while (iter < max_iter) {
        std::size_t i = n, j = n;
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -yi(t) * grad[t];
            if (in_up(t) && v > g_max) {
                g_max = v;
                i = t;
            }
            if (in_low(t) && v < g_min) {
                g_min = v;
                j = t;
            }
        }
        if (i == n || j == n || g_max - g_min < options.tol) {
            model.converged = true;
            break;
        }
        ++iter;

        const auto ki = kernel.row(i, 0);
        const auto kj = kernel.row(j, 1);
        const double kij = ki[j];
        const double old_ai = alpha[i], old_aj = alpha[j];

        if (y[i] != y[j]) {
            double quad = 2.0 - 2.0 * kij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = 2.0 - 2.0 * kij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += yi(t) * (yi(i) * ki[t] * dai + yi(j) * kj[t] * daj);
    }
    model.iterations = iter;
    if (!model.converged)
        warn(diag, WarningCode::NonConvergence,
             "SMO stopped after " + std::to_string(iter) + " iterations without reaching tol");

    // rho: mean of y*G over free vectors, midpoint of the feasible interval otherwise.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = yi(t) * grad[t];
        if (alpha[t] >= C) {
            if (y[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            free_sum += yg;
            ++free_count;
        }
    }
    const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);
    model.bias = -rho;

    model.support_vectors = Matrix(0, x.cols());
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > kSupportThreshold) {
            model.support_vectors.append_row(x.row(t));
            model.dual_coef.push_back(alpha[t] * yi(t));
        }
    }
    return model;
}

double svm_decision(const BinarySvm& model, std::span<const double> x) {
    if (model.support_count() > 0 && x.size() != model.dim())
        throw Error(ErrorCode::DimMismatch, "decision input has dim " + std::to_string(x.size()) +
                                                ", model expects " + std::to_string(model.dim()));
    double acc = 0.0;
    for (std::size_t i = 0; i < model.support_count(); ++i)
        acc += model.dual_coef[i] * std::exp(-model.kernel.gamma * squared_distance(model.support_vectors.row(i), x));
    return acc + model.bias;
}

double dual_objective(const BinarySvm& model) {
    const std::size_t s = model.support_count();
    double linear = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
        linear += std::abs(model.dual_coef[i]);
        for (std::size_t j = 0; j < s; ++j)
            quad += model.dual_coef[i] * model.dual_coef[j] *
                    rbf_kernel(model.support_vectors.row(i), model.support_vectors.row(j), model.kernel);
    }
    return linear - 0.5 * quad;
}

MulticlassSvm ovo_train(const Matrix& x, std::span<const int> labels, const SmoOptions& options,
                        std::size_t threads, Diagnostics* diag) {
    if (labels.size() != x.rows()) throw Error(ErrorCode::DimMismatch, "label count does not match sample count");
    const std::set<int> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2)
        throw Error(ErrorCode::SingleClassData, "multiclass training needs at least 2 classes, got " +
                                                    std::to_string(distinct.size()));
    MulticlassSvm model;
    model.classes.assign(distinct.begin(), distinct.end());
    model.kernel = options.kernel;
    for (std::size_t a = 0; a < model.classes.size(); ++a)
        for (std::size_t b = a + 1; b < model.classes.size(); ++b) model.pairs.push_back({a, b, {}});

    std::vector<Diagnostics> pair_diag(model.pairs.size());
    parallel_for(model.pairs.size(), threads, [&](std::size_t p) {
        PairMachine& pm = model.pairs[p];
        const int pos = model.classes[pm.first], neg = model.classes[pm.second];
        Matrix sub(0, x.cols());
        std::vector<int> y;
        for (std::size_t r = 0; r < x.rows(); ++r) {
            if (labels[r] == pos || labels[r] == neg) {
                sub.append_row(x.row(r));
                y.push_back(labels[r] == pos ? 1 : -1);
            }
        }
        pm.machine = smo_train(sub, y, options, &pair_diag[p]);
    });
    if (diag != nullptr)
        for (const auto& d : pair_diag) diag->merge(d);
    return model;
}

std::size_t vote_winner(std::span<const int> votes, std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c) {
        if (votes[c] > votes[best] || (votes[c] == votes[best] && scores[c] > scores[best])) best = c;
    }
    return best;
}

OvoPrediction ovo_predict(const MulticlassSvm& model, std::span<const double> x) {
    if (x.size() != model.dim())
        throw Error(ErrorCode::DimMismatch, "prediction input has dim " + std::to_string(x.size()) +
                                                ", model expects " + std::to_string(model.dim()));
    OvoPrediction out;
    out.votes.assign(model.classes.size(), 0);
    out.scores.assign(model.classes.size(), 0.0);
    for (const PairMachine& pm : model.pairs) {
        const double d = svm_decision(pm.machine, x);
        ++out.votes[d >= 0.0 ? pm.first : pm.second];
        out.scores[pm.first] += d;
        out.scores[pm.second] -= d;
    }
    out.label = model.classes[vote_winner(out.votes, out.scores)];
    return out;
}

}  // namespace ctxpath
