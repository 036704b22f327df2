#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctxpath/error.hpp"
#include "ctxpath/matrix.hpp"

namespace ctxpath {

// Either a fixed component count or the smallest count whose cumulative
// explained-variance ratio reaches `fraction`.
struct PcaTarget {
    enum class Kind { Components, VarianceFraction };

    Kind kind = Kind::VarianceFraction;
    std::size_t components = 0;
    double fraction = 0.95;

    static PcaTarget fixed(std::size_t m) { return {Kind::Components, m, 0.0}; }
    static PcaTarget variance(double f) { return {Kind::VarianceFraction, 0, f}; }

    friend bool operator==(const PcaTarget&, const PcaTarget&) = default;
};

struct PcaModel {
    std::size_t input_dim = 0;
    std::vector<double> mean;                 // input_dim
    Matrix components;                        // m x input_dim, orthonormal rows
    std::vector<double> explained_variance;   // m, non-increasing
    double total_variance = 0.0;              // trace of the sample covariance

    std::size_t output_dim() const noexcept { return components.rows(); }

    friend bool operator==(const PcaModel&, const PcaModel&) = default;
};

/// Fits on the rows of `x` using the 1/(n-1) covariance. Works on the d x d
/// covariance when d <= n and on the n x n Gram matrix otherwise. Each
/// component is sign-fixed so that its largest-magnitude entry is positive.
/// Zero total variance yields an m = 0 model and a DegenerateData warning.
PcaModel pca_fit(const Matrix& x, PcaTarget target, Diagnostics* diag = nullptr);

std::vector<double> pca_transform(const PcaModel& model, std::span<const double> x);
Matrix pca_transform(const PcaModel& model, const Matrix& x);
std::vector<double> pca_inverse_transform(const PcaModel& model, std::span<const double> z);

}  // namespace ctxpath
