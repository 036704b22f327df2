#include "ctxpath/pca.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace ctxpath {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kRankTolerance = 1e-12;
constexpr double kFractionSlack = 1e-12;

void fix_sign(std::span<double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    if (v[best] < 0.0)
        for (double& e : v) e = -e;
}

}  // namespace

PcaModel pca_fit(const Matrix& x, PcaTarget target, Diagnostics* diag) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n < 2) throw Error(ErrorCode::InsufficientSamples, "PCA needs at least 2 samples, got " + std::to_string(n));
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "PCA needs at least one input dimension");
    const std::size_t max_m = std::min(n - 1, d);
    if (target.kind == PcaTarget::Kind::Components && target.components > max_m)
        throw Error(ErrorCode::InvalidArgument, "requested " + std::to_string(target.components) +
                                                    " components but at most " + std::to_string(max_m) +
                                                    " are available");
    if (target.kind == PcaTarget::Kind::VarianceFraction &&
        !(target.fraction > 0.0 && target.fraction <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "variance fraction must lie in (0, 1]");

    const Eigen::Map<const RowMajor> data(x.data().data(), static_cast<Eigen::Index>(n),
                                          static_cast<Eigen::Index>(d));
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const RowMajor centered = data.rowwise() - mean;
    const double denom = static_cast<double>(n - 1);

    PcaModel model;
    model.input_dim = d;
    model.mean.assign(mean.data(), mean.data() + d);
    model.total_variance = centered.squaredNorm() / denom;
    model.components = Matrix(0, d);

    if (!(model.total_variance > 0.0)) {
        warn(diag, WarningCode::DegenerateData, "training data has zero total variance");
        return model;
    }

    // Eigenpairs in descending order of eigenvalue; vectors as rows of length d.
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
    if (d <= n) {
        const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        if (eig.info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "eigendecomposition failed");
        for (Eigen::Index i = static_cast<Eigen::Index>(d) - 1; i >= 0; --i) {
            values.push_back(eig.eigenvalues()(i));
            const Eigen::VectorXd v = eig.eigenvectors().col(i);
            vectors.emplace_back(v.data(), v.data() + d);
        }
    } else {
        const Eigen::MatrixXd gram = (centered * centered.transpose()) / denom;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        if (eig.info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "eigendecomposition failed");
        const double top = eig.eigenvalues()(static_cast<Eigen::Index>(n) - 1);
        for (Eigen::Index i = static_cast<Eigen::Index>(n) - 1; i >= 0; --i) {
            const double lambda = eig.eigenvalues()(i);
            if (!(lambda > kRankTolerance * top)) break;
            Eigen::VectorXd v = centered.transpose() * eig.eigenvectors().col(i);
            v.normalize();
            values.push_back(lambda);
            vectors.emplace_back(v.data(), v.data() + d);
        }
    }

    std::size_t m = 0;
    if (target.kind == PcaTarget::Kind::Components) {
        m = target.components;
        if (m > values.size()) {
            warn(diag, WarningCode::DegenerateData,
                 "only " + std::to_string(values.size()) + " non-degenerate components available");
            m = values.size();
        }
    } else {
        double cumulative = 0.0;
        const std::size_t limit = std::min(max_m, values.size());
        while (m < limit) {
            cumulative += values[m];
            ++m;
            if (cumulative / model.total_variance >= target.fraction - kFractionSlack) break;
        }
    }

    model.components = Matrix(m, d);
    model.explained_variance.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto row = model.components.row(i);
        std::copy(vectors[i].begin(), vectors[i].end(), row.begin());
        fix_sign(row);
        model.explained_variance[i] = values[i];
    }
    return model;
}

std::vector<double> pca_transform(const PcaModel& model, std::span<const double> x) {
    if (x.size() != model.input_dim)
        throw Error(ErrorCode::DimMismatch, "PCA input has dim " + std::to_string(x.size()) +
                                                ", model expects " + std::to_string(model.input_dim));
    std::vector<double> centered(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) centered[j] = x[j] - model.mean[j];
    std::vector<double> z(model.output_dim(), 0.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
        const auto c = model.components.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) acc += c[j] * centered[j];
        z[i] = acc;
    }
    return z;
}

Matrix pca_transform(const PcaModel& model, const Matrix& x) {
    Matrix out(x.rows(), model.output_dim());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto z = pca_transform(model, x.row(r));
        std::copy(z.begin(), z.end(), out.row(r).begin());
    }
    return out;
}

std::vector<double> pca_inverse_transform(const PcaModel& model, std::span<const double> z) {
    if (z.size() != model.output_dim())
        throw Error(ErrorCode::DimMismatch, "PCA code has dim " + std::to_string(z.size()) +
                                                ", model has " + std::to_string(model.output_dim()));
    std::vector<double> x = model.mean;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const auto c = model.components.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += z[i] * c[j];
    }
    return x;
}

}  // namespace ctxpath
