#include "ctxpath/matrix.hpp"

#include <string>

#include "ctxpath/error.hpp"

namespace ctxpath {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols)
        throw Error(ErrorCode::DimMismatch, "matrix buffer size does not match shape");
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    for (const auto& r : rows) m.append_row(r);
    return m;
}

void Matrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && data_.empty()) cols_ = values.size();
    if (values.size() != cols_)
        throw Error(ErrorCode::DimMismatch, "row has " + std::to_string(values.size()) +
                                                " columns, expected " + std::to_string(cols_));
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

}  // namespace ctxpath
