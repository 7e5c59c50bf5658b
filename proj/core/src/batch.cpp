#include "fastop/batch.hpp"

#include <algorithm>
#include <cmath>

namespace fastop {

Shape::Shape(index_t r, index_t c) : rows(r), cols(c) {
    if (r == 0 || c == 0) {
        throw InvalidArgument("shape must be at least 1x1, got " + std::to_string(r) + "x" +
                              std::to_string(c));
    }
}

std::string Shape::str() const { return std::to_string(rows) + "x" + std::to_string(cols); }

DenseBatch::DenseBatch(index_t rows, index_t cols, ScalarField field) : rows_(rows), cols_(cols) {
    if (field == ScalarField::Real64) {
        data_ = std::vector<double>(rows * cols, 0.0);
    } else {
        data_ = std::vector<cplx>(rows * cols, cplx{});
    }
}

DenseBatch::DenseBatch(index_t rows, index_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (std::get<0>(data_).size() != rows * cols) {
        throw DimensionMismatch("batch entries length " + std::to_string(std::get<0>(data_).size()) +
                                " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
    }
}

DenseBatch::DenseBatch(index_t rows, index_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (std::get<1>(data_).size() != rows * cols) {
        throw DimensionMismatch("batch entries length " + std::to_string(std::get<1>(data_).size()) +
                                " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
    }
}

DenseBatch DenseBatch::column(std::vector<double> v) {
    const index_t n = v.size();
    return {n, 1, std::move(v)};
}

DenseBatch DenseBatch::column(std::vector<cplx> v) {
    const index_t n = v.size();
    return {n, 1, std::move(v)};
}

DenseBatch DenseBatch::identity(index_t n, ScalarField field) {
    DenseBatch out(n, n, field);
    for (index_t i = 0; i < n; ++i) out.set(i, i, 1.0);
    return out;
}

cplx DenseBatch::operator()(index_t i, index_t j) const {
    assert(i < rows_ && j < cols_);
    return std::visit([&](const auto& v) { return cplx(v[j * rows_ + i]); }, data_);
}

void DenseBatch::set(index_t i, index_t j, cplx v) {
    assert(i < rows_ && j < cols_);
    if (auto* r = std::get_if<std::vector<double>>(&data_)) {
        if (v.imag() != 0.0) throw InvalidArgument("cannot store a complex value in a real batch");
        (*r)[j * rows_ + i] = v.real();
    } else {
        std::get<1>(data_)[j * rows_ + i] = v;
    }
}

DenseBatch DenseBatch::as_complex() const { return as_field(ScalarField::Complex128); }

DenseBatch DenseBatch::as_field(ScalarField f) const {
    if (f == field()) return *this;
    if (f == ScalarField::Complex128) {
        const auto& src = std::get<0>(data_);
        return {rows_, cols_, std::vector<cplx>(src.begin(), src.end())};
    }
    const auto& src = std::get<1>(data_);
    std::vector<double> out(src.size());
    std::transform(src.begin(), src.end(), out.begin(), [](cplx z) { return z.real(); });
    return {rows_, cols_, std::move(out)};
}

DenseBatch DenseBatch::columns(index_t first, index_t count) const {
    if (first + count > cols_) throw IndexOutOfRange("column range exceeds batch width");
    return std::visit(
        [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            V out(v.begin() + static_cast<std::ptrdiff_t>(first * rows_),
                  v.begin() + static_cast<std::ptrdiff_t>((first + count) * rows_));
            return DenseBatch(rows_, count, std::move(out));
        },
        data_);
}

double DenseBatch::max_abs() const {
    return std::visit(
        [](const auto& v) {
            double m = 0.0;
            for (const auto& x : v) m = std::max(m, std::abs(x));
            return m;
        },
        data_);
}

double DenseBatch::norm() const {
    return std::visit(
        [](const auto& v) {
            double s = 0.0;
            for (const auto& x : v) s += std::norm(x);
            return std::sqrt(s);
        },
        data_);
}

cplx inner(const DenseBatch& a, const DenseBatch& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch("inner product of batches with different shapes");
    }
    cplx s{};
    for (index_t j = 0; j < a.cols(); ++j) {
        for (index_t i = 0; i < a.rows(); ++i) s += a(i, j) * std::conj(b(i, j));
    }
    return s;
}

}  // namespace fastop
