#pragma once

#include <cassert>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fastop/errors.hpp"
#include "fastop/scalar.hpp"

namespace fastop {

/// Operator dimensions: `rows` x `cols`, both at least one.
struct Shape {
    index_t rows = 1;
    index_t cols = 1;

    Shape() = default;
    Shape(index_t r, index_t c);

    [[nodiscard]] bool square() const noexcept { return rows == cols; }
    [[nodiscard]] std::string str() const;
    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Non-owning column-major view with leading dimension equal to `rows`.
template <class T>
struct MatrixView {
    T* data = nullptr;
    index_t rows = 0;
    index_t cols = 0;

    [[nodiscard]] std::span<T> col(index_t j) const noexcept { return {data + j * rows, rows}; }
    [[nodiscard]] T& operator()(index_t i, index_t j) const noexcept { return data[j * rows + i]; }
    [[nodiscard]] index_t size() const noexcept { return rows * cols; }

    operator MatrixView<const T>() const noexcept { return {data, rows, cols}; }  // NOLINT
};

template <class T>
using ConstMatrixView = MatrixView<const T>;

/// A column-major block of `cols` vectors of length `rows`. Real batches store
/// doubles, complex batches store std::complex<double>.
class DenseBatch {
public:
    DenseBatch() = default;
    /// Zero-filled batch.
    DenseBatch(index_t rows, index_t cols, ScalarField field);
    DenseBatch(index_t rows, index_t cols, std::vector<double> entries);
    DenseBatch(index_t rows, index_t cols, std::vector<cplx> entries);

    static DenseBatch column(std::vector<double> v);
    static DenseBatch column(std::vector<cplx> v);
    /// Column j is the j-th canonical unit vector of length n.
    static DenseBatch identity(index_t n, ScalarField field = ScalarField::Real64);

    [[nodiscard]] index_t rows() const noexcept { return rows_; }
    [[nodiscard]] index_t cols() const noexcept { return cols_; }
    [[nodiscard]] index_t size() const noexcept { return rows_ * cols_; }
    [[nodiscard]] ScalarField field() const noexcept {
        return std::holds_alternative<std::vector<double>>(data_) ? ScalarField::Real64
                                                                  : ScalarField::Complex128;
    }
    [[nodiscard]] bool is_real() const noexcept { return field() == ScalarField::Real64; }

    /// Entry (i, j) widened to complex.
    [[nodiscard]] cplx operator()(index_t i, index_t j) const;
    /// Writes entry (i, j); writing a value with nonzero imaginary part into a
    /// real batch throws InvalidArgument.
    void set(index_t i, index_t j, cplx v);

    template <class T>
    [[nodiscard]] std::span<T> data() {
        return std::get<std::vector<T>>(data_);
    }
    template <class T>
    [[nodiscard]] std::span<const T> data() const {
        return std::get<std::vector<T>>(data_);
    }
    template <class T>
    [[nodiscard]] MatrixView<T> view() {
        return {std::get<std::vector<T>>(data_).data(), rows_, cols_};
    }
    template <class T>
    [[nodiscard]] ConstMatrixView<T> view() const {
        return {std::get<std::vector<T>>(data_).data(), rows_, cols_};
    }

    /// Copy with complex storage (a no-op copy for complex batches).
    [[nodiscard]] DenseBatch as_complex() const;
    /// Copy converted to `f`; converting complex to real drops imaginary parts.
    [[nodiscard]] DenseBatch as_field(ScalarField f) const;
    /// Columns [first, first + count) as a new batch.
    [[nodiscard]] DenseBatch columns(index_t first, index_t count) const;

    /// Largest entry modulus (0 for an empty batch).
    [[nodiscard]] double max_abs() const;
    /// Frobenius norm, i.e. the 2-norm for a single column.
    [[nodiscard]] double norm() const;

private:
    index_t rows_ = 0;
    index_t cols_ = 0;
    std::variant<std::vector<double>, std::vector<cplx>> data_;
};

/// Inner product <a, b> = sum a_i * conj(b_i) over all entries.
cplx inner(const DenseBatch& a, const DenseBatch& b);

}  // namespace fastop
