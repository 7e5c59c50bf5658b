#pragma once

#include <functional>
#include <vector>

#include "fastop/operator.hpp"
#include "fastop/scalar_array.hpp"

namespace fastop {

/// Dense operator over the given column-major entries.
OperatorPtr make_dense(DenseBatch entries);
/// Row-major nested lists, convenient for small literals.
OperatorPtr make_dense(const std::vector<std::vector<double>>& rows);
OperatorPtr make_dense(const std::vector<std::vector<cplx>>& rows);

OperatorPtr make_zero(index_t rows, index_t cols, ScalarField field = ScalarField::Real64);
OperatorPtr make_identity(index_t n, ScalarField field = ScalarField::Real64);
OperatorPtr make_diagonal(ScalarArray d);

template <class T>
struct SparseEntry {
    index_t row;
    index_t col;
    T value;
};

/// CSR operator; duplicate (row, col) entries are summed. The transposed
/// conjugate CSR is built once for the backward transform.
OperatorPtr make_sparse(index_t rows, index_t cols, std::vector<SparseEntry<double>> entries);
OperatorPtr make_sparse(index_t rows, index_t cols, std::vector<SparseEntry<cplx>> entries);

/// Unnormalized n-point DFT matrix, entry (j, k) = exp(-2 pi i jk / n).
OperatorPtr make_fourier(index_t n);
/// Sylvester Hadamard matrix of size 2^order.
OperatorPtr make_hadamard(unsigned order);
/// Circulant matrix with first column c: forward is circular convolution with c.
OperatorPtr make_circulant(ScalarArray c);
/// Toeplitz matrix with entry (i, j) = first_col[i - j] for i >= j and
/// first_row_rest[j - i - 1] otherwise; shape first_col.size() x (1 + first_row_rest.size()).
OperatorPtr make_toeplitz(ScalarArray first_col, ScalarArray first_row_rest);

using EntryFunction = std::function<cplx(index_t, index_t)>;
/// Entries computed on demand by f(i, j). For a Real64 field only the real
/// part of f is used.
OperatorPtr make_parametric(EntryFunction f, index_t rows, index_t cols,
                            ScalarField field = ScalarField::Complex128);

}  // namespace fastop
