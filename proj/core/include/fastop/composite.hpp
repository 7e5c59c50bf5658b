#pragma once

#include <optional>
#include <vector>

#include "fastop/operator.hpp"
#include "fastop/scalar_array.hpp"

namespace fastop {

/// factors[0] * factors[1] * ... ; forward applies the factors right to left.
/// Throws ChainMismatch naming the first adjacent pair whose shapes differ.
OperatorPtr product(std::vector<OperatorPtr> factors);

/// Kronecker product of two or more factors, applied without materialization:
/// for A (x) B the input is viewed as a cols(B) x cols(A) column-major array X
/// and the result is B X A^T. More than two factors associate to the left.
OperatorPtr kron(std::vector<OperatorPtr> factors);

using BlockGrid = std::vector<std::vector<OperatorPtr>>;
/// Block matrix from a dense grid (use Zero operators for empty blocks).
/// Repeated references to one operator are stored once.
OperatorPtr blocks(BlockGrid grid);

OperatorPtr block_diag(std::vector<OperatorPtr> blocks);

/// Selects rows and/or columns of `base` while keeping its fast transform.
/// A missing index list keeps every row (column). Duplicates are allowed.
OperatorPtr partial(OperatorPtr base, std::optional<std::vector<index_t>> row_indices,
                    std::optional<std::vector<index_t>> col_indices = std::nullopt);

/// sum_i coeffs[i] * base^i with coefficients in ascending degree order,
/// evaluated by Horner's rule with exactly deg applications of `base`.
OperatorPtr polynomial(OperatorPtr base, ScalarArray coeffs);

/// base^k; k = 0 gives the identity.
OperatorPtr power(OperatorPtr base, unsigned k);

}  // namespace fastop
