#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fastop/operator.hpp"

namespace fastop::verify {

/// Seeded batch with entries drawn from N(0, 1) (real and imaginary parts
/// independently for complex batches).
DenseBatch random_batch(index_t rows, index_t cols, ScalarField field, std::mt19937_64& rng);

/// Dense matrix times batch with explicit loops.
DenseBatch dense_multiply(const DenseBatch& a, const DenseBatch& x);
/// a^H y with explicit loops.
DenseBatch dense_adjoint_multiply(const DenseBatch& a, const DenseBatch& y);

struct CatalogEntry {
    std::string label;
    OperatorPtr op;
};

/// One seeded instance of every operator class with rows, cols <= max_size.
/// Throws InvalidArgument for max_size < 4.
std::vector<CatalogEntry> operator_catalog(index_t max_size, std::uint64_t seed);

struct CheckResult {
    std::string label;
    std::string check;
    bool passed = false;
    double error = 0.0;
    double bound = 0.0;
};

/// Oracle equivalence (forward and backward against to_dense), adjoint
/// identity, batch consistency and field promotion for one operator, using
/// `trials` seeded random inputs each.
std::vector<CheckResult> check_operator(const CatalogEntry& entry, index_t trials, std::uint64_t seed);

/// check_operator over the whole catalog.
std::vector<CheckResult> run_verification(index_t max_size, std::uint64_t seed = 1, index_t trials = 10);

}  // namespace fastop::verify
