#include "fastop/verify.hpp"

#include <algorithm>
#include <cmath>

#include "fastop/composite.hpp"
#include "fastop/leaf.hpp"

namespace fastop::verify {

namespace {

std::vector<double> normal_vec(index_t n, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> dist;
    std::vector<double> v(n);
    for (auto& x : v) x = scale * dist(rng);
    return v;
}

std::vector<cplx> normal_cvec(index_t n, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> dist;
    std::vector<cplx> v(n);
    for (auto& x : v) {
        const double re = dist(rng);
        x = scale * cplx(re, dist(rng));
    }
    return v;
}

OperatorPtr random_dense(index_t rows, index_t cols, ScalarField field, std::mt19937_64& rng) {
    return make_dense(random_batch(rows, cols, field, rng));
}

std::vector<SparseEntry<double>> random_sparse_entries(index_t rows, index_t cols, index_t count,
                                                       std::mt19937_64& rng) {
    std::uniform_int_distribution<index_t> ri(0, rows - 1);
    std::uniform_int_distribution<index_t> ci(0, cols - 1);
    std::normal_distribution<double> dist;
    std::vector<SparseEntry<double>> e;
    for (index_t p = 0; p < count; ++p) e.push_back({ri(rng), ci(rng), dist(rng)});
    return e;
}

double max_abs_diff(const DenseBatch& a, const DenseBatch& b) {
    double m = 0.0;
    for (index_t j = 0; j < a.cols(); ++j)
        for (index_t i = 0; i < a.rows(); ++i) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

struct Worst {
    double ratio = -1.0;
    double error = 0.0;
    double bound = 0.0;
    bool ok = true;

    void add(double err, double bnd, bool pass = true) {
        const bool within = err <= bnd && pass;
        ok = ok && within;
        const double r = bnd > 0.0 ? err / bnd : err;
        if (r > ratio || !pass) {
            ratio = r;
            error = err;
            bound = bnd;
        }
    }
};

}  // namespace

DenseBatch random_batch(index_t rows, index_t cols, ScalarField field, std::mt19937_64& rng) {
    if (field == ScalarField::Real64) return {rows, cols, normal_vec(rows * cols, 1.0, rng)};
    return {rows, cols, normal_cvec(rows * cols, 1.0, rng)};
}

DenseBatch dense_multiply(const DenseBatch& a, const DenseBatch& x) {
    if (a.cols() != x.rows()) throw DimensionMismatch("dense_multiply: inner dimensions differ");
    std::vector<cplx> out(a.rows() * x.cols(), cplx{});
    for (index_t j = 0; j < x.cols(); ++j)
        for (index_t i = 0; i < a.rows(); ++i) {
            cplx s{};
            for (index_t k = 0; k < a.cols(); ++k) s += a(i, k) * x(k, j);
            out[j * a.rows() + i] = s;
        }
    DenseBatch y(a.rows(), x.cols(), std::move(out));
    return y.as_field(promote(a.field(), x.field()));
}

DenseBatch dense_adjoint_multiply(const DenseBatch& a, const DenseBatch& y) {
    if (a.rows() != y.rows()) throw DimensionMismatch("dense_adjoint_multiply: dimensions differ");
    std::vector<cplx> out(a.cols() * y.cols(), cplx{});
    for (index_t j = 0; j < y.cols(); ++j)
        for (index_t k = 0; k < a.cols(); ++k) {
            cplx s{};
            for (index_t i = 0; i < a.rows(); ++i) s += std::conj(a(i, k)) * y(i, j);
            out[j * a.cols() + k] = s;
        }
    DenseBatch x(a.cols(), y.cols(), std::move(out));
    return x.as_field(promote(a.field(), y.field()));
}

std::vector<CatalogEntry> operator_catalog(index_t max_size, std::uint64_t seed) {
    if (max_size < 4) throw InvalidArgument("verification needs max size >= 4");
    std::mt19937_64 rng(seed);
    const index_t n = max_size;
    const index_t half = n / 2;
    unsigned order = 0;
    while ((index_t{2} << order) <= n) ++order;
    const index_t hn = index_t{1} << order;
    const double inv = 1.0 / std::sqrt(static_cast<double>(n));

    std::vector<CatalogEntry> cat;
    const auto add = [&](std::string label, OperatorPtr op) {
        cat.push_back({std::move(label), std::move(op)});
    };

    // Leaves.
    add("Dense", random_dense(n, std::max<index_t>(1, 3 * n / 4), ScalarField::Complex128, rng));
    add("Zero", make_zero(n, half));
    add("Identity", make_identity(n));
    add("Diagonal", make_diagonal(normal_cvec(n, 1.0, rng)));
    add("Sparse", make_sparse(n, n - 1, random_sparse_entries(n, n - 1, 3 * n, rng)));
    add("Fourier", make_fourier(n));
    add("Fourier(bluestein)", make_fourier(n - 1));
    add("Hadamard", make_hadamard(order));
    add("Circulant", make_circulant(normal_cvec(n, inv, rng)));
    add("Circulant(real)", make_circulant(normal_vec(n - 1, inv, rng)));
    add("Toeplitz", make_toeplitz(normal_vec(n, inv, rng), normal_vec(2 * n / 3, inv, rng)));
    add("Toeplitz(complex)", make_toeplitz(normal_cvec(half, inv, rng), normal_cvec(n - 1, inv, rng)));
    add("Parametric", make_parametric(
                          [](index_t i, index_t j) {
                              const double a = static_cast<double>(i) + 2.0 * static_cast<double>(j);
                              return cplx(std::cos(a), std::sin(0.1 * a * static_cast<double>(i)));
                          },
                          half, n));

    // Composites.
    const index_t m = half;
    add("Product", product({make_fourier(m), make_diagonal(normal_cvec(m, 1.0, rng)),
                            make_circulant(normal_vec(m, 1.0 / std::sqrt(static_cast<double>(m)), rng))}));
    {
        const index_t p = std::max<index_t>(1, n / 4);
        const index_t q = std::max<index_t>(1, n / 8);
        add("Kron", kron({make_fourier(2), random_dense(p, q, ScalarField::Real64, rng), make_circulant(normal_vec(2, 1.0, rng))}));
    }
    {
        const index_t s = std::max<index_t>(1, n / 6);
        const auto s_m = make_sparse(s, s, random_sparse_entries(s, s, 2 * s, rng));
        const auto s_0 = make_sparse(s, s, random_sparse_entries(s, s, 2 * s, rng));
        const auto s_p = make_sparse(s, s, random_sparse_entries(s, s, 2 * s, rng));
        const auto z = make_zero(s, s);
        add("Blocks", blocks({{s_m, z, z, z},
                              {s_0, s_m, z, z},
                              {s_p, s_0, s_m, z},
                              {z, s_p, s_0, s_m},
                              {z, z, s_p, s_0},
                              {z, z, z, s_p}}));
    }
    {
        const index_t a = std::max<index_t>(1, n / 4);
        add("BlockDiag", block_diag({make_fourier(a), make_diagonal(normal_cvec(a, 1.0, rng)),
                                     random_dense(a, std::max<index_t>(1, a / 2), ScalarField::Real64, rng)}));
    }
    {
        std::uniform_int_distribution<index_t> pick(0, hn - 1);
        std::vector<index_t> rows(half);
        for (auto& r : rows) r = pick(rng);
        std::vector<index_t> cols(hn - 1);
        for (auto& c : cols) c = pick(rng);
        add("Partial", partial(make_hadamard(order), rows, cols));
    }
    add("Polynomial",
        polynomial(make_circulant(normal_vec(m, 1.0 / std::sqrt(static_cast<double>(m)), rng)),
                   std::vector<cplx>{1.0, cplx(0.5, -0.25), -0.25, 0.125}));
    add("Power", power(make_toeplitz(normal_cvec(m, inv, rng), normal_cvec(m - 1, inv, rng)), 3));
    add("Adjoint", adjoint(random_dense(n, half, ScalarField::Complex128, rng)));
    return cat;
}

std::vector<CheckResult> check_operator(const CatalogEntry& entry, index_t trials, std::uint64_t seed) {
    const LinearOperator& op = *entry.op;
    std::mt19937_64 rng(seed);
    const DenseBatch dense = to_dense(op);
    constexpr index_t kBatch = 3;
    constexpr double kTol = 1e-10;

    Worst fwd, bwd, adj, batch, field;
    for (index_t t = 0; t < trials; ++t) {
        const ScalarField in_field = (t % 2 == 0) ? ScalarField::Real64 : ScalarField::Complex128;

        const DenseBatch x = random_batch(op.cols(), kBatch, in_field, rng);
        const DenseBatch y = op.forward(x);
        fwd.add(max_abs_diff(y, dense_multiply(dense, x)), kTol * (1.0 + x.max_abs()));
        field.add(0.0, 0.0, y.field() == promote(op.field(), in_field));
        for (index_t j = 0; j < kBatch; ++j) {
            const DenseBatch yj = op.forward(x.columns(j, 1));
            batch.add(max_abs_diff(yj, y.columns(j, 1)), kTol * (1.0 + x.max_abs()));
        }

        const DenseBatch w = random_batch(op.rows(), kBatch, in_field, rng);
        const DenseBatch v = op.backward(w);
        bwd.add(max_abs_diff(v, dense_adjoint_multiply(dense, w)), kTol * (1.0 + w.max_abs()));
        field.add(0.0, 0.0, v.field() == promote(op.field(), in_field));

        const DenseBatch x1 = x.columns(0, 1);
        const DenseBatch w1 = w.columns(0, 1);
        const cplx lhs = inner(op.forward(x1), w1);
        const cplx rhs = inner(x1, op.backward(w1));
        adj.add(std::abs(lhs - rhs), kTol * x1.norm() * w1.norm());
    }

    const auto result = [&](const char* name, const Worst& w) {
        return CheckResult{entry.label, name, w.ok, w.error, w.bound};
    };
    return {result("forward-oracle", fwd), result("backward-oracle", bwd), result("adjoint-identity", adj),
            result("batch-consistency", batch), result("field-promotion", field)};
}

std::vector<CheckResult> run_verification(index_t max_size, std::uint64_t seed, index_t trials) {
    std::vector<CheckResult> all;
    index_t k = 0;
    for (const auto& entry : operator_catalog(max_size, seed)) {
        auto r = check_operator(entry, trials, seed + 1000 + k++);
        all.insert(all.end(), r.begin(), r.end());
    }
    return all;
}

}  // namespace fastop::verify
