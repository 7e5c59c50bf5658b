#include <doctest.h>

#include "support/oracles.hpp"

using namespace fastop;
using oracle::Mat;
using oracle::ix;

namespace {

DenseBatch col(std::vector<double> v) { return DenseBatch::column(std::move(v)); }

struct Built {
    OperatorPtr op;
    Mat dense;
};

/// Random composition trees with a prescribed shape, paired with their
/// recursively assembled dense matrices.
class TreeGen {
public:
    explicit TreeGen(std::uint64_t seed) : rng_(seed) {}

    Built make(int depth, index_t r, index_t c) {
        if (depth == 0 || pick(4) == 0) return leaf(r, c);
        switch (pick(7)) {
            case 0: {
                const index_t k = 1 + pick(8);
                Built a = make(depth - 1, r, k);
                Built b = make(depth - 1, k, c);
                if (pick(2) == 0) {
                    Built i = leaf_square(r);
                    return {product({i.op, a.op, b.op}), i.dense * a.dense * b.dense};
                }
                return {product({a.op, b.op}), a.dense * b.dense};
            }
            case 1: {
                const auto [r1, r2] = factor(r);
                const auto [c1, c2] = factor(c);
                Built a = make(depth - 1, r1, c1);
                Built b = make(depth - 1, r2, c2);
                return {kron({a.op, b.op}), oracle::kron(a.dense, b.dense)};
            }
            case 2: {
                if (r < 2 || c < 2) break;
                const index_t r1 = 1 + pick(r - 1), c1 = 1 + pick(c - 1);
                Built a = make(depth - 1, r1, c1);
                Built b = make(depth - 1, r - r1, c - c1);
                return {block_diag({a.op, b.op}), oracle::block_diag({a.dense, b.dense})};
            }
            case 3: {
                if (r < 2 || c < 2) break;
                const index_t rs[2] = {1 + pick(r - 1), 0};
                const index_t cs[2] = {1 + pick(c - 1), 0};
                const index_t rh[2] = {rs[0], r - rs[0]};
                const index_t cw[2] = {cs[0], c - cs[0]};
                BlockGrid grid(2);
                Mat d(ix(r), ix(c));
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) {
                        Built b = make(depth - 1, rh[i], cw[j]);
                        grid[i].push_back(b.op);
                        d.block(i == 0 ? 0 : ix(rh[0]), j == 0 ? 0 : ix(cw[0]), ix(rh[i]),
                                ix(cw[j])) = b.dense;
                    }
                return {blocks(grid), d};
            }
            case 4: {
                const index_t br = 1 + pick(8), bc = 1 + pick(8);
                Built b = make(depth - 1, br, bc);
                std::vector<index_t> ri(r), ci(c);
                for (auto& i : ri) i = pick(br);
                for (auto& j : ci) j = pick(bc);
                Mat d(ix(r), ix(c));
                for (index_t i = 0; i < r; ++i)
                    for (index_t j = 0; j < c; ++j) d(ix(i), ix(j)) = b.dense(ix(ri[i]), ix(ci[j]));
                return {partial(b.op, ri, ci), d};
            }
            case 5: {
                if (r != c) break;
                Built b = make(depth - 1, r, r);
                const auto coeffs = oracle::crandn(1 + pick(3), rng_);
                Mat d = Mat::Zero(ix(r), ix(r));
                Mat pw = Mat::Identity(ix(r), ix(r));
                for (const cplx& a : coeffs) {
                    d += a * pw;
                    pw = pw * b.dense;
                }
                if (pick(2) == 0) return {polynomial(b.op, coeffs), d};
                const unsigned k = static_cast<unsigned>(pick(4));
                Mat p = Mat::Identity(ix(r), ix(r));
                for (unsigned i = 0; i < k; ++i) p = p * b.dense;
                return {power(b.op, k), p};
            }
            default: {
                Built b = make(depth - 1, c, r);
                return {adjoint(b.op), b.dense.adjoint()};
            }
        }
        return leaf(r, c);
    }

private:
    index_t pick(index_t n) { return std::uniform_int_distribution<index_t>(0, n - 1)(rng_); }

    std::pair<index_t, index_t> factor(index_t n) {
        std::vector<index_t> divs;
        for (index_t d = 1; d <= n; ++d)
            if (n % d == 0) divs.push_back(d);
        const index_t a = divs[pick(divs.size())];
        return {a, n / a};
    }

    Built leaf_square(index_t n) {
        switch (pick(6)) {
            case 0:
                return {make_identity(n), Mat::Identity(ix(n), ix(n))};
            case 1: {
                const auto d = oracle::crandn(n, rng_);
                return {make_diagonal(d), oracle::diag(d)};
            }
            case 2: {
                const auto c = oracle::randn(n, rng_);
                return {make_circulant(c), oracle::circulant(oracle::widen(c))};
            }
            case 3:
                return {make_fourier(n), oracle::fourier(n)};
            case 4:
                if (transforms::is_power_of_two(n)) return {make_hadamard(transforms::log2_exact(n)), oracle::hadamard(n)};
                [[fallthrough]];
            default: {
                const auto c = oracle::crandn(n, rng_);
                return {make_circulant(c), oracle::circulant(c)};
            }
        }
    }

    Built leaf(index_t r, index_t c) {
        if (r == c && pick(2) == 0) return leaf_square(r);
        switch (pick(4)) {
            case 0: {
                const DenseBatch e = oracle::random_batch(r, c, pick(2) == 1, rng_);
                return {make_dense(e), oracle::to_eigen(e)};
            }
            case 1:
                return {make_zero(r, c), Mat::Zero(ix(r), ix(c))};
            case 2: {
                std::vector<SparseEntry<double>> e;
                Mat d = Mat::Zero(ix(r), ix(c));
                std::normal_distribution<double> nd;
                for (index_t p = 0; p < r + c; ++p) {
                    const index_t i = pick(r), j = pick(c);
                    const double v = nd(rng_);
                    e.push_back({i, j, v});
                    d(ix(i), ix(j)) += v;
                }
                return {make_sparse(r, c, e), d};
            }
            default: {
                const auto cc = oracle::crandn(r, rng_);
                const auto rr = oracle::crandn(c - 1, rng_);
                return {make_toeplitz(cc, rr), oracle::toeplitz(cc, rr)};
            }
        }
    }

    std::mt19937_64 rng_;
};

}  // namespace

TEST_CASE("product") {
    std::mt19937_64 rng(1);
    const auto a = make_dense(oracle::random_batch(3, 3, true, rng));
    const Mat da = oracle::dense_of(*a);
    CHECK(oracle::max_abs_diff(oracle::dense_of(*product({make_identity(3), a, make_identity(3)})), da) < 1e-14);
    const DenseBatch y = product({make_diagonal(std::vector<double>{2}), make_diagonal(std::vector<double>{3})})
                             ->forward(col({1}));
    CHECK(y(0, 0) == cplx(6));
    const Mat f = oracle::fourier(4);
    CHECK(oracle::max_abs_diff(oracle::dense_of(*product({make_fourier(4), make_fourier(4)})), f * f) < 1e-12);
    CHECK(product({a})->shape() == a->shape());
    CHECK_THROWS_AS(product({}), EmptyInput);
}

TEST_CASE("product chain mismatch names the pair") {
    try {
        (void)product({make_identity(2), make_zero(2, 3), make_identity(4)});
        FAIL("expected ChainMismatch");
    } catch (const ChainMismatch& e) {
        const std::string msg = e.what();
        CHECK(msg.find("1") != std::string::npos);
        CHECK(msg.find("2x3") != std::string::npos);
        CHECK(msg.find("4x4") != std::string::npos);
    }
}

TEST_CASE("kron") {
    CHECK(oracle::dense_of(*kron({make_identity(2), make_identity(3)})) == Mat::Identity(6, 6));
    const Mat d = oracle::dense_of(*kron({make_diagonal(std::vector<double>{1, 2}), make_diagonal(std::vector<double>{3, 4})}));
    CHECK(d == oracle::diag({3, 4, 6, 8}));
    CHECK_THROWS_AS(kron({make_identity(2)}), TooFewFactors);
    const auto big = make_identity(index_t{1} << 40);
    CHECK_THROWS_AS(kron({big, big}), DimensionOverflow);

    std::mt19937_64 rng(2);
    const auto a = make_dense(oracle::random_batch(2, 3, true, rng));
    const auto b = make_dense(oracle::random_batch(4, 1, false, rng));
    const auto c = make_circulant(oracle::crandn(3, rng));
    const auto k = kron({a, b, c});
    CHECK(k->shape() == Shape(24, 9));
    const Mat ref = oracle::kron(oracle::kron(oracle::dense_of(*a), oracle::dense_of(*b)), oracle::dense_of(*c));
    CHECK(oracle::max_abs_diff(oracle::dense_of(*k), ref) < 1e-12);
}

TEST_CASE("kron of Fourier matrices is the 2-D DFT") {
    const index_t n = 4;
    std::mt19937_64 rng(3);
    const Mat m = oracle::to_eigen(oracle::random_batch(n, n, true, rng));
    // Row-column 2-D DFT: transform every column, then every row.
    const Mat f = oracle::fourier(n);
    const Mat twod = f * m * f.transpose();
    const Mat vec_m = m.reshaped(ix(n * n), 1);
    const Mat got = oracle::to_eigen(kron({make_fourier(n), make_fourier(n)})->forward(oracle::to_batch(vec_m)));
    CHECK(oracle::rel_err(got, twod.reshaped(ix(n * n), 1)) < 1e-12);
}

TEST_CASE("kron footprint is the sum of the factors") {
    std::mt19937_64 rng(4);
    for (index_t k : {8, 16, 32}) {
        const auto f = make_fourier(k);
        const auto d = make_diagonal(oracle::crandn(k, rng));
        const auto a = make_dense(oracle::random_batch(k, k, true, rng));
        const auto m = kron({f, d, a});
        const std::size_t parts = footprint_bytes(*f) + footprint_bytes(*d) + footprint_bytes(*a);
        CHECK(footprint_bytes(*m) >= parts);
        CHECK(footprint_bytes(*m) <= parts + 256);
        CHECK(dense_bytes(*m) == 16 * k * k * k * k * k * k);
    }
}

TEST_CASE("blocks") {
    std::mt19937_64 rng(5);
    const auto a = make_dense(oracle::random_batch(3, 2, true, rng));
    CHECK(oracle::dense_of(*blocks({{a}})) == oracle::dense_of(*a));
    const auto i2 = make_identity(2);
    const auto z = make_zero(2, 2);
    CHECK(oracle::dense_of(*blocks({{i2, z}, {z, i2}})) == Mat::Identity(4, 4));

    CHECK_THROWS_AS(blocks({}), EmptyInput);
    CHECK_THROWS_AS(blocks({{i2, z}, {i2}}), RaggedGrid);
    try {
        (void)blocks({{i2, z}, {z, make_zero(3, 2)}});
        FAIL("expected BlockShapeMismatch");
    } catch (const BlockShapeMismatch& e) {
        CHECK(std::string(e.what()).find("(1, 1)") != std::string::npos);
    }
}

TEST_CASE("SAFT-style grid of shared sparse blocks") {
    std::mt19937_64 rng(6);
    const index_t s = 4;
    const auto sparse = [&] {
        std::vector<SparseEntry<double>> e;
        for (int p = 0; p < 5; ++p) e.push_back({index_t(rng() % s), index_t(rng() % s), 1.0 + double(p)});
        return make_sparse(s, s, e);
    };
    const auto sm = sparse(), s0 = sparse(), sp = sparse();
    const auto z = make_zero(s, s);
    const BlockGrid grid{{sm, z, z, z}, {s0, sm, z, z}, {sp, s0, sm, z}, {z, sp, s0, sm}, {z, z, sp, s0}, {z, z, z, sp}};
    const auto op = blocks(grid);
    CHECK(op->shape() == Shape(6 * s, 4 * s));
    Mat ref(ix(6 * s), ix(4 * s));
    for (index_t i = 0; i < 6; ++i)
        for (index_t j = 0; j < 4; ++j)
            ref.block(ix(i * s), ix(j * s), ix(s), ix(s)) = oracle::dense_of(*grid[i][j]);
    CHECK(oracle::dense_of(*op) == ref);
    const std::size_t blocks_bytes = footprint_bytes(*sm) + footprint_bytes(*s0) + footprint_bytes(*sp) + footprint_bytes(*z);
    CHECK(footprint_bytes(*op) < blocks_bytes + 24 * sizeof(OperatorPtr) + 256);
}

TEST_CASE("block_diag") {
    std::mt19937_64 rng(7);
    const auto a = make_dense(oracle::random_batch(3, 2, true, rng));
    CHECK(oracle::dense_of(*block_diag({a})) == oracle::dense_of(*a));
    CHECK(oracle::dense_of(*block_diag({make_identity(2), make_zero(1, 1)})) == oracle::diag({1, 1, 0}));
    CHECK_THROWS_AS(block_diag({}), EmptyInput);

    const index_t k = 8;
    const auto d = oracle::crandn(k, rng);
    const auto bd = block_diag({make_fourier(k), make_diagonal(d)});
    CHECK(bd->shape() == Shape(2 * k, 2 * k));
    CHECK(oracle::max_abs_diff(oracle::dense_of(*bd), oracle::block_diag({oracle::fourier(k), oracle::diag(d)})) < 1e-12);
}

TEST_CASE("partial") {
    const DenseBatch y = partial(make_identity(4), std::vector<index_t>{1, 3})->forward(col({10, 11, 12, 13}));
    CHECK(y.rows() == 2);
    CHECK(y(0, 0) == cplx(11));
    CHECK(y(1, 0) == cplx(13));

    const Mat h = oracle::hadamard(8);
    CHECK(oracle::dense_of(*partial(make_hadamard(3), std::vector<index_t>{0, 1, 2, 3})) == h.topRows(4));

    std::mt19937_64 rng(8);
    const auto base = make_dense(oracle::random_batch(5, 4, true, rng));
    CHECK(oracle::dense_of(*partial(base, std::vector<index_t>{0, 1, 2, 3, 4}, std::vector<index_t>{0, 1, 2, 3})) ==
          oracle::dense_of(*base));
    CHECK(oracle::dense_of(*partial(base, std::nullopt, std::nullopt)) == oracle::dense_of(*base));

    CHECK_THROWS_AS(partial(base, std::vector<index_t>{5}), IndexOutOfRange);
    CHECK_THROWS_AS(partial(base, std::nullopt, std::vector<index_t>{4}), IndexOutOfRange);
    CHECK_THROWS_AS(partial(base, std::vector<index_t>{}), EmptyInput);
}

TEST_CASE("partial of partial composes the index maps") {
    std::mt19937_64 rng(9);
    const auto base = make_dense(oracle::random_batch(7, 6, true, rng));
    const std::vector<index_t> r1{6, 0, 3, 3, 2}, c1{5, 1, 1, 4};
    const std::vector<index_t> r2{4, 0, 2}, c2{3, 0};
    const auto nested = partial(partial(base, r1, c1), r2, c2);
    std::vector<index_t> rc, cc;
    for (index_t i : r2) rc.push_back(r1[i]);
    for (index_t j : c2) cc.push_back(c1[j]);
    CHECK(oracle::dense_of(*nested) == oracle::dense_of(*partial(base, rc, cc)));
}

TEST_CASE("polynomial and power") {
    std::mt19937_64 rng(10);
    const auto a = make_dense(oracle::random_batch(3, 3, true, rng));
    CHECK(oracle::dense_of(*polynomial(a, std::vector<double>{1})) == Mat::Identity(3, 3));
    const DenseBatch y = power(make_diagonal(std::vector<double>{2, 3}), 3)->forward(col({1, 1}));
    CHECK(y(0, 0) == cplx(8));
    CHECK(y(1, 0) == cplx(27));
    CHECK(oracle::dense_of(*power(a, 0)) == Mat::Identity(3, 3));

    const auto c = oracle::randn(8, rng);
    const Mat cm = oracle::circulant(oracle::widen(c));
    const Mat ref = Mat::Identity(8, 8) + cm * cm;
    CHECK(oracle::max_abs_diff(oracle::dense_of(*polynomial(make_circulant(c), std::vector<double>{1, 0, 1})), ref) < 1e-12);

    CHECK_THROWS_AS(polynomial(make_zero(2, 3), std::vector<double>{1, 2}), NonSquare);
    CHECK_THROWS_AS(power(make_zero(2, 3), 2), NonSquare);
    CHECK_THROWS_AS(polynomial(a, std::vector<double>{}), EmptyInput);
}

TEST_CASE("polynomial applies the base exactly degree times") {
    const auto counting = std::make_shared<oracle::Counting>(make_identity(4));
    const auto p = polynomial(counting, std::vector<double>{1, 2, 3, 4});
    counting->reset();
    (void)p->forward(col({1, 2, 3, 4}));
    CHECK(counting->forwards() == 3);
    counting->reset();
    (void)power(counting, 5)->forward(col({1, 2, 3, 4}));
    CHECK(counting->forwards() == 5);
}

TEST_CASE("adjoint distributes over products") {
    std::mt19937_64 rng(11);
    const auto a = make_dense(oracle::random_batch(4, 3, true, rng));
    const auto b = make_circulant(oracle::crandn(3, rng));
    const DenseBatch y = oracle::random_batch(4, 2, true, rng);
    const Mat lhs = oracle::to_eigen(adjoint(product({a, b}))->forward(y));
    const Mat rhs = oracle::to_eigen(product({adjoint(b), adjoint(a)})->forward(y));
    CHECK(oracle::rel_err(lhs, rhs) < 1e-13);
}

TEST_CASE("random composition trees match their dense assembly") {
    TreeGen gen(2024);
    std::mt19937_64 rng(99);
    for (int t = 0; t < 50; ++t) {
        const index_t r = 1 + rng() % 8, c = 1 + rng() % 8;
        const Built b = gen.make(3, r, c);
        CAPTURE(t);
        CAPTURE(b.op->describe());
        REQUIRE(b.op->shape() == Shape(r, c));
        const Mat got = oracle::dense_of(*b.op);
        CHECK(oracle::max_abs_diff(got, b.dense) <= 1e-10 * std::max(1.0, b.dense.cwiseAbs().maxCoeff()));
        const DenseBatch y = oracle::random_batch(r, 2, true, rng);
        CHECK(oracle::rel_err(oracle::to_eigen(b.op->backward(y)), b.dense.adjoint() * oracle::to_eigen(y)) <= 1e-10);
    }
}

TEST_CASE("blocks accumulate deterministically") {
    std::mt19937_64 rng(12);
    const auto a = make_dense(oracle::random_batch(6, 6, true, rng));
    const auto op = blocks({{a, a, a}, {a, a, a}});
    const DenseBatch x = oracle::random_batch(18, 3, true, rng);
    const Mat first = oracle::to_eigen(op->forward(x));
    for (int i = 0; i < 3; ++i) CHECK(oracle::to_eigen(op->forward(x)) == first);
}
