#include <doctest.h>

#include "support/oracles.hpp"

using namespace fastop;
using oracle::Mat;
using oracle::ix;

namespace {

DenseBatch col(std::vector<double> v) { return DenseBatch::column(std::move(v)); }

OperatorPtr spd_dense(index_t n, std::mt19937_64& rng, bool complex) {
    const Mat b = oracle::to_eigen(oracle::random_batch(n, n, complex, rng));
    const Mat a = b.adjoint() * b + static_cast<double>(n) * Mat::Identity(ix(n), ix(n));
    DenseBatch e = oracle::to_batch(a);
    return make_dense(complex ? e : e.as_field(ScalarField::Real64));
}

}  // namespace

TEST_CASE("soft threshold") {
    const DenseBatch r = soft_threshold(col({2.5, -0.5, -3.0, 0.0}), 1.0);
    CHECK(r(0, 0).real() == doctest::Approx(1.5));
    CHECK(r(1, 0) == cplx(0));
    CHECK(r(2, 0).real() == doctest::Approx(-2.0));
    CHECK(r(3, 0) == cplx(0));

    std::mt19937_64 rng(1);
    const DenseBatch x = oracle::random_batch(6, 2, true, rng);
    CHECK(oracle::to_eigen(soft_threshold(x, 0.0)) == oracle::to_eigen(x));

    const DenseBatch c = soft_threshold(DenseBatch::column(std::vector<cplx>{{0, 2}, {0, 0}, {3, 4}}), 1.0);
    CHECK(std::abs(c(0, 0) - cplx(0, 1)) < 1e-15);
    CHECK(c(1, 0) == cplx(0));
    CHECK(std::abs(c(2, 0) - cplx(2.4, 3.2)) < 1e-15);

    CHECK_THROWS_AS(soft_threshold(x, -1e-3), NegativeThreshold);
}

TEST_CASE("cg examples") {
    const SolveReport id = cg_solve(*make_identity(3), col({1, 2, 3}), {.assume_hermitian = true});
    CHECK(id.iterations[0] == 1);
    CHECK(id.all_converged());
    CHECK(oracle::to_eigen(id.solution) == oracle::to_eigen(col({1, 2, 3})));

    const SolveReport id_normal = cg_solve(*make_identity(3), col({1, 2, 3}));
    CHECK(id_normal.iterations[0] == 1);

    const auto a = make_dense(std::vector<std::vector<double>>{{2, 1}, {1, 2}});
    const SolveReport s = cg_solve(*a, col({3, 3}), {.assume_hermitian = true});
    CHECK(s.iterations[0] <= 2);
    CHECK(s.solution(0, 0).real() == doctest::Approx(1.0));
    CHECK(s.solution(1, 0).real() == doctest::Approx(1.0));
    CHECK(s.solution.is_real());
}

TEST_CASE("cg deconvolution with a circulant") {
    const index_t n = 256;
    const auto c = bench::deconvolution_kernel(n, 17);
    const auto a = make_circulant(c);
    std::mt19937_64 rng(5);
    const DenseBatch x_true = oracle::random_batch(n, 1, false, rng);
    const SolveReport r = cg_solve(*a, a->forward(x_true));
    CHECK(r.all_converged());
    CHECK(oracle::rel_err(oracle::to_eigen(r.solution), oracle::to_eigen(x_true)) <= 1e-8);
}

TEST_CASE("cg matches a dense direct solve on hermitian positive definite systems") {
    std::mt19937_64 rng(2);
    for (index_t n : {1, 2, 5, 16, 32}) {
        for (bool complex : {false, true}) {
            CAPTURE(n);
            CAPTURE(complex);
            const auto a = spd_dense(n, rng, complex);
            const DenseBatch y = oracle::random_batch(n, 3, complex, rng);
            const Mat ref = oracle::dense_of(*a).partialPivLu().solve(oracle::to_eigen(y));
            for (bool herm : {true, false}) {
                const SolveOptions opts{.max_iterations = herm ? n + 5 : 20 * n,
                                        .relative_tolerance = 1e-11,
                                        .assume_hermitian = herm};
                const SolveReport r = cg_solve(*a, y, opts);
                CHECK(r.all_converged());
                CHECK(oracle::rel_err(oracle::to_eigen(r.solution), ref) <= 1e-8);
                for (index_t j = 0; j < 3; ++j) {
                    CHECK(std::isfinite(r.residual_norm[j]));
                    CHECK(r.residual_norm[j] <= 1e-11 * y.columns(j, 1).norm());
                    if (herm) CHECK(r.iterations[j] <= n + 5);
                }
            }
        }
    }
}

TEST_CASE("cg reports the true residual and the stopping contract") {
    std::mt19937_64 rng(3);
    const auto a = make_dense(oracle::random_batch(12, 12, true, rng));
    const DenseBatch y = oracle::random_batch(12, 2, true, rng);
    const SolveReport r = cg_solve(*a, y, {.max_iterations = 500, .relative_tolerance = 1e-9});
    const Mat res = oracle::to_eigen(y) - oracle::dense_of(*a) * oracle::to_eigen(r.solution);
    for (index_t j = 0; j < 2; ++j) {
        CHECK(std::abs(res.col(ix(j)).norm() - r.residual_norm[j]) <= 1e-12 * y.norm());
        if (r.converged[j]) CHECK(r.residual_norm[j] <= 1e-9 * y.columns(j, 1).norm());
    }

    const SolveReport capped = cg_solve(*a, y, {.max_iterations = 2});
    CHECK(capped.iterations[0] == 2);
    CHECK_FALSE(capped.all_converged());
}

TEST_CASE("cg errors") {
    CHECK_THROWS_AS(cg_solve(*make_identity(3), col({1, 2})), DimensionMismatch);
    CHECK_THROWS_AS(cg_solve(*make_identity(2), col({1, 2}), {.relative_tolerance = 0.0}), InvalidArgument);
    CHECK_THROWS_AS(cg_solve(*make_zero(2, 3), col({1, 2}), {.assume_hermitian = true}), NonSquare);
    CHECK_THROWS_AS(cg_solve(*make_diagonal(std::vector<double>{1, -1}), col({1, 1}), {.assume_hermitian = true}),
                    BreakdownError);
    CHECK_THROWS_AS(cg_solve(*make_zero(2, 2), col({1, 1})), BreakdownError);
    const SolveReport zero_rhs = cg_solve(*make_identity(2), col({0, 0}));
    CHECK(zero_rhs.iterations[0] == 0);
    CHECK(zero_rhs.all_converged());
}

TEST_CASE("cg call counts") {
    std::mt19937_64 rng(4);
    const auto counting = std::make_shared<oracle::Counting>(spd_dense(10, rng, false));
    const DenseBatch y = oracle::random_batch(10, 1, false, rng);

    const SolveReport h = cg_solve(*counting, y, {.assume_hermitian = true});
    // One forward per iteration plus one true-residual check.
    CHECK(counting->forwards() == h.iterations[0] + 1);
    CHECK(counting->backwards() == 0);

    counting->reset();
    const SolveReport nrm = cg_solve(*counting, y, {.relative_tolerance = 1e-8});
    // One forward and one backward per iteration; the initial A^H y stands in
    // for the final iteration's backward, and one forward checks the residual.
    CHECK(nrm.all_converged());
    CHECK(counting->forwards() == nrm.iterations[0] + 1);
    CHECK(counting->backwards() == nrm.iterations[0]);
}

TEST_CASE("ista examples") {
    const IstaResult one =
        ista(*make_identity(2), col({2.0, 0.1}), {.lambda = 1.0, .steps = 1, .step_size = 1.0});
    CHECK(one.solution(0, 0).real() == doctest::Approx(1.0));
    CHECK(one.solution(1, 0) == cplx(0));
    CHECK(one.objective.size() == 2);
    CHECK(one.objective[0] == doctest::Approx(0.5 * (4.0 + 0.01)));

    const IstaResult zero = ista(*make_hadamard(3), DenseBatch(8, 1, ScalarField::Real64), {.lambda = 0.1, .steps = 10});
    CHECK(zero.solution.max_abs() == 0.0);

    CHECK_THROWS_AS(ista(*make_identity(2), col({1, 2, 3})), DimensionMismatch);
    CHECK_THROWS_AS(ista(*make_identity(2), col({1, 2}), {.lambda = 0.0}), InvalidArgument);
}

TEST_CASE("ista objective is monotone with the default step size") {
    const bench::SensingProblem p = bench::make_sensing_problem(32, 64, 3, 7);
    const IstaResult r = ista(*p.matrix, p.measurement, {.lambda = 1e-2, .steps = 200});
    const double sigma = oracle::dense_of(*p.matrix).jacobiSvd().singularValues()(0);
    CHECK(r.step_size <= 1.0 / (sigma * sigma));
    CHECK(r.step_size >= 0.9 / (sigma * sigma));
    for (index_t k = 1; k < r.objective.size(); ++k) CHECK(r.objective[k] <= r.objective[k - 1] + 1e-12);
}

TEST_CASE("ista call counts") {
    const auto counting = std::make_shared<oracle::Counting>(make_hadamard(4));
    std::mt19937_64 rng(6);
    const DenseBatch b = oracle::random_batch(16, 1, false, rng);
    (void)ista(*counting, b, {.lambda = 0.1, .steps = 25, .step_size = 1.0 / 16.5});
    CHECK(counting->forwards() == 26);
    CHECK(counting->backwards() == 25);
}

TEST_CASE("omp examples") {
    std::vector<double> b(5, 0.0);
    b[2] = 5.0;
    const OmpResult r = omp(*make_identity(5), col(b), 1);
    CHECK(r.support == std::vector<index_t>{2});
    CHECK(std::abs(r.coefficients[0] - cplx(5.0)) < 1e-14);
    CHECK(r.residual_history.back() < 1e-14);

    // Orthonormal Hadamard: one step recovers a 1-sparse signal exactly.
    const index_t n = 16;
    const auto h = product({make_diagonal(std::vector<double>(n, 0.25)), make_hadamard(4)});
    std::vector<double> x(n, 0.0);
    x[11] = -2.0;
    const OmpResult hr = omp(*h, h->forward(col(x)), 1);
    CHECK(hr.support == std::vector<index_t>{11});
    CHECK(std::abs(hr.coefficients[0] + 2.0) < 1e-12);
    CHECK(oracle::rel_err(oracle::to_eigen(hr.solution), oracle::to_eigen(col(x))) < 1e-12);

    CHECK_THROWS_AS(omp(*make_identity(3), col({1, 2, 3}), 0), KOutOfRange);
    CHECK_THROWS_AS(omp(*make_identity(3), col({1, 2, 3}), 4), KOutOfRange);
    CHECK_THROWS_AS(omp(*make_identity(3), col({1, 2}), 1), DimensionMismatch);
}

TEST_CASE("omp ties pick the lowest index and stop at the residual tolerance") {
    const OmpResult r = omp(*make_identity(4), col({1, 0, 1, 1}), 4, 0.0);
    CHECK(r.support == std::vector<index_t>{0, 2, 3});
    const OmpResult early = omp(*make_identity(4), col({3, 0, 1, 0}), 4, 0.5);
    CHECK(early.support == std::vector<index_t>{0});
}

TEST_CASE("omp residual is non-increasing and call counts match") {
    const bench::SensingProblem p = bench::make_sensing_problem(32, 64, 6, 3);
    const auto counting = std::make_shared<oracle::Counting>(p.matrix);
    const OmpResult r = omp(*counting, p.measurement, 10);
    for (index_t k = 1; k < r.residual_history.size(); ++k)
        CHECK(r.residual_history[k] <= r.residual_history[k - 1] + 1e-12 * r.residual_history[0]);
    CHECK(counting->backwards() == r.support.size());
    CHECK(counting->forwards() == r.support.size());
}

TEST_CASE("power iteration examples") {
    const SpectralReport d = power_iteration(*make_diagonal(std::vector<double>{3, 1}), SpectralMode::Eigen);
    CHECK(d.converged);
    CHECK(d.value == doctest::Approx(3.0).epsilon(1e-9));

    const SpectralReport i = power_iteration(*make_identity(6), SpectralMode::Eigen);
    CHECK(i.iterations == 1);
    CHECK(i.value == doctest::Approx(1.0));

    std::mt19937_64 rng(8);
    const auto a = make_dense(oracle::random_batch(8, 5, false, rng));
    const double sigma = oracle::dense_of(*a).jacobiSvd().singularValues()(0);
    const SpectralReport s = power_iteration(*a, SpectralMode::Singular, {.tolerance = 1e-12, .seed = 3});
    CHECK(s.converged);
    CHECK(std::abs(s.value - sigma) <= 1e-6 * sigma);

    CHECK_THROWS_AS(power_iteration(*a, SpectralMode::Eigen), NonSquare);
    const SpectralReport capped =
        power_iteration(*make_diagonal(std::vector<double>{1.0, 0.999999}), SpectralMode::Eigen,
                        {.tolerance = 1e-15, .max_iterations = 3});
    CHECK_FALSE(capped.converged);
    CHECK(capped.iterations == 3);
}

TEST_CASE("power iteration on circulants finds the largest spectral magnitude") {
    std::mt19937_64 rng(9);
    int checked = 0;
    for (index_t n : {8, 16, 33}) {
        auto c = oracle::randn(n, rng, 0.1);
        for (auto& v : c) v += 1.0 / static_cast<double>(n);  // DC eigenvalue near 1
        const auto spec = transforms::dft(oracle::widen(c));
        std::vector<double> mags;
        for (const auto& s : spec) mags.push_back(std::abs(s));
        std::sort(mags.rbegin(), mags.rend());
        if (mags[1] > 0.9 * mags[0]) continue;
        const SpectralReport r = power_iteration(*make_circulant(c), SpectralMode::Eigen, {.seed = n});
        CHECK(r.converged);
        CHECK(std::abs(r.value - mags[0]) <= 1e-6 * mags[0]);
        ++checked;
    }
    CHECK(checked > 0);
}
