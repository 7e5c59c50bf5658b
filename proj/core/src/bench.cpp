#include "fastop/bench.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>

#include "fastop/algorithms.hpp"
#include "fastop/composite.hpp"
#include "fastop/leaf.hpp"
#include "fastop/transforms.hpp"
#include "fastop/verify.hpp"

namespace fastop::bench {

namespace {

constexpr double kAgreement = 1e-8;

std::mt19937_64 rng_for(std::uint64_t seed, index_t size) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(size), static_cast<std::uint32_t>(size >> 32)};
    return std::mt19937_64(seq);
}

index_t exact_cube_root(index_t n) {
    index_t k = static_cast<index_t>(std::llround(std::cbrt(static_cast<double>(n))));
    for (index_t c = (k > 0 ? k - 1 : 0); c <= k + 1; ++c) {
        if (c * c * c == n) return c;
    }
    return 0;
}

struct Case {
    OperatorPtr op;
    /// Workload run against the structured operator or its dense twin.
    std::function<DenseBatch(const LinearOperator&)> run;
    /// Replaces `run` for the dense baseline when set (e.g. a direct solve).
    std::function<DenseBatch(const DenseBatch&)> dense_run;
};

Case forward_case(OperatorPtr op, DenseBatch x) {
    return {std::move(op), [x = std::move(x)](const LinearOperator& a) { return a.forward(x); }, {}};
}

Case hadamard_case(index_t n, std::mt19937_64& rng) {
    const unsigned order = transforms::log2_exact(n);
    return forward_case(make_hadamard(order), verify::random_batch(n, 1, ScalarField::Real64, rng));
}

Case kron_case(index_t n, std::mt19937_64& rng) {
    const index_t k = exact_cube_root(n);
    const auto d = verify::random_batch(k, 1, ScalarField::Complex128, rng);
    auto op = kron({make_fourier(k), make_diagonal(std::vector<cplx>(d.data<cplx>().begin(), d.data<cplx>().end())),
                    make_dense(verify::random_batch(k, k, ScalarField::Complex128, rng))});
    return forward_case(std::move(op), verify::random_batch(n, 1, ScalarField::Real64, rng));
}

Case blockdiag_case(index_t n, std::mt19937_64& rng) {
    const index_t k = n / 2;
    const auto d = verify::random_batch(k, 1, ScalarField::Complex128, rng);
    auto op = block_diag({make_fourier(k),
                          make_diagonal(std::vector<cplx>(d.data<cplx>().begin(), d.data<cplx>().end()))});
    return forward_case(std::move(op), verify::random_batch(n, 1, ScalarField::Real64, rng));
}

DenseBatch dense_solve(const DenseBatch& a, const DenseBatch& b) {
    const auto n = static_cast<Eigen::Index>(a.rows());
    if (a.is_real() && b.is_real()) {
        const Eigen::Map<const Eigen::MatrixXd> am(a.data<double>().data(), n, n);
        const Eigen::Map<const Eigen::VectorXd> bm(b.data<double>().data(), n);
        const Eigen::VectorXd x = am.partialPivLu().solve(bm);
        return DenseBatch::column(std::vector<double>(x.data(), x.data() + n));
    }
    const DenseBatch ac = a.as_complex();
    const DenseBatch bc = b.as_complex();
    const Eigen::Map<const Eigen::MatrixXcd> am(ac.data<cplx>().data(), n, n);
    const Eigen::Map<const Eigen::VectorXcd> bm(bc.data<cplx>().data(), n);
    const Eigen::VectorXcd x = am.partialPivLu().solve(bm);
    return DenseBatch::column(std::vector<cplx>(x.data(), x.data() + n));
}

Case circulant_solve_case(index_t n, std::mt19937_64& rng) {
    auto op = make_circulant(deconvolution_kernel(n, rng()));
    const DenseBatch x_true = verify::random_batch(n, 1, ScalarField::Real64, rng);
    DenseBatch b = op->forward(x_true);
    Case c;
    c.op = op;
    c.run = [b](const LinearOperator& a) {
        return cg_solve(a, b, {.max_iterations = 4 * a.cols(), .relative_tolerance = 1e-12}).solution;
    };
    c.dense_run = [b](const DenseBatch& matrix) { return dense_solve(matrix, b); };
    return c;
}

Case ista_case(index_t n, std::mt19937_64& rng) {
    const index_t signal = 2 * n;
    SensingProblem p = make_sensing_problem(n, signal, std::max<index_t>(1, signal / 32), rng());
    // One step size for both paths so their iterates agree.
    const double sigma =
        power_iteration(*p.matrix, SpectralMode::Singular, {.tolerance = 1e-6, .max_iterations = 50, .seed = 1}).value;
    const DenseBatch corr = p.matrix->backward(p.measurement);
    IstaOptions opts{.lambda = 1e-3 * corr.max_abs(), .steps = 100, .step_size = 1.0 / (1.01 * sigma * sigma)};
    return {p.matrix, [b = p.measurement, opts](const LinearOperator& a) { return ista(a, b, opts).solution; }, {}};
}

Case saft_case(index_t n, std::mt19937_64& rng) {
    const index_t s = n / 6;
    const index_t nnz = std::max<index_t>(1, static_cast<index_t>(std::llround(0.01 * static_cast<double>(s * s))));
    std::uniform_int_distribution<index_t> idx(0, s - 1);
    std::normal_distribution<double> val;
    const auto sparse_block = [&] {
        std::vector<SparseEntry<double>> e;
        for (index_t p = 0; p < nnz; ++p) e.push_back({idx(rng), idx(rng), val(rng)});
        return make_sparse(s, s, std::move(e));
    };
    const auto s_m = sparse_block();
    const auto s_0 = sparse_block();
    const auto s_p = sparse_block();
    const auto z = make_zero(s, s);
    auto op = blocks({{s_m, z, z, z},
                      {s_0, s_m, z, z},
                      {s_p, s_0, s_m, z},
                      {z, s_p, s_0, s_m},
                      {z, z, s_p, s_0},
                      {z, z, z, s_p}});
    return forward_case(std::move(op), verify::random_batch(4 * s, 1, ScalarField::Real64, rng));
}

Case build_case(const std::string& name, index_t n, std::mt19937_64& rng) {
    if (name == "hadamard.forward") return hadamard_case(n, rng);
    if (name == "kron.forward") return kron_case(n, rng);
    if (name == "blockdiag.forward") return blockdiag_case(n, rng);
    if (name == "circulant.solve") return circulant_solve_case(n, rng);
    if (name == "ista.recovery") return ista_case(n, rng);
    if (name == "saft.forward") return saft_case(n, rng);
    throw UnknownScenario("unknown scenario '" + name + "'");
}

template <class F>
DenseBatch timed(index_t reps, double& min_s, double& avg_s, F&& f) {
    DenseBatch last;
    double total = 0.0;
    min_s = std::numeric_limits<double>::infinity();
    for (index_t r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        last = f();
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        min_s = std::min(min_s, dt.count());
        total += dt.count();
    }
    avg_s = total / static_cast<double>(reps);
    return last;
}

double rel_diff(const DenseBatch& a, const DenseBatch& b) {
    double diff = 0.0;
    double ref = 0.0;
    for (index_t j = 0; j < a.cols(); ++j)
        for (index_t i = 0; i < a.rows(); ++i) {
            diff += std::norm(a(i, j) - b(i, j));
            ref += std::norm(b(i, j));
        }
    return ref == 0.0 ? std::sqrt(diff) : std::sqrt(diff / ref);
}

void append_float(std::string& line, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    line += buf;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"hadamard.forward", "kron.forward",  "blockdiag.forward",
                                                "circulant.solve",  "ista.recovery", "saft.forward"};
    return names;
}

void validate(const Scenario& s) {
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), s.name) == names.end()) {
        throw UnknownScenario("unknown scenario '" + s.name + "'");
    }
    if (s.repetitions < 3) throw InvalidArgument("repetitions must be at least 3");
    if (s.sizes.empty()) throw InvalidArgument("no sizes given");
    for (index_t i = 0; i < s.sizes.size(); ++i) {
        const index_t n = s.sizes[i];
        if (n == 0) throw InvalidArgument("sizes must be positive");
        if (i > 0 && n <= s.sizes[i - 1]) throw InvalidArgument("sizes must be strictly ascending");
        const std::string bad = s.name + " cannot use size " + std::to_string(n) + ": ";
        if ((s.name == "hadamard.forward" || s.name == "ista.recovery") && !transforms::is_power_of_two(n)) {
            throw InvalidArgument(bad + "needs a power of two");
        }
        if (s.name == "kron.forward" && exact_cube_root(n) == 0) throw InvalidArgument(bad + "needs a perfect cube");
        if (s.name == "blockdiag.forward" && n % 2 != 0) throw InvalidArgument(bad + "needs an even size");
        if (s.name == "saft.forward" && n % 6 != 0) throw InvalidArgument(bad + "needs a multiple of 6");
    }
}

std::vector<BenchRecord> run_scenario(const Scenario& s) {
    validate(s);
    std::vector<BenchRecord> out;
    for (const index_t n : s.sizes) {
        std::mt19937_64 rng = rng_for(s.seed, n);
        const Case c = build_case(s.name, n, rng);

        BenchRecord rec;
        rec.scenario = s.name;
        rec.size = n;
        rec.structured_mem_bytes = footprint_bytes(*c.op);
        rec.dense_mem_bytes = dense_bytes(*c.op);
        const DenseBatch result =
            timed(s.repetitions, rec.structured_min_s, rec.structured_avg_s, [&] { return c.run(*c.op); });
        rec.checksum = result.norm();

        if (rec.dense_mem_bytes <= s.mem_cap_bytes) {
            DenseBatch matrix = to_dense(*c.op, s.mem_cap_bytes);
            double dmin = 0.0;
            double davg = 0.0;
            DenseBatch dense_result;
            if (c.dense_run) {
                dense_result = timed(s.repetitions, dmin, davg, [&] { return c.dense_run(matrix); });
            } else {
                const OperatorPtr dense_op = make_dense(std::move(matrix));
                dense_result = timed(s.repetitions, dmin, davg, [&] { return c.run(*dense_op); });
            }
            const double err = rel_diff(result, dense_result);
            if (!(err <= kAgreement)) {
                throw VerificationFailure(s.name + " at size " + std::to_string(n) +
                                          ": structured and dense results differ by " +
                                          std::to_string(err) + " (relative)");
            }
            rec.dense_min_s = dmin;
            rec.dense_avg_s = davg;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

void emit_csv(std::span<const BenchRecord> records, std::ostream& out) {
    std::vector<const BenchRecord*> sorted;
    for (const auto& r : records) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const BenchRecord* a, const BenchRecord* b) { return a->size < b->size; });
    std::string text = kCsvHeader;
    text += '\n';
    for (const BenchRecord* r : sorted) {
        std::string line = std::to_string(r->size);
        line += ',';
        append_float(line, r->structured_min_s);
        line += ',';
        append_float(line, r->structured_avg_s);
        line += ',';
        if (r->dense_min_s) append_float(line, *r->dense_min_s);
        line += ',';
        if (r->dense_avg_s) append_float(line, *r->dense_avg_s);
        line += ',';
        line += std::to_string(r->structured_mem_bytes);
        line += ',';
        line += std::to_string(r->dense_mem_bytes);
        line += ',';
        append_float(line, r->checksum);
        text += line;
        text += '\n';
    }
    out << text;
}

void emit_csv(std::span<const BenchRecord> records, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    emit_csv(records, f);
    f.flush();
    if (!f) throw IoError("failed writing '" + path.string() + "'");
}

SensingProblem make_sensing_problem(index_t rows, index_t signal_dim, index_t sparsity, std::uint64_t seed) {
    if (!transforms::is_power_of_two(signal_dim)) throw InvalidArgument("signal dimension must be 2^k");
    if (rows == 0 || rows > signal_dim) throw InvalidArgument("need 1 <= rows <= signal dimension");
    if (sparsity == 0 || sparsity > signal_dim) throw InvalidArgument("need 1 <= sparsity <= signal dimension");
    std::mt19937_64 rng(seed);

    std::vector<index_t> perm(signal_dim);
    std::iota(perm.begin(), perm.end(), index_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<index_t> picked(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(rows));
    std::sort(picked.begin(), picked.end());

    std::normal_distribution<double> dist;
    std::vector<double> kernel(signal_dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(signal_dim));
    for (auto& v : kernel) v = scale * dist(rng);

    SensingProblem p;
    p.matrix = product({partial(make_hadamard(transforms::log2_exact(signal_dim)), std::move(picked)),
                        make_circulant(std::move(kernel))});

    std::shuffle(perm.begin(), perm.end(), rng);
    p.true_support.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(sparsity));
    std::sort(p.true_support.begin(), p.true_support.end());
    std::vector<double> x(signal_dim, 0.0);
    for (index_t i : p.true_support) {
        double v = dist(rng);
        // Keep magnitudes away from zero so the support is well defined.
        v += v >= 0 ? 1.0 : -1.0;
        x[i] = v;
    }
    p.x_true = DenseBatch::column(std::move(x));
    p.measurement = p.matrix->forward(p.x_true);
    return p;
}

std::vector<double> deconvolution_kernel(index_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin;
    const double tap = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<double> c(n);
    for (auto& v : c) v = coin(rng) ? tap : -tap;
    c[0] += 4.0;
    return c;
}

}  // namespace fastop::bench
