#include "fastop/algorithms.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fastop {

namespace {

template <class T>
using Vec = std::vector<T>;

template <class T>
double norm2(const Vec<T>& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

/// sum conj(a_i) b_i
template <class T>
T dot(const Vec<T>& a, const Vec<T>& b) {
    T s{};
    for (index_t i = 0; i < a.size(); ++i) s += conj(a[i]) * b[i];
    return s;
}

template <class T>
Vec<T> apply(const LinearOperator& op, const Vec<T>& v, bool adjoint) {
    const DenseBatch in = DenseBatch::column(v);
    DenseBatch out = adjoint ? op.backward(in) : op.forward(in);
    const auto d = out.data<T>();
    return {d.begin(), d.end()};
}

template <class T>
Vec<T> column_of(const DenseBatch& b, index_t j) {
    const DenseBatch c = b.columns(j, 1).as_field(field_of<T>);
    const auto d = c.data<T>();
    return {d.begin(), d.end()};
}

template <class T>
Vec<T> residual(const LinearOperator& a, const Vec<T>& y, const Vec<T>& x) {
    Vec<T> r = apply(a, x, false);
    for (index_t i = 0; i < r.size(); ++i) r[i] = y[i] - r[i];
    return r;
}

struct ColumnResult {
    index_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

template <class T>
ColumnResult cg_column(const LinearOperator& a, const Vec<T>& y, Vec<T>& x, index_t max_iter,
                       double tol, bool hermitian) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const index_t n = a.cols();
    x.assign(n, T{});
    const double y_norm = norm2(y);
    ColumnResult res;
    if (y_norm == 0.0) {
        res.converged = true;
        return res;
    }
    const double target = tol * y_norm;

    // r tracks y - A x in both modes; s = A^H r drives the normal equations.
    Vec<T> r = y;
    Vec<T> s = hermitian ? r : apply(a, r, true);
    Vec<T> p = s;
    double gamma = std::real(dot(s, s));
    bool checked = false;

    while (res.iterations < max_iter) {
        ++res.iterations;
        const Vec<T> q = apply(a, p, false);
        double alpha = 0.0;
        if (hermitian) {
            const double pq = std::real(dot(p, q));
            if (pq <= 64.0 * eps * norm2(p) * norm2(q)) {
                throw BreakdownError("CG breakdown: p^H A p = " + std::to_string(pq) +
                                     " at iteration " + std::to_string(res.iterations) +
                                     "; operator is not positive definite");
            }
            alpha = gamma / pq;
        } else {
            const double qq = std::real(dot(q, q));
            if (qq == 0.0) {
                throw BreakdownError("CG breakdown: A p = 0 at iteration " +
                                     std::to_string(res.iterations));
            }
            alpha = gamma / qq;
        }
        for (index_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (index_t i = 0; i < r.size(); ++i) r[i] -= alpha * q[i];

        if (norm2(r) <= target) {
            // The recurrence claims convergence; confirm with the true residual
            // and continue from it if round-off has drifted.
            r = residual(a, y, x);
            checked = true;
            res.residual = norm2(r);
            if (res.residual <= target) {
                res.converged = true;
                return res;
            }
            s = hermitian ? r : apply(a, r, true);
            p = s;
            gamma = std::real(dot(s, s));
            continue;
        }
        checked = false;

        if (!hermitian) s = apply(a, r, true);
        const double gamma_new = std::real(dot(hermitian ? r : s, hermitian ? r : s));
        if (gamma_new == 0.0) break;
        const double beta = gamma_new / gamma;
        const Vec<T>& dir = hermitian ? r : s;
        for (index_t i = 0; i < n; ++i) p[i] = dir[i] + beta * p[i];
        gamma = gamma_new;
    }
    if (!checked) res.residual = norm2(residual(a, y, x));
    res.converged = res.residual <= target;
    return res;
}

template <class T>
SolveReport cg_impl(const LinearOperator& a, const DenseBatch& y, const SolveOptions& opts) {
    const index_t k = y.cols();
    const index_t max_iter = opts.max_iterations == 0 ? a.cols() : opts.max_iterations;
    SolveReport report;
    std::vector<T> sol(a.cols() * k);
    for (index_t j = 0; j < k; ++j) {
        Vec<T> x;
        const ColumnResult c =
            cg_column<T>(a, column_of<T>(y, j), x, max_iter, opts.relative_tolerance, opts.assume_hermitian);
        std::copy(x.begin(), x.end(), sol.begin() + static_cast<std::ptrdiff_t>(j * a.cols()));
        report.iterations.push_back(c.iterations);
        report.residual_norm.push_back(c.residual);
        report.converged.push_back(c.converged);
    }
    report.solution = DenseBatch(a.cols(), k, std::move(sol));
    return report;
}

template <class T>
T shrink(T u, double c) {
    const double mag = std::abs(u);
    if (mag <= c) return T{};
    if constexpr (std::is_same_v<T, double>) {
        return u > 0 ? u - c : u + c;
    } else {
        return u * ((mag - c) / mag);
    }
}

std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

template <class T>
Vec<T> random_unit(index_t n, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> dist;
    Vec<T> v(n);
    for (auto& x : v) {
        if constexpr (std::is_same_v<T, double>) {
            x = dist(rng);
        } else {
            const double re = dist(rng);
            x = cplx(re, dist(rng));
        }
    }
    const double nv = norm2(v);
    for (auto& x : v) x /= nv;
    return v;
}

template <class T>
SpectralReport power_impl(const LinearOperator& a, SpectralMode mode, const PowerOptions& opts) {
    SpectralReport rep;
    Vec<T> v = random_unit<T>(a.cols(), opts.seed);
    double prev = -1.0;
    for (index_t it = 1; it <= opts.max_iterations; ++it) {
        rep.iterations = it;
        Vec<T> w = apply(a, v, false);
        if (mode == SpectralMode::Singular) w = apply(a, w, true);
        const T rho = dot(v, w);
        const double est =
            mode == SpectralMode::Eigen ? std::abs(rho) : std::sqrt(std::max(std::real(rho), 0.0));
        const double nw = norm2(w);
        rep.rayleigh = rho;
        rep.value = est;
        if (nw == 0.0) {
            rep.converged = true;
            break;
        }
        Vec<T> diff = w;
        for (index_t i = 0; i < v.size(); ++i) diff[i] -= rho * v[i];
        const bool residual_small = norm2(diff) <= opts.tolerance * std::abs(rho);
        const bool estimate_stable = prev >= 0.0 && std::abs(est - prev) <= opts.tolerance * est;
        for (index_t i = 0; i < v.size(); ++i) v[i] = w[i] / nw;
        prev = est;
        if (residual_small || estimate_stable) {
            rep.converged = true;
            break;
        }
    }
    rep.vector = DenseBatch::column(std::move(v));
    return rep;
}

template <class T>
IstaResult ista_impl(const LinearOperator& m, const DenseBatch& b_batch, const IstaOptions& opts,
                     double alpha) {
    const Vec<T> b = column_of<T>(b_batch, 0);
    const index_t n = m.cols();
    const double thresh = opts.lambda * alpha;
    Vec<T> x(n, T{});
    IstaResult out;
    out.step_size = alpha;
    out.objective.reserve(opts.steps + 1);

    const auto objective = [&](const Vec<T>& r) {
        double l1 = 0.0;
        for (const auto& v : x) l1 += std::abs(v);
        const double rn = norm2(r);
        return opts.lambda * l1 + 0.5 * rn * rn;
    };

    for (index_t k = 0; k < opts.steps; ++k) {
        const Vec<T> r = residual(m, b, x);
        out.objective.push_back(objective(r));
        const Vec<T> g = apply(m, r, true);
        for (index_t i = 0; i < n; ++i) x[i] = shrink(x[i] + alpha * g[i], thresh);
    }
    const Vec<T> r = residual(m, b, x);
    out.objective.push_back(objective(r));
    out.residual_norm = norm2(r);
    out.solution = DenseBatch::column(std::move(x));
    return out;
}

template <class T>
OmpResult omp_impl(const LinearOperator& m, const DenseBatch& b_batch, index_t sparsity, double tol) {
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
    using EVec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
    const Vec<T> b = column_of<T>(b_batch, 0);
    const index_t rows = m.rows();
    const index_t cols = m.cols();
    const double b_norm = norm2(b);

    OmpResult out;
    Vec<T> r = b;
    out.residual_history.push_back(b_norm);
    std::vector<bool> chosen(cols, false);
    Mat atoms(static_cast<Eigen::Index>(rows), 0);
    EVec coef;
    const Eigen::Map<const EVec> b_map(b.data(), static_cast<Eigen::Index>(rows));

    while (out.support.size() < sparsity && norm2(r) > tol * b_norm) {
        const Vec<T> corr = apply(m, r, true);
        index_t best = cols;
        double best_mag = -1.0;
        for (index_t i = 0; i < cols; ++i) {
            if (!chosen[i] && std::abs(corr[i]) > best_mag) {
                best_mag = std::abs(corr[i]);
                best = i;
            }
        }
        chosen[best] = true;
        out.support.push_back(best);

        Vec<T> unit(cols, T{});
        unit[best] = T{1};
        const Vec<T> atom = apply(m, unit, false);
        atoms.conservativeResize(Eigen::NoChange, atoms.cols() + 1);
        atoms.col(atoms.cols() - 1) = Eigen::Map<const EVec>(atom.data(), static_cast<Eigen::Index>(rows));

        coef = atoms.colPivHouseholderQr().solve(b_map);
        const EVec res = b_map - atoms * coef;
        for (index_t i = 0; i < rows; ++i) r[i] = res(static_cast<Eigen::Index>(i));
        out.residual_history.push_back(norm2(r));
    }

    Vec<T> x(cols, T{});
    for (index_t s = 0; s < out.support.size(); ++s) {
        const T c = coef(static_cast<Eigen::Index>(s));
        x[out.support[s]] = c;
        out.coefficients.push_back(cplx(c));
    }
    out.solution = DenseBatch::column(std::move(x));
    return out;
}

bool real_path(const LinearOperator& a, const DenseBatch& b) {
    return promote(a.field(), b.field()) == ScalarField::Real64;
}

}  // namespace

bool SolveReport::all_converged() const noexcept {
    return std::all_of(converged.begin(), converged.end(), [](bool c) { return c; });
}

SolveReport cg_solve(const LinearOperator& a, const DenseBatch& y, const SolveOptions& opts) {
    if (y.rows() != a.rows()) {
        throw DimensionMismatch("cg_solve: right-hand side has " + std::to_string(y.rows()) +
                                " rows, operator " + a.describe());
    }
    if (!(opts.relative_tolerance > 0.0)) throw InvalidArgument("cg_solve: tolerance must be positive");
    if (opts.assume_hermitian && !a.shape().square()) {
        throw NonSquare("cg_solve: hermitian mode needs a square operator, got " + a.describe());
    }
    return real_path(a, y) ? cg_impl<double>(a, y, opts) : cg_impl<cplx>(a, y, opts);
}

DenseBatch soft_threshold(const DenseBatch& x, double c) {
    if (c < 0.0 || std::isnan(c)) throw NegativeThreshold("threshold must be nonnegative");
    DenseBatch out = x;
    if (out.is_real()) {
        for (auto& v : out.data<double>()) v = shrink(v, c);
    } else {
        for (auto& v : out.data<cplx>()) v = shrink(v, c);
    }
    return out;
}

IstaResult ista(const LinearOperator& m, const DenseBatch& b, const IstaOptions& opts) {
    if (b.rows() != m.rows() || b.cols() != 1) {
        throw DimensionMismatch("ista: measurement must be a single column of length " +
                                std::to_string(m.rows()));
    }
    if (!(opts.lambda > 0.0)) throw InvalidArgument("ista: lambda must be positive");
    if (opts.steps == 0) throw InvalidArgument("ista: steps must be positive");
    double alpha = 0.0;
    if (opts.step_size) {
        if (!(*opts.step_size > 0.0)) throw InvalidArgument("ista: step size must be positive");
        alpha = *opts.step_size;
    } else {
        const SpectralReport sr =
            power_iteration(m, SpectralMode::Singular, {.tolerance = 1e-6, .max_iterations = 50, .seed = opts.seed});
        const double lipschitz = 1.01 * sr.value * sr.value;
        if (lipschitz == 0.0) throw InvalidArgument("ista: operator has zero norm");
        alpha = 1.0 / lipschitz;
    }
    return real_path(m, b) ? ista_impl<double>(m, b, opts, alpha) : ista_impl<cplx>(m, b, opts, alpha);
}

OmpResult omp(const LinearOperator& m, const DenseBatch& b, index_t sparsity, double residual_tol) {
    if (b.rows() != m.rows() || b.cols() != 1) {
        throw DimensionMismatch("omp: measurement must be a single column of length " +
                                std::to_string(m.rows()));
    }
    if (sparsity < 1 || sparsity > m.cols()) {
        throw KOutOfRange("omp: sparsity " + std::to_string(sparsity) + " outside [1, " +
                          std::to_string(m.cols()) + "]");
    }
    return real_path(m, b) ? omp_impl<double>(m, b, sparsity, residual_tol)
                           : omp_impl<cplx>(m, b, sparsity, residual_tol);
}

SpectralReport power_iteration(const LinearOperator& a, SpectralMode mode, const PowerOptions& opts) {
    if (mode == SpectralMode::Eigen && !a.shape().square()) {
        throw NonSquare("power_iteration: eigen mode needs a square operator, got " + a.describe());
    }
    if (opts.max_iterations == 0) throw InvalidArgument("power_iteration: max_iterations must be positive");
    return a.field() == ScalarField::Real64 ? power_impl<double>(a, mode, opts)
                                            : power_impl<cplx>(a, mode, opts);
}

}  // namespace fastop
