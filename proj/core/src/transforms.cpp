#include "fastop/transforms.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace fastop::transforms {

namespace {

thread_local KernelStats tls_stats;

cplx unit_root(index_t k, index_t n) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    return {std::cos(angle), std::sin(angle)};
}

}  // namespace

KernelStats& kernel_stats() noexcept { return tls_stats; }
void reset_kernel_stats() noexcept { tls_stats = {}; }

index_t next_power_of_two(index_t n) {
    if (n <= 1) return 1;
    if (n > (std::numeric_limits<index_t>::max() >> 1) + 1) {
        throw DimensionOverflow("no power of two >= " + std::to_string(n));
    }
    return std::bit_ceil(n);
}

unsigned log2_exact(index_t n) {
    if (!is_power_of_two(n)) throw NotPowerOfTwo("length " + std::to_string(n) + " is not 2^k");
    return static_cast<unsigned>(std::countr_zero(n));
}

DftPlan::DftPlan(index_t n) : n_(n), pow2_(is_power_of_two(n)) {
    if (n == 0) throw EmptyInput("DFT length must be positive");
    if (pow2_) {
        twiddles_.resize(n / 2);
        for (index_t k = 0; k < n / 2; ++k) twiddles_[k] = unit_root(k, n);
        return;
    }
    const index_t m = next_power_of_two(2 * n - 1);
    inner_ = plan_for(m);
    chirp_.resize(n);
    const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n);
    for (index_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the angle small and exact.
        const std::uint64_t sq = (static_cast<std::uint64_t>(k) * k) % two_n;
        const double angle = -std::numbers::pi * static_cast<double>(sq) / static_cast<double>(n);
        chirp_[k] = {std::cos(angle), std::sin(angle)};
    }
    filter_.assign(m, cplx{});
    filter_[0] = std::conj(chirp_[0]);
    for (index_t t = 1; t < n; ++t) {
        filter_[t] = std::conj(chirp_[t]);
        filter_[m - t] = std::conj(chirp_[t]);
    }
    inner_->execute(filter_, Direction::Forward);
}

std::size_t DftPlan::table_bytes() const noexcept {
    std::size_t b = sizeof(cplx) * (twiddles_.size() + chirp_.size() + filter_.size());
    if (inner_) b += inner_->table_bytes();
    return b;
}

void DftPlan::radix2(std::span<cplx> data, bool conjugate) const {
    const index_t n = n_;
    if (n == 1) return;
    // Bit-reversal permutation.
    for (index_t i = 1, j = 0; i < n; ++i) {
        index_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    for (index_t len = 2; len <= n; len <<= 1) {
        const index_t half = len / 2;
        const index_t stride = n / len;
        for (index_t start = 0; start < n; start += len) {
            for (index_t k = 0; k < half; ++k) {
                const cplx w = conjugate ? std::conj(twiddles_[k * stride]) : twiddles_[k * stride];
                const cplx u = data[start + k];
                const cplx v = data[start + k + half] * w;
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
        tls_stats.butterflies += n / 2;
    }
}

void DftPlan::bluestein(std::span<cplx> data) const {
    const index_t m = inner_->size();
    std::vector<cplx> work(m, cplx{});
    for (index_t k = 0; k < n_; ++k) work[k] = data[k] * chirp_[k];
    inner_->execute(work, Direction::Forward);
    for (index_t k = 0; k < m; ++k) work[k] *= filter_[k];
    inner_->execute(work, Direction::Inverse);
    for (index_t j = 0; j < n_; ++j) data[j] = work[j] * chirp_[j];
    tls_stats.pointwise += 2 * n_ + m;
}

void DftPlan::execute(std::span<cplx> data, Direction dir) const {
    if (data.size() != n_) {
        throw DimensionMismatch("DFT plan of length " + std::to_string(n_) + " applied to length " +
                                std::to_string(data.size()));
    }
    if (dir == Direction::Forward) {
        if (pow2_) {
            radix2(data, false);
        } else {
            bluestein(data);
        }
        return;
    }
    execute_adjoint(data);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : data) v *= scale;
}

void DftPlan::execute_adjoint(std::span<cplx> data) const {
    if (data.size() != n_) {
        throw DimensionMismatch("DFT plan of length " + std::to_string(n_) + " applied to length " +
                                std::to_string(data.size()));
    }
    if (pow2_) {
        radix2(data, true);
        return;
    }
    // F^H x = conj(F conj(x)).
    for (auto& v : data) v = std::conj(v);
    bluestein(data);
    for (auto& v : data) v = std::conj(v);
}

std::shared_ptr<const DftPlan> plan_for(index_t n) {
    static std::mutex mutex;
    static std::map<index_t, std::shared_ptr<const DftPlan>> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(n); it != cache.end()) return it->second;
    }
    // Built outside the lock: Bluestein plans recursively request their inner plan.
    auto plan = std::make_shared<const DftPlan>(n);
    std::lock_guard lock(mutex);
    return cache.emplace(n, std::move(plan)).first->second;
}

std::vector<cplx> dft(std::span<const cplx> x, Direction dir) {
    std::vector<cplx> out(x.begin(), x.end());
    if (out.empty()) throw EmptyInput("DFT of an empty vector");
    plan_for(out.size())->execute(out, dir);
    return out;
}

template <class T>
void fwht(std::span<T> x) {
    const index_t n = x.size();
    if (!is_power_of_two(n)) {
        throw NotPowerOfTwo("Walsh-Hadamard transform needs length 2^k, got " + std::to_string(n));
    }
    for (index_t half = 1; half < n; half <<= 1) {
        for (index_t start = 0; start < n; start += 2 * half) {
            for (index_t k = start; k < start + half; ++k) {
                const T a = x[k];
                const T b = x[k + half];
                x[k] = a + b;
                x[k + half] = a - b;
            }
        }
        tls_stats.butterflies += n / 2;
    }
}

template void fwht<double>(std::span<double>);
template void fwht<cplx>(std::span<cplx>);

void convolve_spectrum(std::span<const cplx> spectrum, std::span<cplx> data, bool conjugate) {
    const index_t n = spectrum.size();
    if (data.size() != n) {
        throw DimensionMismatch("convolution of lengths " + std::to_string(n) + " and " +
                                std::to_string(data.size()));
    }
    const auto plan = plan_for(n);
    plan->execute(data, Direction::Forward);
    if (conjugate) {
        for (index_t k = 0; k < n; ++k) data[k] *= std::conj(spectrum[k]);
    } else {
        for (index_t k = 0; k < n; ++k) data[k] *= spectrum[k];
    }
    tls_stats.pointwise += n;
    plan->execute(data, Direction::Inverse);
}

std::vector<cplx> circular_convolve(std::span<const cplx> c, std::span<const cplx> x) {
    if (c.size() != x.size()) {
        throw DimensionMismatch("circular convolution of lengths " + std::to_string(c.size()) +
                                " and " + std::to_string(x.size()));
    }
    if (c.empty()) throw EmptyInput("circular convolution of empty vectors");
    const std::vector<cplx> spectrum = dft(c);
    std::vector<cplx> out(x.begin(), x.end());
    convolve_spectrum(spectrum, out, false);
    return out;
}

std::vector<double> circular_convolve(std::span<const double> c, std::span<const double> x) {
    const std::vector<cplx> cc(c.begin(), c.end());
    const std::vector<cplx> xc(x.begin(), x.end());
    const std::vector<cplx> y = circular_convolve(std::span<const cplx>(cc), std::span<const cplx>(xc));
    std::vector<double> out(y.size());
    for (index_t i = 0; i < y.size(); ++i) out[i] = y[i].real();
    return out;
}

}  // namespace fastop::transforms
