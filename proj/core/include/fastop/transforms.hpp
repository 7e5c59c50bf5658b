#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fastop/errors.hpp"
#include "fastop/scalar.hpp"

namespace fastop::transforms {

enum class Direction { Forward, Inverse };

/// Precomputed tables for a length-n DFT.
///
/// Forward computes X_j = sum_k x_k w^{jk} with w = exp(-2 pi i / n), without
/// normalization. Inverse uses w^{-jk} and scales by 1/n. Power-of-two lengths
/// use an iterative radix-2 kernel; other lengths use Bluestein's chirp-z
/// algorithm on a power-of-two inner transform of length >= 2n - 1.
class DftPlan {
public:
    explicit DftPlan(index_t n);

    [[nodiscard]] index_t size() const noexcept { return n_; }

    /// In-place transform; `data.size()` must equal size().
    void execute(std::span<cplx> data, Direction dir) const;
    /// Unnormalized transform with conjugated twiddles, i.e. F^H x.
    void execute_adjoint(std::span<cplx> data) const;

    /// Bytes held by the twiddle/chirp tables (the inner plan included).
    [[nodiscard]] std::size_t table_bytes() const noexcept;

private:
    void radix2(std::span<cplx> data, bool conjugate) const;
    void bluestein(std::span<cplx> data) const;

    index_t n_;
    bool pow2_;
    std::vector<cplx> twiddles_;  // exp(-2 pi i k / n), k < n / 2
    std::vector<cplx> chirp_;     // exp(-pi i k^2 / n), k < n
    std::vector<cplx> filter_;    // inner-length spectrum of the conjugate chirp
    std::shared_ptr<const DftPlan> inner_;
};

/// Shared, immutable plan for length n. Plans are cached process-wide and are
/// not part of any operator footprint.
std::shared_ptr<const DftPlan> plan_for(index_t n);

[[nodiscard]] std::vector<cplx> dft(std::span<const cplx> x, Direction dir = Direction::Forward);

/// Sylvester-ordered fast Walsh-Hadamard transform, in place.
/// Throws NotPowerOfTwo unless x.size() is 2^k.
template <class T>
void fwht(std::span<T> x);
template <class T>
[[nodiscard]] std::vector<T> fwht_copy(std::span<const T> x) {
    std::vector<T> out(x.begin(), x.end());
    fwht(std::span<T>(out));
    return out;
}

/// y_i = sum_k c_{(i-k) mod n} x_k, evaluated through the DFT.
[[nodiscard]] std::vector<cplx> circular_convolve(std::span<const cplx> c, std::span<const cplx> x);
/// Real inputs give a real result; the imaginary round-off is discarded.
[[nodiscard]] std::vector<double> circular_convolve(std::span<const double> c,
                                                    std::span<const double> x);

/// data <- idft(spectrum .* dft(data)), or with conj(spectrum) when
/// `conjugate` is set (circular correlation).
void convolve_spectrum(std::span<const cplx> spectrum, std::span<cplx> data, bool conjugate);

[[nodiscard]] constexpr bool is_power_of_two(index_t n) noexcept {
    return n != 0 && (n & (n - 1)) == 0;
}
[[nodiscard]] index_t next_power_of_two(index_t n);
[[nodiscard]] unsigned log2_exact(index_t n);

/// Per-thread counters of scalar kernel work: radix-2 / Walsh butterflies and
/// pointwise spectral multiplications.
struct KernelStats {
    std::uint64_t butterflies = 0;
    std::uint64_t pointwise = 0;

    [[nodiscard]] std::uint64_t total() const noexcept { return butterflies + pointwise; }
};

KernelStats& kernel_stats() noexcept;
void reset_kernel_stats() noexcept;

}  // namespace fastop::transforms
