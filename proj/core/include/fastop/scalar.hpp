#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <type_traits>

namespace fastop {

using cplx = std::complex<double>;
using index_t = std::size_t;

/// Scalar field of an operator or batch. Promotion forms a two-element
/// lattice: anything combined with Complex128 is Complex128.
enum class ScalarField : std::uint8_t { Real64, Complex128 };

constexpr std::size_t size_bytes(ScalarField f) noexcept {
    return f == ScalarField::Real64 ? sizeof(double) : sizeof(cplx);
}

constexpr ScalarField promote(ScalarField a, ScalarField b) noexcept {
    return (a == ScalarField::Complex128 || b == ScalarField::Complex128) ? ScalarField::Complex128
                                                                           : ScalarField::Real64;
}

constexpr std::string_view to_string(ScalarField f) noexcept {
    return f == ScalarField::Real64 ? "Real64" : "Complex128";
}

template <class T>
inline constexpr bool is_scalar_v = std::is_same_v<T, double> || std::is_same_v<T, cplx>;

template <class T>
    requires is_scalar_v<T>
inline constexpr ScalarField field_of = std::is_same_v<T, double> ? ScalarField::Real64
                                                                  : ScalarField::Complex128;

inline double conj(double x) noexcept { return x; }
inline cplx conj(cplx x) noexcept { return std::conj(x); }

/// Converts a complex value into T; the imaginary part is dropped for double.
template <class T>
inline T scalar_cast(cplx v) noexcept {
    if constexpr (std::is_same_v<T, double>) {
        return v.real();
    } else {
        return v;
    }
}

}  // namespace fastop
