#pragma once

#include <span>
#include <stdexcept>
#include <type_traits>
#include <variant>
#include <vector>

#include "fastop/scalar.hpp"

namespace fastop {

/// Owned parameter vector stored as double or complex<double>, so real
/// operators pay 8 bytes per entry.
class ScalarArray {
public:
    ScalarArray() = default;
    ScalarArray(std::vector<double> v) : data_(std::move(v)) {}  // NOLINT(implicit)
    ScalarArray(std::vector<cplx> v) : data_(std::move(v)) {}    // NOLINT(implicit)

    [[nodiscard]] index_t size() const noexcept {
        return std::visit([](const auto& v) { return v.size(); }, data_);
    }
    [[nodiscard]] bool empty() const noexcept { return size() == 0; }
    [[nodiscard]] ScalarField field() const noexcept {
        return data_.index() == 0 ? ScalarField::Real64 : ScalarField::Complex128;
    }
    [[nodiscard]] std::size_t bytes() const noexcept { return size() * size_bytes(field()); }
    [[nodiscard]] cplx operator[](index_t i) const {
        return std::visit([i](const auto& v) { return cplx(v[i]); }, data_);
    }
    [[nodiscard]] std::vector<cplx> to_complex() const {
        return std::visit([](const auto& v) { return std::vector<cplx>(v.begin(), v.end()); }, data_);
    }

    template <class F>
    decltype(auto) visit(F&& f) const {
        return std::visit(std::forward<F>(f), data_);
    }

private:
    std::variant<std::vector<double>, std::vector<cplx>> data_;
};

/// Calls f(std::span<const S>) with the array's storage type S. A complex
/// array combined with real output T is rejected: real fast paths are only
/// reached by real operators.
template <class T, class F>
void with_storage(const ScalarArray& a, F&& f) {
    a.visit([&](const auto& v) {
        using S = typename std::decay_t<decltype(v)>::value_type;
        if constexpr (std::is_same_v<T, double> && std::is_same_v<S, cplx>) {
            throw std::logic_error("complex parameters on a real fast path");
        } else {
            f(std::span<const S>(v));
        }
    });
}

}  // namespace fastop
