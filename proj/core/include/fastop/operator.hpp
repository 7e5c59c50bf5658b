#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fastop/batch.hpp"

namespace fastop {

class LinearOperator;
using OperatorPtr = std::shared_ptr<const LinearOperator>;

/// Default upper bound on the bytes `to_dense` may allocate (2 GiB).
inline constexpr std::size_t kDefaultMaterializationCap = std::size_t{1} << 31;

/// Abstract matrix-free linear map C^cols -> C^rows.
///
/// The public `forward`/`backward` validate dimensions, promote the scalar
/// field and allocate the result. Concrete operators implement the
/// unvalidated `*_fast` hooks, which must overwrite every entry of the output
/// view. The real-valued hooks are only reached when both the operator and
/// the input are Real64.
///
/// Operators are immutable after construction; all methods are safe to call
/// concurrently.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    LinearOperator(const LinearOperator&) = delete;
    LinearOperator& operator=(const LinearOperator&) = delete;

    [[nodiscard]] Shape shape() const noexcept { return shape_; }
    [[nodiscard]] index_t rows() const noexcept { return shape_.rows; }
    [[nodiscard]] index_t cols() const noexcept { return shape_.cols; }
    [[nodiscard]] ScalarField field() const noexcept { return field_; }

    /// Short class name, e.g. "Circulant".
    [[nodiscard]] virtual std::string name() const = 0;
    /// Name plus shape, for diagnostics.
    [[nodiscard]] std::string describe() const;

    /// Parameter bytes owned by this node alone, excluding children and
    /// transient work buffers.
    [[nodiscard]] virtual std::size_t own_bytes() const = 0;
    /// Directly referenced sub-operators (may contain repeats).
    [[nodiscard]] virtual std::vector<const LinearOperator*> children() const { return {}; }

    /// y = A x. Throws DimensionMismatch unless x.rows() == cols().
    [[nodiscard]] DenseBatch forward(const DenseBatch& x) const;
    /// x = A^H y. Throws DimensionMismatch unless y.rows() == rows().
    [[nodiscard]] DenseBatch backward(const DenseBatch& y) const;

protected:
    LinearOperator(Shape shape, ScalarField field) : shape_(shape), field_(field) {}

    virtual void forward_fast(ConstMatrixView<cplx> x, MatrixView<cplx> y) const = 0;
    virtual void backward_fast(ConstMatrixView<cplx> y, MatrixView<cplx> x) const = 0;
    virtual void forward_fast(ConstMatrixView<double> x, MatrixView<double> y) const;
    virtual void backward_fast(ConstMatrixView<double> y, MatrixView<double> x) const;

    // Unvalidated entry into another operator's fast path, for composites.
    template <class T>
    static void forward_of(const LinearOperator& op, ConstMatrixView<T> x, MatrixView<T> y) {
        op.forward_fast(x, y);
    }
    template <class T>
    static void backward_of(const LinearOperator& op, ConstMatrixView<T> y, MatrixView<T> x) {
        op.backward_fast(y, x);
    }

    friend DenseBatch to_dense(const LinearOperator& op, std::size_t cap);

private:
    Shape shape_;
    ScalarField field_;
};

/// Routes both scalar types of the fast-path hooks to the templates
/// `Derived::forward_t<T>` / `Derived::backward_t<T>`.
template <class Derived>
class StructuredOperator : public LinearOperator {
protected:
    using LinearOperator::LinearOperator;

    void forward_fast(ConstMatrixView<cplx> x, MatrixView<cplx> y) const override {
        self().template forward_t<cplx>(x, y);
    }
    void backward_fast(ConstMatrixView<cplx> y, MatrixView<cplx> x) const override {
        self().template backward_t<cplx>(y, x);
    }
    void forward_fast(ConstMatrixView<double> x, MatrixView<double> y) const override {
        self().template forward_t<double>(x, y);
    }
    void backward_fast(ConstMatrixView<double> y, MatrixView<double> x) const override {
        self().template backward_t<double>(y, x);
    }

private:
    const Derived& self() const { return static_cast<const Derived&>(*this); }
};

DenseBatch apply_forward(const LinearOperator& op, const DenseBatch& x);
DenseBatch apply_backward(const LinearOperator& op, const DenseBatch& y);

/// Materializes the operator: column j is forward(e_j). Throws
/// MaterializationTooLarge when rows * cols * size_bytes(field) > cap.
DenseBatch to_dense(const LinearOperator& op, std::size_t cap = kDefaultMaterializationCap);

/// Bytes a dense rows x cols array of the operator's field would occupy.
/// Saturates at SIZE_MAX instead of overflowing.
std::size_t dense_bytes(const LinearOperator& op) noexcept;

/// Hermitian adjoint wrapper. adjoint(adjoint(A)) returns A itself.
OperatorPtr adjoint(OperatorPtr op);

/// Parameter storage of the whole operator tree, counting each distinct
/// operator instance once.
std::size_t footprint_bytes(const LinearOperator& op);

inline ScalarField promote_field(ScalarField a, ScalarField b) noexcept { return promote(a, b); }

}  // namespace fastop
