#include "fastop/operator.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace fastop {

std::string LinearOperator::describe() const { return name() + "(" + shape_.str() + ")"; }

void LinearOperator::forward_fast(ConstMatrixView<double>, MatrixView<double>) const {
    throw std::logic_error("real fast path invoked on complex operator " + describe());
}

void LinearOperator::backward_fast(ConstMatrixView<double>, MatrixView<double>) const {
    throw std::logic_error("real fast path invoked on complex operator " + describe());
}

DenseBatch LinearOperator::forward(const DenseBatch& x) const {
    if (x.rows() != cols()) {
        throw DimensionMismatch("forward of " + describe() + " expects " + std::to_string(cols()) +
                                " rows, got batch " + std::to_string(x.rows()) + "x" +
                                std::to_string(x.cols()));
    }
    const ScalarField out = promote(field_, x.field());
    DenseBatch y(rows(), x.cols(), out);
    if (x.cols() == 0) return y;
    if (out == ScalarField::Real64) {
        forward_fast(x.view<double>(), y.view<double>());
    } else if (x.is_real()) {
        const DenseBatch xc = x.as_complex();
        forward_fast(xc.view<cplx>(), y.view<cplx>());
    } else {
        forward_fast(x.view<cplx>(), y.view<cplx>());
    }
    return y;
}

DenseBatch LinearOperator::backward(const DenseBatch& y) const {
    if (y.rows() != rows()) {
        throw DimensionMismatch("backward of " + describe() + " expects " + std::to_string(rows()) +
                                " rows, got batch " + std::to_string(y.rows()) + "x" +
                                std::to_string(y.cols()));
    }
    const ScalarField out = promote(field_, y.field());
    DenseBatch x(cols(), y.cols(), out);
    if (y.cols() == 0) return x;
    if (out == ScalarField::Real64) {
        backward_fast(y.view<double>(), x.view<double>());
    } else if (y.is_real()) {
        const DenseBatch yc = y.as_complex();
        backward_fast(yc.view<cplx>(), x.view<cplx>());
    } else {
        backward_fast(y.view<cplx>(), x.view<cplx>());
    }
    return x;
}

DenseBatch apply_forward(const LinearOperator& op, const DenseBatch& x) { return op.forward(x); }

DenseBatch apply_backward(const LinearOperator& op, const DenseBatch& y) { return op.backward(y); }

std::size_t dense_bytes(const LinearOperator& op) noexcept {
    constexpr auto kMax = std::numeric_limits<std::size_t>::max();
    const std::size_t elem = size_bytes(op.field());
    if (op.rows() > kMax / op.cols()) return kMax;
    const std::size_t n = op.rows() * op.cols();
    if (n > kMax / elem) return kMax;
    return n * elem;
}

namespace {

template <class T>
void materialize(const LinearOperator& op, DenseBatch& out,
                 void (*apply)(const LinearOperator&, ConstMatrixView<T>, MatrixView<T>)) {
    const index_t n = op.cols();
    const index_t m = op.rows();
    // Unit-vector chunks of about 4 MiB keep the transient input small.
    const index_t width = std::clamp<index_t>((std::size_t{1} << 22) / (sizeof(T) * n), 1, n);
    std::vector<T> unit(n * width);
    MatrixView<T> result = out.view<T>();
    for (index_t j0 = 0; j0 < n; j0 += width) {
        const index_t w = std::min(width, n - j0);
        std::fill(unit.begin(), unit.end(), T{});
        for (index_t j = 0; j < w; ++j) unit[j * n + j0 + j] = T{1};
        apply(op, ConstMatrixView<T>{unit.data(), n, w}, MatrixView<T>{result.data + j0 * m, m, w});
    }
}

}  // namespace

DenseBatch to_dense(const LinearOperator& op, std::size_t cap) {
    const std::size_t bytes = dense_bytes(op);
    if (bytes > cap) {
        throw MaterializationTooLarge("materializing " + op.describe() + " needs " +
                                      std::to_string(bytes) + " bytes, cap is " +
                                      std::to_string(cap));
    }
    DenseBatch out(op.rows(), op.cols(), op.field());
    if (op.field() == ScalarField::Real64) {
        materialize<double>(op, out, [](const LinearOperator& o, ConstMatrixView<double> x,
                                        MatrixView<double> y) { o.forward_fast(x, y); });
    } else {
        materialize<cplx>(op, out, [](const LinearOperator& o, ConstMatrixView<cplx> x,
                                      MatrixView<cplx> y) { o.forward_fast(x, y); });
    }
    return out;
}

namespace {

class AdjointOp final : public LinearOperator {
public:
    explicit AdjointOp(OperatorPtr inner)
        : LinearOperator(Shape(inner->cols(), inner->rows()), inner->field()),
          inner_(std::move(inner)) {}

    [[nodiscard]] std::string name() const override { return "Adjoint<" + inner_->name() + ">"; }
    [[nodiscard]] std::size_t own_bytes() const override { return sizeof(OperatorPtr); }
    [[nodiscard]] std::vector<const LinearOperator*> children() const override {
        return {inner_.get()};
    }
    [[nodiscard]] const OperatorPtr& inner() const noexcept { return inner_; }

protected:
    void forward_fast(ConstMatrixView<cplx> x, MatrixView<cplx> y) const override {
        backward_of(*inner_, x, y);
    }
    void backward_fast(ConstMatrixView<cplx> y, MatrixView<cplx> x) const override {
        forward_of(*inner_, y, x);
    }
    void forward_fast(ConstMatrixView<double> x, MatrixView<double> y) const override {
        backward_of(*inner_, x, y);
    }
    void backward_fast(ConstMatrixView<double> y, MatrixView<double> x) const override {
        forward_of(*inner_, y, x);
    }

private:
    OperatorPtr inner_;
};

}  // namespace

OperatorPtr adjoint(OperatorPtr op) {
    if (!op) throw InvalidArgument("adjoint of a null operator");
    if (const auto* adj = dynamic_cast<const AdjointOp*>(op.get())) return adj->inner();
    return std::make_shared<AdjointOp>(std::move(op));
}

std::size_t footprint_bytes(const LinearOperator& op) {
    std::unordered_set<const LinearOperator*> seen;
    std::vector<const LinearOperator*> stack{&op};
    std::size_t total = 0;
    while (!stack.empty()) {
        const LinearOperator* cur = stack.back();
        stack.pop_back();
        if (!seen.insert(cur).second) continue;
        total += cur->own_bytes();
        for (const LinearOperator* c : cur->children()) stack.push_back(c);
    }
    return total;
}

}  // namespace fastop
