#include "fastop/leaf.hpp"

#include <algorithm>
#include <numeric>

#include "fastop/transforms.hpp"

namespace fastop {

namespace {

template <class T>
void fill_zero(MatrixView<T> y) {
    std::fill(y.data, y.data + y.size(), T{});
}

template <class T, class F>
void with_batch_storage(const DenseBatch& b, F&& f) {
    if (b.is_real()) {
        f(b.view<double>());
    } else if constexpr (std::is_same_v<T, double>) {
        throw std::logic_error("complex parameters on a real fast path");
    } else {
        f(b.view<cplx>());
    }
}

// ---------------------------------------------------------------------------

class DenseOp final : public StructuredOperator<DenseOp> {
public:
    explicit DenseOp(DenseBatch entries)
        : StructuredOperator(Shape(entries.rows(), entries.cols()), entries.field()),
          entries_(std::move(entries)) {}

    [[nodiscard]] std::string name() const override { return "Dense"; }
    [[nodiscard]] std::size_t own_bytes() const override {
        return entries_.size() * size_bytes(field());
    }

private:
    friend class StructuredOperator<DenseOp>;

    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        fill_zero(y);
        with_batch_storage<T>(entries_, [&](auto a) {
            for (index_t j = 0; j < x.cols; ++j) {
                T* yc = y.col(j).data();
                for (index_t k = 0; k < a.cols; ++k) {
                    const T xk = x(k, j);
                    const auto* ac = a.col(k).data();
                    for (index_t i = 0; i < a.rows; ++i) yc[i] += ac[i] * xk;
                }
            }
        });
    }

    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        with_batch_storage<T>(entries_, [&](auto a) {
            for (index_t j = 0; j < y.cols; ++j) {
                const T* yc = y.col(j).data();
                for (index_t k = 0; k < a.cols; ++k) {
                    const auto* ac = a.col(k).data();
                    T s{};
                    for (index_t i = 0; i < a.rows; ++i) s += conj(ac[i]) * yc[i];
                    x(k, j) = s;
                }
            }
        });
    }

    DenseBatch entries_;
};

class ZeroOp final : public StructuredOperator<ZeroOp> {
public:
    ZeroOp(index_t rows, index_t cols, ScalarField field)
        : StructuredOperator(Shape(rows, cols), field) {}

    [[nodiscard]] std::string name() const override { return "Zero"; }
    [[nodiscard]] std::size_t own_bytes() const override { return sizeof(Shape); }

private:
    friend class StructuredOperator<ZeroOp>;

    template <class T>
    void forward_t(ConstMatrixView<T>, MatrixView<T> y) const {
        fill_zero(y);
    }
    template <class T>
    void backward_t(ConstMatrixView<T>, MatrixView<T> x) const {
        fill_zero(x);
    }
};

class IdentityOp final : public StructuredOperator<IdentityOp> {
public:
    IdentityOp(index_t n, ScalarField field) : StructuredOperator(Shape(n, n), field) {}

    [[nodiscard]] std::string name() const override { return "Identity"; }
    [[nodiscard]] std::size_t own_bytes() const override { return sizeof(index_t); }

private:
    friend class StructuredOperator<IdentityOp>;

    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        std::copy(x.data, x.data + x.size(), y.data);
    }
    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        std::copy(y.data, y.data + y.size(), x.data);
    }
};

class DiagonalOp final : public StructuredOperator<DiagonalOp> {
public:
    explicit DiagonalOp(ScalarArray d)
        : StructuredOperator(Shape(d.size(), d.size()), d.field()), d_(std::move(d)) {}

    [[nodiscard]] std::string name() const override { return "Diagonal"; }
    [[nodiscard]] std::size_t own_bytes() const override { return d_.bytes(); }

private:
    friend class StructuredOperator<DiagonalOp>;

    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        with_storage<T>(d_, [&](auto d) {
            for (index_t j = 0; j < x.cols; ++j)
                for (index_t i = 0; i < x.rows; ++i) y(i, j) = d[i] * x(i, j);
        });
    }
    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        with_storage<T>(d_, [&](auto d) {
            for (index_t j = 0; j < y.cols; ++j)
                for (index_t i = 0; i < y.rows; ++i) x(i, j) = conj(d[i]) * y(i, j);
        });
    }

    ScalarArray d_;
};

// ---------------------------------------------------------------------------

struct Csr {
    std::vector<index_t> row_ptr;
    std::vector<index_t> col_idx;
    ScalarArray values;

    [[nodiscard]] std::size_t bytes() const {
        return sizeof(index_t) * (row_ptr.size() + col_idx.size()) + values.bytes();
    }

    template <class T>
    void apply(ConstMatrixView<T> x, MatrixView<T> y) const {
        with_storage<T>(values, [&](auto v) {
            const index_t rows = row_ptr.size() - 1;
            for (index_t j = 0; j < x.cols; ++j) {
                for (index_t i = 0; i < rows; ++i) {
                    T s{};
                    for (index_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += v[p] * x(col_idx[p], j);
                    y(i, j) = s;
                }
            }
        });
    }
};

template <class V>
Csr build_csr(index_t rows, std::vector<SparseEntry<V>> entries, bool transpose_conj) {
    if (transpose_conj) {
        for (auto& e : entries) {
            std::swap(e.row, e.col);
            e.value = conj(e.value);
        }
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    Csr csr;
    csr.row_ptr.assign(rows + 1, 0);
    std::vector<V> values;
    for (index_t p = 0; p < entries.size(); ++p) {
        const auto& e = entries[p];
        if (p > 0 && entries[p - 1].row == e.row && entries[p - 1].col == e.col) {
            values.back() += e.value;
            continue;
        }
        csr.col_idx.push_back(e.col);
        values.push_back(e.value);
        ++csr.row_ptr[e.row + 1];
    }
    std::partial_sum(csr.row_ptr.begin(), csr.row_ptr.end(), csr.row_ptr.begin());
    csr.values = ScalarArray(std::move(values));
    return csr;
}

class SparseOp final : public StructuredOperator<SparseOp> {
public:
    SparseOp(index_t rows, index_t cols, Csr forward, Csr adjoint)
        : StructuredOperator(Shape(rows, cols), forward.values.field()),
          forward_(std::move(forward)),
          adjoint_(std::move(adjoint)) {}

    [[nodiscard]] std::string name() const override { return "Sparse"; }
    [[nodiscard]] std::size_t own_bytes() const override {
        return forward_.bytes() + adjoint_.bytes();
    }

private:
    friend class StructuredOperator<SparseOp>;

    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        forward_.apply(x, y);
    }
    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        adjoint_.apply(y, x);
    }

    Csr forward_;
    Csr adjoint_;
};

template <class V>
OperatorPtr sparse_from(index_t rows, index_t cols, std::vector<SparseEntry<V>> entries) {
    for (const auto& e : entries) {
        if (e.row >= rows || e.col >= cols) {
            throw IndexOutOfRange("sparse entry (" + std::to_string(e.row) + ", " +
                                  std::to_string(e.col) + ") outside " + std::to_string(rows) +
                                  "x" + std::to_string(cols));
        }
    }
    Csr adj = build_csr(cols, entries, true);
    Csr fwd = build_csr(rows, std::move(entries), false);
    return std::make_shared<SparseOp>(rows, cols, std::move(fwd), std::move(adj));
}

// ---------------------------------------------------------------------------

class FourierOp final : public LinearOperator {
public:
    explicit FourierOp(index_t n) : LinearOperator(Shape(n, n), ScalarField::Complex128) {}

    [[nodiscard]] std::string name() const override { return "Fourier"; }
    [[nodiscard]] std::size_t own_bytes() const override { return sizeof(index_t); }

protected:
    using LinearOperator::backward_fast;
    using LinearOperator::forward_fast;

    void forward_fast(ConstMatrixView<cplx> x, MatrixView<cplx> y) const override {
        const auto plan = transforms::plan_for(rows());
        std::copy(x.data, x.data + x.size(), y.data);
        for (index_t j = 0; j < y.cols; ++j) plan->execute(y.col(j), transforms::Direction::Forward);
    }
    void backward_fast(ConstMatrixView<cplx> y, MatrixView<cplx> x) const override {
        const auto plan = transforms::plan_for(rows());
        std::copy(y.data, y.data + y.size(), x.data);
        for (index_t j = 0; j < x.cols; ++j) plan->execute_adjoint(x.col(j));
    }
};

class HadamardOp final : public StructuredOperator<HadamardOp> {
public:
    explicit HadamardOp(unsigned order)
        : StructuredOperator(Shape(index_t{1} << order, index_t{1} << order), ScalarField::Real64),
          order_(order) {}

    [[nodiscard]] std::string name() const override { return "Hadamard"; }
    [[nodiscard]] std::size_t own_bytes() const override { return sizeof(order_); }

private:
    friend class StructuredOperator<HadamardOp>;

    // H is real symmetric, so forward and backward coincide.
    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        std::copy(x.data, x.data + x.size(), y.data);
        for (index_t j = 0; j < y.cols; ++j) transforms::fwht(y.col(j));
    }
    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        forward_t(y, x);
    }

    unsigned order_;
};

/// Applies a cached length-L spectrum to zero-padded columns and truncates:
/// the shared core of the circulant and Toeplitz operators.
template <class T>
void spectral_apply(std::span<const cplx> spectrum, bool conjugate, ConstMatrixView<T> in,
                    MatrixView<T> out) {
    std::vector<cplx> work(spectrum.size());
    for (index_t j = 0; j < in.cols; ++j) {
        std::fill(work.begin(), work.end(), cplx{});
        const auto src = in.col(j);
        std::copy(src.begin(), src.end(), work.begin());
        transforms::convolve_spectrum(spectrum, work, conjugate);
        const auto dst = out.col(j);
        for (index_t i = 0; i < dst.size(); ++i) dst[i] = scalar_cast<T>(work[i]);
    }
}

class CirculantOp final : public StructuredOperator<CirculantOp> {
public:
    explicit CirculantOp(ScalarArray c)
        : StructuredOperator(Shape(c.size(), c.size()), c.field()),
          c_(std::move(c)),
          spectrum_(transforms::dft(c_.to_complex())) {}

    [[nodiscard]] std::string name() const override { return "Circulant"; }
    [[nodiscard]] std::size_t own_bytes() const override {
        return c_.bytes() + spectrum_.size() * sizeof(cplx);
    }

private:
    friend class StructuredOperator<CirculantOp>;

    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        spectral_apply<T>(spectrum_, false, x, y);
    }
    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        spectral_apply<T>(spectrum_, true, y, x);
    }

    ScalarArray c_;
    std::vector<cplx> spectrum_;
};

class ToeplitzOp final : public StructuredOperator<ToeplitzOp> {
public:
    ToeplitzOp(ScalarArray first_col, ScalarArray first_row_rest)
        : StructuredOperator(Shape(first_col.size(), first_row_rest.size() + 1),
                             promote(first_col.field(), first_row_rest.field())),
          col_(std::move(first_col)),
          row_rest_(std::move(first_row_rest)) {
        // The n x m Toeplitz block sits in the top-left corner of a circulant
        // of length L >= n + m - 1 whose first column is
        // [first_col, 0 ..., 0, reversed first_row_rest].
        const index_t n = rows();
        const index_t m = cols();
        const index_t len = transforms::next_power_of_two(n + m - 1);
        std::vector<cplx> embed(len, cplx{});
        for (index_t i = 0; i < n; ++i) embed[i] = col_[i];
        for (index_t d = 1; d < m; ++d) embed[len - d] = row_rest_[d - 1];
        spectrum_ = transforms::dft(embed);
    }

    [[nodiscard]] std::string name() const override { return "Toeplitz"; }
    [[nodiscard]] std::size_t own_bytes() const override {
        return col_.bytes() + row_rest_.bytes() + spectrum_.size() * sizeof(cplx);
    }

private:
    friend class StructuredOperator<ToeplitzOp>;

    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        spectral_apply<T>(spectrum_, false, x, y);
    }
    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        spectral_apply<T>(spectrum_, true, y, x);
    }

    ScalarArray col_;
    ScalarArray row_rest_;
    std::vector<cplx> spectrum_;
};

class ParametricOp final : public StructuredOperator<ParametricOp> {
public:
    ParametricOp(EntryFunction f, index_t rows, index_t cols, ScalarField field)
        : StructuredOperator(Shape(rows, cols), field), f_(std::move(f)) {}

    [[nodiscard]] std::string name() const override { return "Parametric"; }
    [[nodiscard]] std::size_t own_bytes() const override { return sizeof(EntryFunction); }

private:
    friend class StructuredOperator<ParametricOp>;

    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        for (index_t j = 0; j < x.cols; ++j) {
            for (index_t i = 0; i < rows(); ++i) {
                T s{};
                for (index_t k = 0; k < cols(); ++k) s += scalar_cast<T>(f_(i, k)) * x(k, j);
                y(i, j) = s;
            }
        }
    }
    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        for (index_t j = 0; j < y.cols; ++j) {
            for (index_t k = 0; k < cols(); ++k) {
                T s{};
                for (index_t i = 0; i < rows(); ++i) s += conj(scalar_cast<T>(f_(i, k))) * y(i, j);
                x(k, j) = s;
            }
        }
    }

    EntryFunction f_;
};

template <class V>
DenseBatch batch_from_rows(const std::vector<std::vector<V>>& rows) {
    if (rows.empty() || rows.front().empty()) throw EmptyInput("dense operator needs entries");
    const index_t n = rows.size();
    const index_t m = rows.front().size();
    std::vector<V> entries(n * m);
    for (index_t i = 0; i < n; ++i) {
        if (rows[i].size() != m) throw RaggedGrid("dense rows have different lengths");
        for (index_t j = 0; j < m; ++j) entries[j * n + i] = rows[i][j];
    }
    return {n, m, std::move(entries)};
}

}  // namespace

OperatorPtr make_dense(DenseBatch entries) {
    if (entries.size() == 0) throw EmptyInput("dense operator needs entries");
    return std::make_shared<DenseOp>(std::move(entries));
}

OperatorPtr make_dense(const std::vector<std::vector<double>>& rows) {
    return make_dense(batch_from_rows(rows));
}

OperatorPtr make_dense(const std::vector<std::vector<cplx>>& rows) {
    return make_dense(batch_from_rows(rows));
}

OperatorPtr make_zero(index_t rows, index_t cols, ScalarField field) {
    return std::make_shared<ZeroOp>(rows, cols, field);
}

OperatorPtr make_identity(index_t n, ScalarField field) {
    return std::make_shared<IdentityOp>(n, field);
}

OperatorPtr make_diagonal(ScalarArray d) {
    if (d.empty()) throw EmptyInput("diagonal needs at least one entry");
    return std::make_shared<DiagonalOp>(std::move(d));
}

OperatorPtr make_sparse(index_t rows, index_t cols, std::vector<SparseEntry<double>> entries) {
    return sparse_from(rows, cols, std::move(entries));
}

OperatorPtr make_sparse(index_t rows, index_t cols, std::vector<SparseEntry<cplx>> entries) {
    return sparse_from(rows, cols, std::move(entries));
}

OperatorPtr make_fourier(index_t n) {
    if (n == 0) throw EmptyInput("Fourier size must be positive");
    return std::make_shared<FourierOp>(n);
}

OperatorPtr make_hadamard(unsigned order) {
    // 2^order complex entries must stay addressable.
    if (order >= 59) throw OrderTooLarge("Hadamard order " + std::to_string(order) + " too large");
    return std::make_shared<HadamardOp>(order);
}

OperatorPtr make_circulant(ScalarArray c) {
    if (c.empty()) throw EmptyInput("circulant needs a nonempty first column");
    return std::make_shared<CirculantOp>(std::move(c));
}

OperatorPtr make_toeplitz(ScalarArray first_col, ScalarArray first_row_rest) {
    if (first_col.empty()) throw EmptyInput("Toeplitz needs a nonempty first column");
    return std::make_shared<ToeplitzOp>(std::move(first_col), std::move(first_row_rest));
}

OperatorPtr make_parametric(EntryFunction f, index_t rows, index_t cols, ScalarField field) {
    if (!f) throw InvalidArgument("parametric operator needs an entry function");
    return std::make_shared<ParametricOp>(std::move(f), rows, cols, field);
}

}  // namespace fastop
