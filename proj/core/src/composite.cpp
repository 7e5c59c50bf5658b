#include "fastop/composite.hpp"

#include <algorithm>
#include <span>

namespace fastop {

namespace {

ScalarField promote_all(const std::vector<OperatorPtr>& ops) {
    ScalarField f = ScalarField::Real64;
    for (const auto& op : ops) f = promote(f, op->field());
    return f;
}

void require_non_null(const std::vector<OperatorPtr>& ops, const char* what) {
    for (const auto& op : ops) {
        if (!op) throw InvalidArgument(std::string(what) + " received a null operator");
    }
}

index_t checked_mul(index_t a, index_t b) {
    index_t r = 0;
    if (__builtin_mul_overflow(a, b, &r)) {
        throw DimensionOverflow("dimension product " + std::to_string(a) + " * " +
                                std::to_string(b) + " overflows");
    }
    return r;
}

/// Common base for composites: owns the children and forwards into their
/// unchecked fast paths.
template <class Derived>
class CompositeOperator : public StructuredOperator<Derived> {
public:
    [[nodiscard]] std::vector<const LinearOperator*> children() const override {
        std::vector<const LinearOperator*> out;
        out.reserve(children_.size());
        for (const auto& c : children_) out.push_back(c.get());
        return out;
    }

protected:
    CompositeOperator(Shape shape, ScalarField field, std::vector<OperatorPtr> children)
        : StructuredOperator<Derived>(shape, field), children_(std::move(children)) {}

    template <class T>
    static void fwd(const LinearOperator& op, ConstMatrixView<T> x, MatrixView<T> y) {
        LinearOperator::forward_of(op, x, y);
    }
    template <class T>
    static void bwd(const LinearOperator& op, ConstMatrixView<T> y, MatrixView<T> x) {
        LinearOperator::backward_of(op, y, x);
    }
    template <class T>
    static void run(const LinearOperator& op, bool adjoint, ConstMatrixView<T> in, MatrixView<T> out) {
        if (adjoint) {
            bwd<T>(op, in, out);
        } else {
            fwd<T>(op, in, out);
        }
    }

    std::vector<OperatorPtr> children_;
};

// ---------------------------------------------------------------------------

class ProductOp final : public CompositeOperator<ProductOp> {
public:
    explicit ProductOp(const std::vector<OperatorPtr>& factors)
        : CompositeOperator(Shape(factors.front()->rows(), factors.back()->cols()),
                            promote_all(factors), factors) {}

    [[nodiscard]] std::string name() const override { return "Product"; }
    [[nodiscard]] std::size_t own_bytes() const override {
        return children_.size() * sizeof(OperatorPtr);
    }

private:
    friend class StructuredOperator<ProductOp>;

    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        const index_t k = x.cols;
        std::vector<T> cur(x.data, x.data + x.size());
        for (auto it = children_.rbegin(); it != children_.rend(); ++it) {
            const LinearOperator& f = **it;
            if (std::next(it) == children_.rend()) {
                fwd<T>(f, {cur.data(), f.cols(), k}, y);
                return;
            }
            std::vector<T> next(f.rows() * k);
            fwd<T>(f, {cur.data(), f.cols(), k}, {next.data(), f.rows(), k});
            cur = std::move(next);
        }
    }

    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        const index_t k = y.cols;
        std::vector<T> cur(y.data, y.data + y.size());
        for (auto it = children_.begin(); it != children_.end(); ++it) {
            const LinearOperator& f = **it;
            if (std::next(it) == children_.end()) {
                bwd<T>(f, {cur.data(), f.rows(), k}, x);
                return;
            }
            std::vector<T> next(f.cols() * k);
            bwd<T>(f, {cur.data(), f.rows(), k}, {next.data(), f.cols(), k});
            cur = std::move(next);
        }
    }
};

// ---------------------------------------------------------------------------

Shape kron_shape(const std::vector<OperatorPtr>& factors) {
    index_t r = 1;
    index_t c = 1;
    for (const auto& f : factors) {
        r = checked_mul(r, f->rows());
        c = checked_mul(c, f->cols());
    }
    return {r, c};
}

class KronOp final : public CompositeOperator<KronOp> {
public:
    explicit KronOp(const std::vector<OperatorPtr>& factors)
        : CompositeOperator(kron_shape(factors), promote_all(factors), factors) {}

    [[nodiscard]] std::string name() const override { return "Kron"; }
    [[nodiscard]] std::size_t own_bytes() const override {
        return children_.size() * sizeof(OperatorPtr);
    }

private:
    friend class StructuredOperator<KronOp>;

    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        apply<T>(children_, false, x, y);
    }
    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        apply<T>(children_, true, y, x);
    }

    // (H (x) B) vec(X) = vec(B X H^T), with H the Kronecker product of all
    // factors but the last. The adjoint uses H^H (x) B^H with the same layout.
    template <class T>
    static void apply(std::span<const OperatorPtr> f, bool adj, ConstMatrixView<T> x, MatrixView<T> y) {
        const auto in_dim = [adj](const LinearOperator& o) { return adj ? o.rows() : o.cols(); };
        const auto out_dim = [adj](const LinearOperator& o) { return adj ? o.cols() : o.rows(); };
        if (f.size() == 1) {
            run<T>(*f.front(), adj, x, y);
            return;
        }
        const auto head = f.first(f.size() - 1);
        const LinearOperator& tail = *f.back();
        index_t head_in = 1;
        index_t head_out = 1;
        for (const auto& h : head) {
            head_in *= in_dim(*h);
            head_out *= out_dim(*h);
        }
        const index_t tail_in = in_dim(tail);
        const index_t tail_out = out_dim(tail);
        const index_t k = x.cols;

        // Z = B X for every column block at once.
        std::vector<T> z(tail_out * head_in * k);
        run<T>(tail, adj, {x.data, tail_in, head_in * k}, {z.data(), tail_out, head_in * k});

        std::vector<T> zt(z.size());
        for (index_t j = 0; j < k; ++j) {
            const T* src = z.data() + j * tail_out * head_in;
            T* dst = zt.data() + j * tail_out * head_in;
            for (index_t a = 0; a < head_in; ++a)
                for (index_t b = 0; b < tail_out; ++b) dst[b * head_in + a] = src[a * tail_out + b];
        }

        // W = H Z^T, then Y = W^T.
        std::vector<T> w(head_out * tail_out * k);
        apply<T>(head, adj, {zt.data(), head_in, tail_out * k}, {w.data(), head_out, tail_out * k});
        for (index_t j = 0; j < k; ++j) {
            const T* src = w.data() + j * head_out * tail_out;
            T* dst = y.col(j).data();
            for (index_t b = 0; b < tail_out; ++b)
                for (index_t a = 0; a < head_out; ++a) dst[a * tail_out + b] = src[b * head_out + a];
        }
    }
};

// ---------------------------------------------------------------------------

/// Copies rows [offset, offset + len) of every column of `src` into a packed batch.
template <class T>
std::vector<T> slice_rows(ConstMatrixView<T> src, index_t offset, index_t len) {
    std::vector<T> out(len * src.cols);
    for (index_t j = 0; j < src.cols; ++j) {
        const T* s = src.data + j * src.rows + offset;
        std::copy(s, s + len, out.data() + j * len);
    }
    return out;
}

template <class T>
void add_rows(MatrixView<T> dst, index_t offset, const std::vector<T>& part, index_t len) {
    for (index_t j = 0; j < dst.cols; ++j) {
        T* d = dst.data + j * dst.rows + offset;
        const T* s = part.data() + j * len;
        for (index_t i = 0; i < len; ++i) d[i] += s[i];
    }
}

template <class T>
void put_rows(MatrixView<T> dst, index_t offset, const std::vector<T>& part, index_t len) {
    for (index_t j = 0; j < dst.cols; ++j) {
        std::copy(part.data() + j * len, part.data() + (j + 1) * len, dst.data + j * dst.rows + offset);
    }
}

struct GridLayout {
    index_t block_rows = 0;
    index_t block_cols = 0;
    std::vector<index_t> heights;
    std::vector<index_t> widths;
    std::vector<index_t> row_offsets;  // size block_rows + 1
    std::vector<index_t> col_offsets;  // size block_cols + 1
};

std::string coords(index_t i, index_t j) {
    return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

GridLayout layout_of(const BlockGrid& grid) {
    if (grid.empty() || grid.front().empty()) throw EmptyInput("block grid is empty");
    GridLayout g;
    g.block_rows = grid.size();
    g.block_cols = grid.front().size();
    for (index_t i = 0; i < g.block_rows; ++i) {
        if (grid[i].size() != g.block_cols) {
            throw RaggedGrid("block row " + std::to_string(i) + " has " +
                             std::to_string(grid[i].size()) + " blocks, expected " +
                             std::to_string(g.block_cols));
        }
        for (index_t j = 0; j < g.block_cols; ++j) {
            if (!grid[i][j]) throw InvalidArgument("null block at " + coords(i, j));
        }
    }
    for (index_t i = 0; i < g.block_rows; ++i) g.heights.push_back(grid[i][0]->rows());
    for (index_t j = 0; j < g.block_cols; ++j) g.widths.push_back(grid[0][j]->cols());
    for (index_t i = 0; i < g.block_rows; ++i) {
        for (index_t j = 0; j < g.block_cols; ++j) {
            const auto& b = *grid[i][j];
            if (b.rows() != g.heights[i] || b.cols() != g.widths[j]) {
                throw BlockShapeMismatch("block " + coords(i, j) + " is " + b.shape().str() +
                                         ", expected " + std::to_string(g.heights[i]) + "x" +
                                         std::to_string(g.widths[j]));
            }
        }
    }
    g.row_offsets.assign(1, 0);
    for (auto h : g.heights) g.row_offsets.push_back(g.row_offsets.back() + h);
    g.col_offsets.assign(1, 0);
    for (auto w : g.widths) g.col_offsets.push_back(g.col_offsets.back() + w);
    return g;
}

std::vector<OperatorPtr> flatten(const BlockGrid& grid) {
    std::vector<OperatorPtr> out;
    for (const auto& row : grid) out.insert(out.end(), row.begin(), row.end());
    return out;
}

class BlocksOp final : public CompositeOperator<BlocksOp> {
public:
    BlocksOp(const BlockGrid& grid, GridLayout layout)
        : CompositeOperator(Shape(layout.row_offsets.back(), layout.col_offsets.back()),
                            promote_all(flatten(grid)), flatten(grid)),
          layout_(std::move(layout)) {}

    [[nodiscard]] std::string name() const override { return "Blocks"; }
    [[nodiscard]] std::size_t own_bytes() const override {
        return children_.size() * sizeof(OperatorPtr) +
               sizeof(index_t) * (layout_.row_offsets.size() + layout_.col_offsets.size());
    }

private:
    friend class StructuredOperator<BlocksOp>;

    [[nodiscard]] const LinearOperator& block(index_t i, index_t j) const {
        return *children_[i * layout_.block_cols + j];
    }

    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        const index_t k = x.cols;
        std::vector<std::vector<T>> parts;
        for (index_t j = 0; j < layout_.block_cols; ++j)
            parts.push_back(slice_rows(x, layout_.col_offsets[j], layout_.widths[j]));
        std::fill(y.data, y.data + y.size(), T{});
        // Partial sums accumulate in grid order, so results are deterministic.
        for (index_t i = 0; i < layout_.block_rows; ++i) {
            const index_t h = layout_.heights[i];
            std::vector<T> out(h * k);
            for (index_t j = 0; j < layout_.block_cols; ++j) {
                fwd<T>(block(i, j), {parts[j].data(), layout_.widths[j], k}, {out.data(), h, k});
                add_rows(y, layout_.row_offsets[i], out, h);
            }
        }
    }

    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        const index_t k = y.cols;
        std::vector<std::vector<T>> parts;
        for (index_t i = 0; i < layout_.block_rows; ++i)
            parts.push_back(slice_rows(y, layout_.row_offsets[i], layout_.heights[i]));
        std::fill(x.data, x.data + x.size(), T{});
        for (index_t j = 0; j < layout_.block_cols; ++j) {
            const index_t w = layout_.widths[j];
            std::vector<T> out(w * k);
            for (index_t i = 0; i < layout_.block_rows; ++i) {
                bwd<T>(block(i, j), {parts[i].data(), layout_.heights[i], k}, {out.data(), w, k});
                add_rows(x, layout_.col_offsets[j], out, w);
            }
        }
    }

    GridLayout layout_;
};

// ---------------------------------------------------------------------------

Shape block_diag_shape(const std::vector<OperatorPtr>& blocks) {
    index_t r = 0;
    index_t c = 0;
    for (const auto& b : blocks) {
        r += b->rows();
        c += b->cols();
    }
    return {r, c};
}

class BlockDiagOp final : public CompositeOperator<BlockDiagOp> {
public:
    explicit BlockDiagOp(const std::vector<OperatorPtr>& blocks)
        : CompositeOperator(block_diag_shape(blocks), promote_all(blocks), blocks) {}

    [[nodiscard]] std::string name() const override { return "BlockDiag"; }
    [[nodiscard]] std::size_t own_bytes() const override {
        return children_.size() * sizeof(OperatorPtr);
    }

private:
    friend class StructuredOperator<BlockDiagOp>;

    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        apply<T>(false, x, y);
    }
    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        apply<T>(true, y, x);
    }

    template <class T>
    void apply(bool adj, ConstMatrixView<T> in, MatrixView<T> out) const {
        const index_t k = in.cols;
        index_t in_off = 0;
        index_t out_off = 0;
        for (const auto& b : children_) {
            const index_t n_in = adj ? b->rows() : b->cols();
            const index_t n_out = adj ? b->cols() : b->rows();
            if (k == 1) {
                run<T>(*b, adj, {in.data + in_off, n_in, 1}, {out.data + out_off, n_out, 1});
            } else {
                const std::vector<T> part = slice_rows(in, in_off, n_in);
                std::vector<T> res(n_out * k);
                run<T>(*b, adj, {part.data(), n_in, k}, {res.data(), n_out, k});
                put_rows(out, out_off, res, n_out);
            }
            in_off += n_in;
            out_off += n_out;
        }
    }
};

// ---------------------------------------------------------------------------

class PartialOp final : public CompositeOperator<PartialOp> {
public:
    PartialOp(OperatorPtr base, std::optional<std::vector<index_t>> rows,
              std::optional<std::vector<index_t>> cols)
        : CompositeOperator(Shape(rows ? rows->size() : base->rows(), cols ? cols->size() : base->cols()),
                            base->field(), {base}),
          rows_(std::move(rows)),
          cols_(std::move(cols)) {}

    [[nodiscard]] std::string name() const override { return "Partial"; }
    [[nodiscard]] std::size_t own_bytes() const override {
        return sizeof(OperatorPtr) +
               sizeof(index_t) * ((rows_ ? rows_->size() : 0) + (cols_ ? cols_->size() : 0));
    }

private:
    friend class StructuredOperator<PartialOp>;

    [[nodiscard]] const LinearOperator& base() const { return *children_.front(); }

    // Scatter-add through `idx` into a zeroed `full`-row batch.
    template <class T>
    static std::vector<T> scatter(ConstMatrixView<T> in, const std::vector<index_t>& idx, index_t full) {
        std::vector<T> out(full * in.cols, T{});
        for (index_t j = 0; j < in.cols; ++j)
            for (index_t p = 0; p < idx.size(); ++p) out[j * full + idx[p]] += in(p, j);
        return out;
    }

    template <class T>
    static void gather(const std::vector<T>& full_data, index_t full, const std::vector<index_t>& idx,
                       MatrixView<T> out) {
        for (index_t j = 0; j < out.cols; ++j)
            for (index_t p = 0; p < idx.size(); ++p) out(p, j) = full_data[j * full + idx[p]];
    }

    template <class T>
    void apply(bool adj, const std::optional<std::vector<index_t>>& in_idx,
               const std::optional<std::vector<index_t>>& out_idx, ConstMatrixView<T> in,
               MatrixView<T> out) const {
        const index_t k = in.cols;
        const index_t full_in = adj ? base().rows() : base().cols();
        const index_t full_out = adj ? base().cols() : base().rows();
        std::vector<T> expanded;
        ConstMatrixView<T> src = in;
        if (in_idx) {
            expanded = scatter(in, *in_idx, full_in);
            src = {expanded.data(), full_in, k};
        }
        if (!out_idx) {
            run<T>(base(), adj, src, out);
            return;
        }
        std::vector<T> full(full_out * k);
        run<T>(base(), adj, src, {full.data(), full_out, k});
        gather(full, full_out, *out_idx, out);
    }

    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        apply<T>(false, cols_, rows_, x, y);
    }
    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        apply<T>(true, rows_, cols_, y, x);
    }

    std::optional<std::vector<index_t>> rows_;
    std::optional<std::vector<index_t>> cols_;
};

// ---------------------------------------------------------------------------

class PolynomialOp final : public CompositeOperator<PolynomialOp> {
public:
    PolynomialOp(OperatorPtr base, ScalarArray coeffs)
        : CompositeOperator(base->shape(), promote(base->field(), coeffs.field()), {base}),
          coeffs_(std::move(coeffs)) {}

    [[nodiscard]] std::string name() const override { return "Polynomial"; }
    [[nodiscard]] std::size_t own_bytes() const override {
        return sizeof(OperatorPtr) + coeffs_.bytes();
    }

private:
    friend class StructuredOperator<PolynomialOp>;

    // y = c_d x; y = A y + c_i x for i = d-1 .. 0.
    template <class T>
    void horner(bool adj, ConstMatrixView<T> x, MatrixView<T> y) const {
        const LinearOperator& a = *children_.front();
        with_storage<T>(coeffs_, [&](auto c) {
            const auto coef = [&](index_t i) -> T {
                if (adj) return conj(c[i]);
                return c[i];
            };
            const index_t deg = c.size() - 1;
            const index_t len = x.size();
            for (index_t p = 0; p < len; ++p) y.data[p] = coef(deg) * x.data[p];
            std::vector<T> tmp(len);
            for (index_t i = deg; i-- > 0;) {
                run<T>(a, adj, y, {tmp.data(), y.rows, y.cols});
                const T ci = coef(i);
                for (index_t p = 0; p < len; ++p) y.data[p] = tmp[p] + ci * x.data[p];
            }
        });
    }

    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        horner<T>(false, x, y);
    }
    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        horner<T>(true, y, x);
    }

    ScalarArray coeffs_;
};

class PowerOp final : public CompositeOperator<PowerOp> {
public:
    PowerOp(OperatorPtr base, unsigned k)
        : CompositeOperator(base->shape(), base->field(), {base}), k_(k) {}

    [[nodiscard]] std::string name() const override { return "Power"; }
    [[nodiscard]] std::size_t own_bytes() const override {
        return sizeof(OperatorPtr) + sizeof(k_);
    }

private:
    friend class StructuredOperator<PowerOp>;

    template <class T>
    void repeat(bool adj, ConstMatrixView<T> x, MatrixView<T> y) const {
        std::copy(x.data, x.data + x.size(), y.data);
        std::vector<T> tmp(x.size());
        for (unsigned i = 0; i < k_; ++i) {
            run<T>(*children_.front(), adj, y, {tmp.data(), y.rows, y.cols});
            std::copy(tmp.begin(), tmp.end(), y.data);
        }
    }

    template <class T>
    void forward_t(ConstMatrixView<T> x, MatrixView<T> y) const {
        repeat<T>(false, x, y);
    }
    template <class T>
    void backward_t(ConstMatrixView<T> y, MatrixView<T> x) const {
        repeat<T>(true, y, x);
    }

    unsigned k_;
};

void require_square(const OperatorPtr& base, const char* what) {
    if (!base) throw InvalidArgument(std::string(what) + " of a null operator");
    if (!base->shape().square()) {
        throw NonSquare(std::string(what) + " needs a square base, got " + base->describe());
    }
}

void check_indices(const std::optional<std::vector<index_t>>& idx, index_t bound, const char* what) {
    if (!idx) return;
    if (idx->empty()) throw EmptyInput(std::string("partial ") + what + " index list is empty");
    for (index_t i : *idx) {
        if (i >= bound) {
            throw IndexOutOfRange(std::string("partial ") + what + " index " + std::to_string(i) +
                                  " out of range [0, " + std::to_string(bound) + ")");
        }
    }
}

}  // namespace

OperatorPtr product(std::vector<OperatorPtr> factors) {
    if (factors.empty()) throw EmptyInput("product needs at least one factor");
    require_non_null(factors, "product");
    for (index_t i = 0; i + 1 < factors.size(); ++i) {
        if (factors[i]->cols() != factors[i + 1]->rows()) {
            throw ChainMismatch("product factors " + std::to_string(i) + " (" + factors[i]->describe() +
                                ") and " + std::to_string(i + 1) + " (" +
                                factors[i + 1]->describe() + ") do not chain");
        }
    }
    return std::make_shared<ProductOp>(std::move(factors));
}

OperatorPtr kron(std::vector<OperatorPtr> factors) {
    if (factors.size() < 2) throw TooFewFactors("Kronecker product needs at least two factors");
    require_non_null(factors, "kron");
    return std::make_shared<KronOp>(std::move(factors));
}

OperatorPtr blocks(BlockGrid grid) {
    GridLayout layout = layout_of(grid);
    return std::make_shared<BlocksOp>(grid, std::move(layout));
}

OperatorPtr block_diag(std::vector<OperatorPtr> blocks) {
    if (blocks.empty()) throw EmptyInput("block_diag needs at least one block");
    require_non_null(blocks, "block_diag");
    return std::make_shared<BlockDiagOp>(std::move(blocks));
}

OperatorPtr partial(OperatorPtr base, std::optional<std::vector<index_t>> row_indices,
                    std::optional<std::vector<index_t>> col_indices) {
    if (!base) throw InvalidArgument("partial of a null operator");
    check_indices(row_indices, base->rows(), "row");
    check_indices(col_indices, base->cols(), "column");
    return std::make_shared<PartialOp>(std::move(base), std::move(row_indices), std::move(col_indices));
}

OperatorPtr polynomial(OperatorPtr base, ScalarArray coeffs) {
    require_square(base, "polynomial");
    if (coeffs.empty()) throw EmptyInput("polynomial needs at least one coefficient");
    return std::make_shared<PolynomialOp>(std::move(base), std::move(coeffs));
}

OperatorPtr power(OperatorPtr base, unsigned k) {
    require_square(base, "power");
    return std::make_shared<PowerOp>(std::move(base), k);
}

}  // namespace fastop
