#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace regnn {

struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense 2-D row-major tensor. Row vectors are 1xD.
template <class T>
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<T> v;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, T(0)) {}
    Tensor(int r, int c, std::vector<T> data) : rows(r), cols(c), v(std::move(data)) {
        if (v.size() != static_cast<std::size_t>(r) * c)
            throw DimensionError("tensor data length does not match shape " + shape_str());
    }

    static Tensor row(std::vector<T> data) {
        int n = static_cast<int>(data.size());
        return Tensor(1, n, std::move(data));
    }

    T& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    T at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t size() const { return v.size(); }

    std::string shape_str() const {
        std::ostringstream os;
        os << rows << "x" << cols;
        return os.str();
    }

    template <class U>
    Tensor<U> cast() const {
        Tensor<U> out(rows, cols);
        for (std::size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<U>(v[i]);
        return out;
    }
};

struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Records forward operations so backward() can replay their adjoints in
// reverse. Gradients accumulate additively across uses of a variable.
// A tape and its variables belong to a single worker.
template <class T>
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(Tensor<T> t, bool requires_grad = false) {
        return push(std::move(t), requires_grad, nullptr);
    }

    Var constant(Tensor<T> t) { return leaf(std::move(t), false); }

    const Tensor<T>& val(Var a) const { return nodes_[a.id].val; }
    const Tensor<T>& grad(Var a) const { return nodes_[a.id].grad; }
    bool requires_grad(Var a) const { return nodes_[a.id].rg; }
    std::size_t size() const { return nodes_.size(); }

    Var matmul(Var a, Var b) {
        const Tensor<T>&A = val(a), &B = val(b);
        if (A.cols != B.rows)
            throw DimensionError("matmul shape mismatch: " + A.shape_str() + " * " + B.shape_str());
        Tensor<T> out(A.rows, B.cols);
        mm_acc(out, A, B, false, false);
        return push(std::move(out), rg(a) || rg(b), [a, b](Tape& t, int o) {
            const Tensor<T>& g = t.nodes_[o].grad;
            if (t.rg(a)) mm_acc(t.nodes_[a.id].grad, g, t.val(b), false, true);   // g * B^T
            if (t.rg(b)) mm_acc(t.nodes_[b.id].grad, t.val(a), g, true, false);  // A^T * g
        });
    }

    Var add(Var a, Var b) {
        const Tensor<T>&A = val(a), &B = val(b);
        if (A.rows != B.rows || A.cols != B.cols)
            throw DimensionError("add shape mismatch: " + A.shape_str() + " + " + B.shape_str());
        Tensor<T> out = A;
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += B.v[i];
        return push(std::move(out), rg(a) || rg(b), [a, b](Tape& t, int o) {
            const Tensor<T>& g = t.nodes_[o].grad;
            if (t.rg(a)) axpy(t.nodes_[a.id].grad, g);
            if (t.rg(b)) axpy(t.nodes_[b.id].grad, g);
        });
    }

    Var mul(Var a, Var b) {
        const Tensor<T>&A = val(a), &B = val(b);
        if (A.rows != B.rows || A.cols != B.cols)
            throw DimensionError("mul shape mismatch: " + A.shape_str() + " . " + B.shape_str());
        Tensor<T> out = A;
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] *= B.v[i];
        return push(std::move(out), rg(a) || rg(b), [a, b](Tape& t, int o) {
            const Tensor<T>& g = t.nodes_[o].grad;
            if (t.rg(a)) {
                Tensor<T>& ga = t.nodes_[a.id].grad;
                const Tensor<T>& B2 = t.val(b);
                for (std::size_t i = 0; i < g.v.size(); ++i) ga.v[i] += g.v[i] * B2.v[i];
            }
            if (t.rg(b)) {
                Tensor<T>& gb = t.nodes_[b.id].grad;
                const Tensor<T>& A2 = t.val(a);
                for (std::size_t i = 0; i < g.v.size(); ++i) gb.v[i] += g.v[i] * A2.v[i];
            }
        });
    }

    // Multiply every entry of a by the 1x1 variable s.
    Var scale(Var a, Var s) {
        const Tensor<T>& S = val(s);
        if (S.rows != 1 || S.cols != 1)
            throw DimensionError("scale factor must be 1x1, got " + S.shape_str());
        Tensor<T> out = val(a);
        T k = S.v[0];
        for (auto& x : out.v) x *= k;
        return push(std::move(out), rg(a) || rg(s), [a, s](Tape& t, int o) {
            const Tensor<T>& g = t.nodes_[o].grad;
            if (t.rg(a)) {
                Tensor<T>& ga = t.nodes_[a.id].grad;
                T k = t.val(s).v[0];
                for (std::size_t i = 0; i < g.v.size(); ++i) ga.v[i] += g.v[i] * k;
            }
            if (t.rg(s)) {
                const Tensor<T>& A = t.val(a);
                T acc = 0;
                for (std::size_t i = 0; i < g.v.size(); ++i) acc += g.v[i] * A.v[i];
                t.nodes_[s.id].grad.v[0] += acc;
            }
        });
    }

    Var scale_const(Var a, T k) {
        Tensor<T> out = val(a);
        for (auto& x : out.v) x *= k;
        return push(std::move(out), rg(a), [a, k](Tape& t, int o) {
            const Tensor<T>& g = t.nodes_[o].grad;
            Tensor<T>& ga = t.nodes_[a.id].grad;
            for (std::size_t i = 0; i < g.v.size(); ++i) ga.v[i] += g.v[i] * k;
        });
    }

    Var sigmoid(Var a) {
        Tensor<T> out = val(a);
        for (auto& x : out.v) x = x >= 0 ? T(1) / (T(1) + std::exp(-x))
                                         : std::exp(x) / (T(1) + std::exp(x));
        return unary_from_output(a, std::move(out), [](T y) { return y * (T(1) - y); });
    }

    Var tanh_(Var a) {
        Tensor<T> out = val(a);
        for (auto& x : out.v) x = std::tanh(x);
        return unary_from_output(a, std::move(out), [](T y) { return T(1) - y * y; });
    }

    // Softmax along a 1xN row, max-subtracted.
    Var softmax_row(Var a) {
        const Tensor<T>& A = val(a);
        if (A.rows != 1 || A.cols < 1)
            throw DimensionError("softmax_row needs a non-empty row vector, got " + A.shape_str());
        Tensor<T> out = A;
        softmax_inplace(out.v.data(), out.cols, 1);
        return push(std::move(out), rg(a), [a](Tape& t, int o) {
            const Tensor<T>& y = t.nodes_[o].val;
            const Tensor<T>& g = t.nodes_[o].grad;
            Tensor<T>& ga = t.nodes_[a.id].grad;
            T dot = 0;
            for (int j = 0; j < y.cols; ++j) dot += g.v[j] * y.v[j];
            for (int j = 0; j < y.cols; ++j) ga.v[j] += y.v[j] * (g.v[j] - dot);
        });
    }

    // Softmax across rows, independently per column.
    Var softmax_cols(Var a) {
        const Tensor<T>& A = val(a);
        if (A.rows < 1) throw DimensionError("softmax_cols on empty tensor");
        Tensor<T> out = A;
        for (int c = 0; c < out.cols; ++c) softmax_inplace(out.v.data() + c, out.rows, out.cols);
        return push(std::move(out), rg(a), [a](Tape& t, int o) {
            const Tensor<T>& y = t.nodes_[o].val;
            const Tensor<T>& g = t.nodes_[o].grad;
            Tensor<T>& ga = t.nodes_[a.id].grad;
            for (int c = 0; c < y.cols; ++c) {
                T dot = 0;
                for (int r = 0; r < y.rows; ++r) dot += g.at(r, c) * y.at(r, c);
                for (int r = 0; r < y.rows; ++r) ga.at(r, c) += y.at(r, c) * (g.at(r, c) - dot);
            }
        });
    }

    // Lay row vectors out side by side: [1xd1, 1xd2, ...] -> 1x(d1+d2+...).
    Var concat_cols(const std::vector<Var>& parts) {
        if (parts.empty()) throw DimensionError("concat of zero parts");
        int total = 0;
        bool any_rg = false;
        for (Var p : parts) {
            const Tensor<T>& P = val(p);
            if (P.rows != 1) throw DimensionError("concat expects row vectors, got " + P.shape_str());
            total += P.cols;
            any_rg = any_rg || rg(p);
        }
        Tensor<T> out(1, total);
        int off = 0;
        for (Var p : parts) {
            const Tensor<T>& P = val(p);
            for (int j = 0; j < P.cols; ++j) out.v[off + j] = P.v[j];
            off += P.cols;
        }
        return push(std::move(out), any_rg, [parts](Tape& t, int o) {
            const Tensor<T>& g = t.nodes_[o].grad;
            int off = 0;
            for (Var p : parts) {
                int w = t.val(p).cols;
                if (t.rg(p)) {
                    Tensor<T>& gp = t.nodes_[p.id].grad;
                    for (int j = 0; j < w; ++j) gp.v[j] += g.v[off + j];
                }
                off += w;
            }
        });
    }

    // Stack row vectors into a KxD matrix.
    Var vstack(const std::vector<Var>& parts) {
        if (parts.empty()) throw DimensionError("vstack of zero parts");
        int d = val(parts[0]).cols;
        bool any_rg = false;
        for (Var p : parts) {
            const Tensor<T>& P = val(p);
            if (P.rows != 1 || P.cols != d)
                throw DimensionError("vstack expects row vectors of equal width, got " + P.shape_str());
            any_rg = any_rg || rg(p);
        }
        Tensor<T> out(static_cast<int>(parts.size()), d);
        for (std::size_t r = 0; r < parts.size(); ++r)
            for (int j = 0; j < d; ++j) out.at(static_cast<int>(r), j) = val(parts[r]).v[j];
        return push(std::move(out), any_rg, [parts](Tape& t, int o) {
            const Tensor<T>& g = t.nodes_[o].grad;
            for (std::size_t r = 0; r < parts.size(); ++r)
                if (t.rg(parts[r])) {
                    Tensor<T>& gp = t.nodes_[parts[r].id].grad;
                    for (int j = 0; j < g.cols; ++j) gp.v[j] += g.at(static_cast<int>(r), j);
                }
        });
    }

    // Select row r as a 1xD vector (embedding lookup, gate un-stacking).
    Var row(Var a, int r) {
        const Tensor<T>& A = val(a);
        if (r < 0 || r >= A.rows)
            throw ContractError("row index " + std::to_string(r) + " out of range for " + A.shape_str());
        Tensor<T> out(1, A.cols);
        for (int j = 0; j < A.cols; ++j) out.v[j] = A.at(r, j);
        return push(std::move(out), rg(a), [a, r](Tape& t, int o) {
            const Tensor<T>& g = t.nodes_[o].grad;
            Tensor<T>& ga = t.nodes_[a.id].grad;
            for (int j = 0; j < g.cols; ++j) ga.at(r, j) += g.v[j];
        });
    }

    Var slice_cols(Var a, int start, int len) {
        const Tensor<T>& A = val(a);
        if (A.rows != 1 || start < 0 || start + len > A.cols)
            throw DimensionError("slice_cols [" + std::to_string(start) + "," +
                                 std::to_string(start + len) + ") out of " + A.shape_str());
        Tensor<T> out(1, len);
        for (int j = 0; j < len; ++j) out.v[j] = A.v[start + j];
        return push(std::move(out), rg(a), [a, start, len](Tape& t, int o) {
            const Tensor<T>& g = t.nodes_[o].grad;
            Tensor<T>& ga = t.nodes_[a.id].grad;
            for (int j = 0; j < len; ++j) ga.v[start + j] += g.v[j];
        });
    }

    // Dot product of two row vectors -> 1x1.
    Var dot(Var a, Var b) {
        const Tensor<T>&A = val(a), &B = val(b);
        if (A.rows != 1 || B.rows != 1 || A.cols != B.cols)
            throw DimensionError("dot shape mismatch: " + A.shape_str() + " . " + B.shape_str());
        T acc = 0;
        for (int j = 0; j < A.cols; ++j) acc += A.v[j] * B.v[j];
        return push(Tensor<T>(1, 1, {acc}), rg(a) || rg(b), [a, b](Tape& t, int o) {
            T g = t.nodes_[o].grad.v[0];
            if (t.rg(a)) {
                Tensor<T>& ga = t.nodes_[a.id].grad;
                const Tensor<T>& B2 = t.val(b);
                for (std::size_t i = 0; i < ga.v.size(); ++i) ga.v[i] += g * B2.v[i];
            }
            if (t.rg(b)) {
                Tensor<T>& gb = t.nodes_[b.id].grad;
                const Tensor<T>& A2 = t.val(a);
                for (std::size_t i = 0; i < gb.v.size(); ++i) gb.v[i] += g * A2.v[i];
            }
        });
    }

    Var sum(Var a) {
        const Tensor<T>& A = val(a);
        T acc = 0;
        for (T x : A.v) acc += x;
        return push(Tensor<T>(1, 1, {acc}), rg(a), [a](Tape& t, int o) {
            T g = t.nodes_[o].grad.v[0];
            Tensor<T>& ga = t.nodes_[a.id].grad;
            for (auto& x : ga.v) x += g;
        });
    }

    // -log softmax(logits)[gold], stable via log-sum-exp.
    Var cross_entropy(Var logits, int gold) {
        const Tensor<T>& A = val(logits);
        if (A.rows != 1 || A.cols < 1)
            throw DimensionError("cross_entropy needs a logit row, got " + A.shape_str());
        if (gold < 0 || gold >= A.cols)
            throw ContractError("gold class " + std::to_string(gold) + " outside [0," +
                                std::to_string(A.cols) + ")");
        T mx = A.v[0];
        for (T x : A.v) mx = std::max(mx, x);
        T lse = 0;
        for (T x : A.v) lse += std::exp(x - mx);
        lse = std::log(lse) + mx;
        return push(Tensor<T>(1, 1, {lse - A.v[gold]}), rg(logits), [logits, gold](Tape& t, int o) {
            T g = t.nodes_[o].grad.v[0];
            const Tensor<T>& A2 = t.val(logits);
            Tensor<T>& ga = t.nodes_[logits.id].grad;
            T mx = A2.v[0];
            for (T x : A2.v) mx = std::max(mx, x);
            T z = 0;
            for (T x : A2.v) z += std::exp(x - mx);
            for (int j = 0; j < A2.cols; ++j) {
                T p = std::exp(A2.v[j] - mx) / z;
                ga.v[j] += g * (p - (j == gold ? T(1) : T(0)));
            }
        });
    }

    void backward(Var loss) {
        const Tensor<T>& L = val(loss);
        if (L.rows != 1 || L.cols != 1)
            throw ContractError("backward needs a scalar loss, got " + L.shape_str());
        for (auto& n : nodes_)
            if (n.rg) n.grad = Tensor<T>(n.val.rows, n.val.cols);
        nodes_[loss.id].grad.v[0] = T(1);
        for (int i = loss.id; i >= 0; --i)
            if (nodes_[i].rg && nodes_[i].back) nodes_[i].back(*this, i);
    }

private:
    struct Node {
        Tensor<T> val;
        Tensor<T> grad;
        bool rg = false;
        std::function<void(Tape&, int)> back;
    };
    std::vector<Node> nodes_;

    bool rg(Var a) const { return nodes_[a.id].rg; }

    Var push(Tensor<T> val, bool requires_grad, std::function<void(Tape&, int)> back) {
        Node n;
        n.val = std::move(val);
        n.rg = requires_grad;
        if (requires_grad) n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    template <class DyDx>
    Var unary_from_output(Var a, Tensor<T> out, DyDx dydx) {
        return push(std::move(out), rg(a), [a, dydx](Tape& t, int o) {
            const Tensor<T>& y = t.nodes_[o].val;
            const Tensor<T>& g = t.nodes_[o].grad;
            Tensor<T>& ga = t.nodes_[a.id].grad;
            for (std::size_t i = 0; i < y.v.size(); ++i) ga.v[i] += g.v[i] * dydx(y.v[i]);
        });
    }

    static void axpy(Tensor<T>& dst, const Tensor<T>& src) {
        for (std::size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += src.v[i];
    }

    static void softmax_inplace(T* p, int n, int stride) {
        T mx = p[0];
        for (int i = 1; i < n; ++i) mx = std::max(mx, p[i * static_cast<std::size_t>(stride)]);
        T z = 0;
        for (int i = 0; i < n; ++i) {
            T e = std::exp(p[i * static_cast<std::size_t>(stride)] - mx);
            p[i * static_cast<std::size_t>(stride)] = e;
            z += e;
        }
        for (int i = 0; i < n; ++i) p[i * static_cast<std::size_t>(stride)] /= z;
    }

    // out += op(A) * op(B) with optional transposes.
    static void mm_acc(Tensor<T>& out, const Tensor<T>& A, const Tensor<T>& B, bool ta, bool tb) {
        int m = ta ? A.cols : A.rows;
        int k = ta ? A.rows : A.cols;
        int n = tb ? B.rows : B.cols;
        for (int i = 0; i < m; ++i)
            for (int p = 0; p < k; ++p) {
                T av = ta ? A.at(p, i) : A.at(i, p);
                if (av == T(0)) continue;
                T* orow = out.v.data() + static_cast<std::size_t>(i) * n;
                if (!tb) {
                    const T* brow = B.v.data() + static_cast<std::size_t>(p) * n;
                    for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
                } else {
                    for (int j = 0; j < n; ++j) orow[j] += av * B.at(j, p);
                }
            }
    }
};

}  // namespace regnn
