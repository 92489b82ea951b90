#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace steglab {

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline std::string shape_str(const std::vector<int64_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

// Thread-local switch controlling whether ops record the backward graph.
inline bool& grad_mode() {
    thread_local bool enabled = true;
    return enabled;
}

}  // namespace detail

/// Disables graph recording for the current thread while alive (eval-mode inference).
class NoGradGuard {
public:
    NoGradGuard() : prev_(detail::grad_mode()) { detail::grad_mode() = false; }
    ~NoGradGuard() { detail::grad_mode() = prev_; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

/// Dense n-dimensional tensor with reverse-mode automatic differentiation.
/// Data is a flat row-major buffer; the graph is a DAG of shared_ptr nodes,
/// each carrying the backward function of the op that produced it.
template <typename T>
class Tensor : public std::enable_shared_from_this<Tensor<T>> {
public:
    std::vector<int64_t> shape;
    std::vector<T> data;
    bool requires_grad = false;
    std::vector<T> grad;  // empty until backward touches this node

    std::vector<std::shared_ptr<Tensor<T>>> parents;
    std::function<void(Tensor<T>&)> backward_fn;

    Tensor() = default;
    Tensor(std::vector<int64_t> s, std::vector<T> d, bool rg = false)
        : shape(std::move(s)), data(std::move(d)), requires_grad(rg) {
        detail::require(numel_of(shape) == static_cast<int64_t>(data.size()),
                        "tensor data length does not match shape " + detail::shape_str(shape));
    }

    static int64_t numel_of(const std::vector<int64_t>& s) {
        int64_t n = 1;
        for (int64_t d : s) {
            detail::require(d > 0, "tensor dimensions must be positive, got " + detail::shape_str(s));
            n *= d;
        }
        return n;
    }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int64_t dim(size_t i) const { return shape.at(i); }
    size_t rank() const { return shape.size(); }

    bool is_scalar() const { return numel() == 1; }

    T& at4(int64_t n, int64_t c, int64_t y, int64_t x) {
        return data[((n * shape[1] + c) * shape[2] + y) * shape[3] + x];
    }
    const T& at4(int64_t n, int64_t c, int64_t y, int64_t x) const {
        return data[((n * shape[1] + c) * shape[2] + y) * shape[3] + x];
    }

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), T(0));
    }

    void zero_grad() {
        if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0));
    }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

template <typename T>
using TensorPtr = std::shared_ptr<Tensor<T>>;

template <typename T>
TensorPtr<T> make_tensor(std::vector<int64_t> shape, bool requires_grad = false) {
    auto n = Tensor<T>::numel_of(shape);
    return std::make_shared<Tensor<T>>(std::move(shape), std::vector<T>(n, T(0)), requires_grad);
}

template <typename T>
TensorPtr<T> make_tensor(std::vector<int64_t> shape, std::vector<T> values, bool requires_grad = false) {
    return std::make_shared<Tensor<T>>(std::move(shape), std::move(values), requires_grad);
}

template <typename T>
TensorPtr<T> make_scalar(T v, bool requires_grad = false) {
    return make_tensor<T>({1}, std::vector<T>{v}, requires_grad);
}

template <typename T>
TensorPtr<T> clone_detached(const TensorPtr<T>& x, bool requires_grad = false) {
    return make_tensor<T>(x->shape, x->data, requires_grad);
}

namespace detail {

template <typename T>
bool wants_graph(std::initializer_list<TensorPtr<T>> inputs) {
    if (!grad_mode()) return false;
    for (const auto& t : inputs)
        if (t && t->requires_grad) return true;
    return false;
}

template <typename T>
void attach(const TensorPtr<T>& out, std::initializer_list<TensorPtr<T>> inputs,
            std::function<void(Tensor<T>&)> fn) {
    out->requires_grad = true;
    out->parents.assign(inputs);
    out->backward_fn = std::move(fn);
}

template <typename T>
void accumulate(const TensorPtr<T>& dst, const std::vector<T>& contribution) {
    if (!dst->requires_grad) return;
    dst->ensure_grad();
    for (size_t i = 0; i < contribution.size(); ++i) dst->grad[i] += contribution[i];
}

}  // namespace detail

/// Runs reverse-mode accumulation from a scalar root through the recorded graph.
template <typename T>
void backward(const TensorPtr<T>& root) {
    detail::require(root->is_scalar(), "backward requires a scalar root, got shape " +
                                           detail::shape_str(root->shape));
    // Iterative post-order topological sort over the requires_grad subgraph.
    std::vector<Tensor<T>*> order;
    std::unordered_set<Tensor<T>*> seen;
    struct Frame {
        Tensor<T>* node;
        size_t next;
    };
    std::vector<Frame> stack;
    stack.push_back({root.get(), 0});
    seen.insert(root.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < f.node->parents.size()) {
            Tensor<T>* p = f.node->parents[f.next++].get();
            if (p->requires_grad && !seen.count(p)) {
                seen.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }
    root->ensure_grad();
    root->grad[0] = T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backward_fn) (*it)->backward_fn(**it);
    }
}

// ---------------------------------------------------------------------------
// Elementwise and structural ops
// ---------------------------------------------------------------------------

template <typename T>
TensorPtr<T> add(const TensorPtr<T>& a, const TensorPtr<T>& b) {
    detail::require(a->shape == b->shape, "add: shape mismatch " + detail::shape_str(a->shape) +
                                              " vs " + detail::shape_str(b->shape));
    auto out = make_tensor<T>(a->shape);
    for (int64_t i = 0; i < a->numel(); ++i) out->data[i] = a->data[i] + b->data[i];
    if (detail::wants_graph<T>({a, b})) {
        detail::attach<T>(out, {a, b}, [](Tensor<T>& self) {
            detail::accumulate(self.parents[0], self.grad);
            detail::accumulate(self.parents[1], self.grad);
        });
    }
    return out;
}

template <typename T>
TensorPtr<T> sub(const TensorPtr<T>& a, const TensorPtr<T>& b) {
    detail::require(a->shape == b->shape, "sub: shape mismatch " + detail::shape_str(a->shape) +
                                              " vs " + detail::shape_str(b->shape));
    auto out = make_tensor<T>(a->shape);
    for (int64_t i = 0; i < a->numel(); ++i) out->data[i] = a->data[i] - b->data[i];
    if (detail::wants_graph<T>({a, b})) {
        detail::attach<T>(out, {a, b}, [](Tensor<T>& self) {
            detail::accumulate(self.parents[0], self.grad);
            auto& b_ = self.parents[1];
            if (b_->requires_grad) {
                b_->ensure_grad();
                for (size_t i = 0; i < self.grad.size(); ++i) b_->grad[i] -= self.grad[i];
            }
        });
    }
    return out;
}

/// Elementwise absolute value. Subgradient at 0 is 0.
template <typename T>
TensorPtr<T> abs(const TensorPtr<T>& x) {
    auto out = make_tensor<T>(x->shape);
    for (int64_t i = 0; i < x->numel(); ++i) out->data[i] = std::fabs(x->data[i]);
    if (detail::wants_graph<T>({x})) {
        auto sign = std::make_shared<std::vector<T>>(x->numel());
        for (int64_t i = 0; i < x->numel(); ++i) {
            T v = x->data[i];
            (*sign)[i] = v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0));
        }
        detail::attach<T>(out, {x}, [sign](Tensor<T>& self) {
            auto& p = self.parents[0];
            if (!p->requires_grad) return;
            p->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i] * (*sign)[i];
        });
    }
    return out;
}

template <typename T>
TensorPtr<T> scale(const TensorPtr<T>& x, T factor) {
    auto out = make_tensor<T>(x->shape);
    for (int64_t i = 0; i < x->numel(); ++i) out->data[i] = x->data[i] * factor;
    if (detail::wants_graph<T>({x})) {
        detail::attach<T>(out, {x}, [factor](Tensor<T>& self) {
            auto& p = self.parents[0];
            if (!p->requires_grad) return;
            p->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i] * factor;
        });
    }
    return out;
}

/// Exponential linear unit: x for x > 0, alpha*(exp(x)-1) otherwise.
template <typename T>
TensorPtr<T> elu(const TensorPtr<T>& x, T alpha = T(1)) {
    detail::require(alpha > T(0), "elu: alpha must be positive");
    auto out = make_tensor<T>(x->shape);
    for (int64_t i = 0; i < x->numel(); ++i) {
        T v = x->data[i];
        out->data[i] = v > T(0) ? v : alpha * (std::exp(v) - T(1));
    }
    if (detail::wants_graph<T>({x})) {
        auto saved = std::make_shared<std::vector<T>>(out->data);
        auto xs = std::make_shared<std::vector<T>>(x->data);
        detail::attach<T>(out, {x}, [saved, xs, alpha](Tensor<T>& self) {
            auto& p = self.parents[0];
            if (!p->requires_grad) return;
            p->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) {
                T d = (*xs)[i] > T(0) ? T(1) : (*saved)[i] + alpha;  // alpha*exp(x) == y + alpha
                p->grad[i] += self.grad[i] * d;
            }
        });
    }
    return out;
}

template <typename T>
TensorPtr<T> sigmoid(const TensorPtr<T>& x) {
    auto out = make_tensor<T>(x->shape);
    for (int64_t i = 0; i < x->numel(); ++i) out->data[i] = T(1) / (T(1) + std::exp(-x->data[i]));
    if (detail::wants_graph<T>({x})) {
        auto saved = std::make_shared<std::vector<T>>(out->data);
        detail::attach<T>(out, {x}, [saved](Tensor<T>& self) {
            auto& p = self.parents[0];
            if (!p->requires_grad) return;
            p->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) {
                T y = (*saved)[i];
                p->grad[i] += self.grad[i] * y * (T(1) - y);
            }
        });
    }
    return out;
}

/// Elementwise clamp to [lo, hi]. The subgradient on the boundary takes the
/// inside branch, so gradient passes wherever lo <= x <= hi.
template <typename T>
TensorPtr<T> clip(const TensorPtr<T>& x, T lo, T hi) {
    detail::require(lo < hi, "clip: lo must be < hi");
    auto out = make_tensor<T>(x->shape);
    for (int64_t i = 0; i < x->numel(); ++i) out->data[i] = std::clamp(x->data[i], lo, hi);
    if (detail::wants_graph<T>({x})) {
        auto xs = std::make_shared<std::vector<T>>(x->data);
        detail::attach<T>(out, {x}, [xs, lo, hi](Tensor<T>& self) {
            auto& p = self.parents[0];
            if (!p->requires_grad) return;
            p->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) {
                if ((*xs)[i] >= lo && (*xs)[i] <= hi) p->grad[i] += self.grad[i];
            }
        });
    }
    return out;
}

/// Concatenates two [n,c,h,w] tensors along the channel dimension.
template <typename T>
TensorPtr<T> concat_channels(const TensorPtr<T>& a, const TensorPtr<T>& b) {
    detail::require(a->rank() == 4 && b->rank() == 4, "concat_channels: tensors must be rank 4");
    detail::require(a->shape[0] == b->shape[0] && a->shape[2] == b->shape[2] &&
                        a->shape[3] == b->shape[3],
                    "concat_channels: n/h/w mismatch " + detail::shape_str(a->shape) + " vs " +
                        detail::shape_str(b->shape));
    int64_t n = a->shape[0], ca = a->shape[1], cb = b->shape[1];
    int64_t hw = a->shape[2] * a->shape[3];
    auto out = make_tensor<T>({n, ca + cb, a->shape[2], a->shape[3]});
    for (int64_t i = 0; i < n; ++i) {
        std::copy_n(a->data.data() + i * ca * hw, ca * hw, out->data.data() + i * (ca + cb) * hw);
        std::copy_n(b->data.data() + i * cb * hw, cb * hw,
                    out->data.data() + i * (ca + cb) * hw + ca * hw);
    }
    if (detail::wants_graph<T>({a, b})) {
        detail::attach<T>(out, {a, b}, [n, ca, cb, hw](Tensor<T>& self) {
            auto& pa = self.parents[0];
            auto& pb = self.parents[1];
            if (pa->requires_grad) {
                pa->ensure_grad();
                for (int64_t i = 0; i < n; ++i)
                    for (int64_t j = 0; j < ca * hw; ++j)
                        pa->grad[i * ca * hw + j] += self.grad[i * (ca + cb) * hw + j];
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                for (int64_t i = 0; i < n; ++i)
                    for (int64_t j = 0; j < cb * hw; ++j)
                        pb->grad[i * cb * hw + j] += self.grad[i * (ca + cb) * hw + ca * hw + j];
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

/// Mean over all elements, as a scalar tensor.
template <typename T>
TensorPtr<T> mean_all(const TensorPtr<T>& x) {
    detail::require(x->numel() > 0, "mean_all: empty tensor");
    T sum = std::accumulate(x->data.begin(), x->data.end(), T(0));
    auto out = make_scalar<T>(sum / static_cast<T>(x->numel()));
    if (detail::wants_graph<T>({x})) {
        detail::attach<T>(out, {x}, [](Tensor<T>& self) {
            auto& p = self.parents[0];
            if (!p->requires_grad) return;
            p->ensure_grad();
            T g = self.grad[0] / static_cast<T>(p->numel());
            for (auto& v : p->grad) v += g;
        });
    }
    return out;
}

/// Population variance over all elements, as a scalar tensor.
template <typename T>
TensorPtr<T> variance_all(const TensorPtr<T>& x) {
    detail::require(x->numel() > 0, "variance_all: empty tensor");
    int64_t n = x->numel();
    T mean = std::accumulate(x->data.begin(), x->data.end(), T(0)) / static_cast<T>(n);
    T var = T(0);
    for (T v : x->data) var += (v - mean) * (v - mean);
    var /= static_cast<T>(n);
    auto out = make_scalar<T>(var);
    if (detail::wants_graph<T>({x})) {
        detail::attach<T>(out, {x}, [mean](Tensor<T>& self) {
            auto& p = self.parents[0];
            if (!p->requires_grad) return;
            p->ensure_grad();
            T g = self.grad[0] * T(2) / static_cast<T>(p->numel());
            for (int64_t i = 0; i < p->numel(); ++i) p->grad[i] += g * (p->data[i] - mean);
        });
    }
    return out;
}

/// Population variance of each image over its (c,h,w) elements: [n,c,h,w] -> [n].
template <typename T>
TensorPtr<T> variance_per_image(const TensorPtr<T>& x) {
    detail::require(x->rank() == 4, "variance_per_image: tensor must be rank 4");
    int64_t n = x->shape[0];
    int64_t m = x->numel() / n;
    auto out = make_tensor<T>({n});
    auto means = std::make_shared<std::vector<T>>(n);
    for (int64_t i = 0; i < n; ++i) {
        const T* p = x->data.data() + i * m;
        T mean = std::accumulate(p, p + m, T(0)) / static_cast<T>(m);
        T var = T(0);
        for (int64_t j = 0; j < m; ++j) var += (p[j] - mean) * (p[j] - mean);
        out->data[i] = var / static_cast<T>(m);
        (*means)[i] = mean;
    }
    if (detail::wants_graph<T>({x})) {
        detail::attach<T>(out, {x}, [n, m, means](Tensor<T>& self) {
            auto& p = self.parents[0];
            if (!p->requires_grad) return;
            p->ensure_grad();
            for (int64_t i = 0; i < n; ++i) {
                T g = self.grad[i] * T(2) / static_cast<T>(m);
                const T* xd = p->data.data() + i * m;
                T* gd = p->grad.data() + i * m;
                T mean = (*means)[i];
                for (int64_t j = 0; j < m; ++j) gd[j] += g * (xd[j] - mean);
            }
        });
    }
    return out;
}

/// Mean of |a - b| over all elements, as a scalar tensor.
template <typename T>
TensorPtr<T> mean_abs_diff(const TensorPtr<T>& a, const TensorPtr<T>& b) {
    detail::require(a->shape == b->shape, "mean_abs_diff: shape mismatch " +
                                              detail::shape_str(a->shape) + " vs " +
                                              detail::shape_str(b->shape));
    detail::require(a->numel() > 0, "mean_abs_diff: empty tensor");
    return mean_all(abs(sub(a, b)));
}

/// Weighted sum of all elements against a fixed coefficient vector; used to
/// scalarize op outputs so gradient probes see the full Jacobian structure.
template <typename T>
TensorPtr<T> weighted_sum(const TensorPtr<T>& x, std::vector<T> weights) {
    detail::require(static_cast<int64_t>(weights.size()) == x->numel(),
                    "weighted_sum: weight count must match element count");
    T acc = T(0);
    for (int64_t i = 0; i < x->numel(); ++i) acc += x->data[i] * weights[i];
    auto out = make_scalar<T>(acc);
    if (detail::wants_graph<T>({x})) {
        auto w = std::make_shared<std::vector<T>>(std::move(weights));
        detail::attach<T>(out, {x}, [w](Tensor<T>& self) {
            auto& p = self.parents[0];
            if (!p->requires_grad) return;
            p->ensure_grad();
            for (size_t i = 0; i < w->size(); ++i) p->grad[i] += self.grad[0] * (*w)[i];
        });
    }
    return out;
}

}  // namespace steglab
