#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "support/errors.hpp"

namespace gcrp {

using Shape = std::vector<int64_t>;

inline std::string shape_str(const Shape& s);

inline int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) {
        if (d < 0) throw ValidationError("negative dimension in shape " + shape_str(s));
        n *= d;
    }
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ']';
    return os.str();
}

template <typename T>
struct TensorData {
    Shape shape;
    std::vector<T> values;
    std::vector<T> grad;      // allocated on first use, same length as values
    bool needs_grad = false;  // gradient flows into this tensor
    bool is_leaf = false;     // grads persist across backward calls
};

// Shared-buffer tensor handle. Copies alias the same storage; ops never
// mutate inputs, so aliasing is safe everywhere except optimizer updates,
// which run outside any tape.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape) : d_(std::make_shared<TensorData<T>>()) {
        d_->shape = std::move(shape);
        d_->values.assign(shape_numel(d_->shape), T(0));
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, T v) {
        Tensor t(std::move(shape));
        for (auto& x : t.d_->values) x = v;
        return t;
    }

    static Tensor from(Shape shape, std::vector<T> values) {
        if (static_cast<int64_t>(values.size()) != shape_numel(shape)) {
            throw ValidationError("tensor init: " + std::to_string(values.size()) +
                                  " values for shape " + shape_str(shape));
        }
        Tensor t;
        t.d_ = std::make_shared<TensorData<T>>();
        t.d_->shape = std::move(shape);
        t.d_->values = std::move(values);
        return t;
    }

    static Tensor scalar(T v) { return full({1}, v); }

    bool valid() const { return d_ != nullptr; }
    const Shape& shape() const { return d_->shape; }
    int rank() const { return static_cast<int>(d_->shape.size()); }
    int64_t dim(int i) const { return d_->shape[static_cast<size_t>(i)]; }
    int64_t numel() const { return static_cast<int64_t>(d_->values.size()); }

    T* data() { return d_->values.data(); }
    const T* data() const { return d_->values.data(); }
    std::vector<T>& values() { return d_->values; }
    const std::vector<T>& values() const { return d_->values; }

    T item() const {
        if (numel() != 1) throw ValidationError("item() on tensor of shape " + shape_str(shape()));
        return d_->values[0];
    }

    // Gradient accessors are const: the handle is shared, so const-ness of a
    // copy must not block accumulation into the underlying node.
    T* grad() const {
        ensure_grad();
        return d_->grad.data();
    }
    const std::vector<T>& grad_values() const { return d_->grad; }
    bool has_grad() const { return !d_->grad.empty(); }

    void ensure_grad() const {
        if (d_->grad.empty()) d_->grad.assign(d_->values.size(), T(0));
    }

    void zero_grad() const {
        if (!d_->grad.empty()) std::fill(d_->grad.begin(), d_->grad.end(), T(0));
    }

    void set_requires_grad(bool on = true) {
        d_->is_leaf = on;
        d_->needs_grad = on;
    }
    bool needs_grad() const { return d_ && d_->needs_grad; }
    bool is_leaf() const { return d_ && d_->is_leaf; }

    // Forward-only copy: same values, detached from any tape.
    Tensor detached() const { return from(d_->shape, d_->values); }

    std::shared_ptr<TensorData<T>> node() const { return d_; }

private:
    std::shared_ptr<TensorData<T>> d_;
};

// Reverse-mode tape. Construction activates it for the current thread; ops
// append records while it is active and backward() replays them in reverse.
// Destruction clears the tracked flag on every recorded output so tensors
// that outlive the tape behave as plain values again.
template <typename T>
class Tape {
public:
    Tape() : prev_(active_) { active_ = this; }

    ~Tape() {
        for (auto& r : records_) {
            for (auto& o : r.outs) {
                if (!o->is_leaf) o->needs_grad = false;
            }
        }
        active_ = prev_;
    }

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* active() { return active_; }

    void record(std::vector<std::shared_ptr<TensorData<T>>> outs, std::function<void()> fn) {
        records_.push_back({std::move(outs), std::move(fn)});
    }

    // Seeds d(loss)/d(loss) = 1 and runs recorded closures newest-first.
    // Grads of recorded outputs are reset each call; leaf grads accumulate.
    void backward(Tensor<T>& loss) {
        if (loss.numel() != 1) {
            throw ValidationError("backward expects a scalar loss, got " + shape_str(loss.shape()));
        }
        for (auto& r : records_) {
            for (auto& o : r.outs) {
                if (o->grad.empty()) {
                    o->grad.assign(o->values.size(), T(0));
                } else {
                    std::fill(o->grad.begin(), o->grad.end(), T(0));
                }
            }
        }
        loss.grad()[0] = T(1);
        for (auto it = records_.rbegin(); it != records_.rend(); ++it) it->fn();
    }

    size_t size() const { return records_.size(); }

private:
    struct Record {
        std::vector<std::shared_ptr<TensorData<T>>> outs;
        std::function<void()> fn;
    };
    std::vector<Record> records_;
    Tape* prev_;
    static thread_local Tape* active_;
};

template <typename T>
thread_local Tape<T>* Tape<T>::active_ = nullptr;

// True when the active tape should record an op consuming these inputs.
template <typename T>
inline Tape<T>* tape_for(std::initializer_list<const Tensor<T>*> ins) {
    Tape<T>* tp = Tape<T>::active();
    if (!tp) return nullptr;
    for (const Tensor<T>* t : ins) {
        if (t->needs_grad()) return tp;
    }
    return nullptr;
}

template <typename T>
inline void mark_output(Tensor<T>& out) {
    out.node()->needs_grad = true;
}

}  // namespace gcrp
