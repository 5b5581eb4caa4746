#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace semrl::nn {

using Shape = std::vector<int>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <typename T>
struct TensorImpl {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // allocated on demand by backward()
  bool requires_grad = false;
  std::string name;
  // Tape record: inputs that need gradients and the closure pushing this
  // node's grad into theirs.
  std::vector<std::shared_ptr<TensorImpl>> parents;
  // Constant inputs whose values the closure reads.
  std::vector<std::shared_ptr<TensorImpl>> saved;
  std::function<void()> backward;
};

// Reference-semantics handle; copies share storage.
template <typename T>
class Tensor {
 public:
  using Impl = TensorImpl<T>;

  Tensor() = default;
  explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, T value);
  static Tensor from(Shape shape, std::vector<T> data);
  // Trainable leaf.
  static Tensor param(Shape shape, std::vector<T> data, std::string name);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int dim(int i) const { return impl_->shape.at(static_cast<std::size_t>(i)); }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  std::size_t size() const { return impl_->data.size(); }

  std::vector<T>& data() { return impl_->data; }
  const std::vector<T>& data() const { return impl_->data; }
  std::vector<T>& grad() { return impl_->grad; }
  const std::vector<T>& grad() const { return impl_->grad; }
  T item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  const std::string& name() const { return impl_->name; }
  void set_name(std::string n) { impl_->name = std::move(n); }

  // Same values, no tape history.
  Tensor detach() const;
  Tensor clone() const;

  Impl* impl() const { return impl_.get(); }
  const std::shared_ptr<Impl>& shared() const { return impl_; }

 private:
  std::shared_ptr<Impl> impl_;
};

// Reverse-mode sweep from a scalar: zeroes the grads of every node reachable
// from `loss`, seeds d loss = 1 and accumulates in reverse topological order.
template <typename T>
void backward(const Tensor<T>& loss);

bool grad_enabled();

// Disables tape recording in its scope.
class NoGrad {
 public:
  NoGrad();
  ~NoGrad();
  NoGrad(const NoGrad&) = delete;
  NoGrad& operator=(const NoGrad&) = delete;

 private:
  bool previous_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace semrl::nn
