#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sembed/errors.hpp"

namespace sembed {

class Tape;

std::string shape_str(const std::vector<std::size_t>& shape);

// Dense 64-bit real tensor, row-major. Values are immutable once built except
// through mutable_values(), which the optimizer uses between tapes. A tensor
// optionally carries a link into a Tape plus a grad buffer filled by
// Tape::backward. Copies share storage.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double v);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t size() const { return data_ ? data_->size() : 0; }
  bool defined() const { return data_ != nullptr; }

  const std::vector<double>& values() const { return *data_; }
  // For construction and optimizer steps; refused while an unconsumed tape
  // tracks this tensor.
  std::vector<double>& mutable_values();
  double scalar_value() const;

  bool tracked() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int node() const { return node_; }

  bool has_grad() const { return grad_ != nullptr; }
  const std::vector<double>& grad() const;
  // Drops the tape link and grad buffer; values are untouched.
  void detach();

  bool all_finite() const;

 private:
  friend class Tape;
  std::vector<std::size_t> shape_;
  std::shared_ptr<std::vector<double>> data_;
  std::shared_ptr<std::vector<double>> grad_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

// Reverse-mode differentiation tape. Nodes are appended in forward order and
// visited exactly once in strict reverse order by backward(). A tape is
// single-use: backward() consumes it and any further use is a ContractError.
class Tape {
 public:
  // Positional grad buffers for an op's inputs; nullptr = untracked input.
  using GradSlots = std::vector<std::vector<double>*>;
  using BackwardFn =
      std::function<void(const std::vector<double>& out_grad,
                         const GradSlots& in_grads)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers a leaf. Allocates a zero grad buffer shared with the tensor, so
  // leaves unreachable from the loss end up with an all-zero grad.
  Tensor& watch(Tensor& leaf);

  // Appends an op node producing `value`. Tracked inputs must live on this
  // tape. Returns the tracked result.
  Tensor record(Tensor value, const std::vector<const Tensor*>& inputs,
                BackwardFn backward);

  // Seeds d(loss)/d(loss)=1 and sweeps the node list in reverse, accumulating
  // into every tracked leaf reachable from `loss`. Consumes the tape.
  void backward(const Tensor& loss);

  bool consumed() const { return consumed_; }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct NodeRec {
    std::vector<int> inputs;  // node ids; -1 marks an untracked input
    BackwardFn backward;      // empty for leaves
    std::shared_ptr<std::vector<double>> grad;
  };
  std::vector<NodeRec> nodes_;
  bool consumed_ = false;
};

// --- differentiable operations ------------------------------------------
// Each op computes eagerly and registers a tape node when any input is
// tracked. Untracked inputs act as constants.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
// x[... x h] + bias[h], broadcast over rows.
Tensor add_rowwise(const Tensor& x, const Tensor& bias);
// x + c elementwise, c untracked.
Tensor add_constant(const Tensor& x, const std::vector<double>& c);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& x, std::vector<std::size_t> shape);

Tensor softmax(const Tensor& x, std::size_t axis);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps);
Tensor gelu(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

Tensor l2_normalize_rows(const Tensor& x);
Tensor concat_rows(const Tensor& a, const Tensor& b);
// Per-row cosine between u[B x h] and v[B x h] -> [B].
Tensor rowwise_cosine(const Tensor& u, const Tensor& v);
// Mean cross-entropy of logits[N x C] against integer targets -> scalar.
Tensor softmax_cross_entropy(const Tensor& logits,
                             const std::vector<std::size_t>& targets);

// Gathers rows of table[V x h] -> [ids.size() x h]; backward scatters.
Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids);

// Multi-head scaled dot-product attention over q/k/v given as [B*T x h].
// mask is B*T ints (1 = real token); masked-off key positions get -1e9 added
// to their logits before the softmax. Returns [B*T x h].
Tensor masked_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                        const std::vector<int>& mask, std::size_t batch,
                        std::size_t seq_len, std::size_t num_heads);

}  // namespace sembed
