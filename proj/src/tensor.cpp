#include "sembed/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "sembed/kernels.hpp"

namespace sembed {

std::string shape_str(const std::vector<std::size_t>& shape) {
  if (shape.empty()) return "scalar";
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(shape[i]);
  }
  return s;
}

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void check_positive_dims(const std::vector<std::size_t>& shape) {
  for (std::size_t d : shape) {
    if (d == 0) {
      throw ShapeError("zero dimension in shape " + shape_str(shape));
    }
  }
}

Tape* common_tape(std::initializer_list<const Tensor*> tensors) {
  Tape* tape = nullptr;
  for (const Tensor* t : tensors) {
    if (!t->tracked()) continue;
    if (tape == nullptr) {
      tape = t->tape();
    } else if (tape != t->tape()) {
      throw ContractError("operands are tracked on different tapes");
    }
  }
  return tape;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got " +
                     shape_str(t.shape()));
  }
}

}  // namespace

// --- Tensor ----------------------------------------------------------------

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  check_positive_dims(shape_);
  data_ = std::make_shared<std::vector<double>>(shape_product(shape_), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)) {
  check_positive_dims(shape_);
  if (shape_product(shape_) != values.size()) {
    throw ShapeError("shape " + shape_str(shape_) + " wants " +
                     std::to_string(shape_product(shape_)) +
                     " values, got " + std::to_string(values.size()));
  }
  data_ = std::make_shared<std::vector<double>>(std::move(values));
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  return Tensor(std::move(shape));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
  Tensor t(std::move(shape));
  std::fill(t.data_->begin(), t.data_->end(), v);
  return t;
}

std::vector<double>& Tensor::mutable_values() {
  if (!data_) throw ContractError("mutable_values on undefined tensor");
  if (tape_ != nullptr && !tape_->consumed()) {
    throw ContractError(
        "mutable_values on a tensor tracked by an active tape");
  }
  return *data_;
}

double Tensor::scalar_value() const {
  if (size() != 1) {
    throw ContractError("scalar_value on tensor of shape " +
                        shape_str(shape_));
  }
  return (*data_)[0];
}

const std::vector<double>& Tensor::grad() const {
  if (!grad_) {
    throw ContractError("gradient unavailable; tensor was never watched");
  }
  return *grad_;
}

void Tensor::detach() {
  tape_ = nullptr;
  node_ = -1;
  grad_.reset();
}

bool Tensor::all_finite() const {
  if (!data_) return true;
  for (double v : *data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// --- Tape --------------------------------------------------------------------

Tensor& Tape::watch(Tensor& leaf) {
  if (consumed_) throw ContractError("tape already consumed by backward");
  if (!leaf.defined()) throw ContractError("watch on undefined tensor");
  if (leaf.tracked()) {
    if (leaf.tape() == this) return leaf;
    throw ContractError("tensor is tracked on another tape; detach first");
  }
  NodeRec rec;
  rec.grad = std::make_shared<std::vector<double>>(leaf.size(), 0.0);
  leaf.tape_ = this;
  leaf.node_ = static_cast<int>(nodes_.size());
  leaf.grad_ = rec.grad;
  nodes_.push_back(std::move(rec));
  return leaf;
}

Tensor Tape::record(Tensor value, const std::vector<const Tensor*>& inputs,
                    BackwardFn backward) {
  if (consumed_) throw ContractError("tape already consumed by backward");
  NodeRec rec;
  rec.inputs.reserve(inputs.size());
  for (const Tensor* in : inputs) {
    if (in->tracked()) {
      if (in->tape() != this) {
        throw ContractError("op input is tracked on another tape");
      }
      rec.inputs.push_back(in->node());
    } else {
      rec.inputs.push_back(-1);
    }
  }
  rec.backward = std::move(backward);
  rec.grad = std::make_shared<std::vector<double>>(value.size(), 0.0);
  value.tape_ = this;
  value.node_ = static_cast<int>(nodes_.size());
  value.grad_ = rec.grad;
  nodes_.push_back(std::move(rec));
  return value;
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw ContractError("tape already consumed by backward");
  if (!loss.tracked() || loss.tape() != this) {
    throw ContractError("backward: loss is not tracked on this tape");
  }
  if (loss.size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        shape_str(loss.shape()));
  }
  consumed_ = true;
  (*nodes_[static_cast<std::size_t>(loss.node())].grad)[0] = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    NodeRec& n = nodes_[i];
    if (!n.backward) continue;
    GradSlots slots;
    slots.reserve(n.inputs.size());
    for (int id : n.inputs) {
      slots.push_back(id >= 0 ? nodes_[static_cast<std::size_t>(id)].grad.get()
                              : nullptr);
    }
    n.backward(*n.grad, slots);
  }
}

// --- elementwise ops ---------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  auto& o = out.mutable_values();
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] + bv[i];
  Tape* tape = common_tape({&a, &b});
  if (!tape) return out;
  return tape->record(
      std::move(out), {&a, &b},
      [](const std::vector<double>& g, const Tape::GradSlots& in) {
        if (in[0]) {
          for (std::size_t i = 0; i < g.size(); ++i) (*in[0])[i] += g[i];
        }
        if (in[1]) {
          for (std::size_t i = 0; i < g.size(); ++i) (*in[1])[i] += g[i];
        }
      });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  auto& o = out.mutable_values();
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] - bv[i];
  Tape* tape = common_tape({&a, &b});
  if (!tape) return out;
  return tape->record(
      std::move(out), {&a, &b},
      [](const std::vector<double>& g, const Tape::GradSlots& in) {
        if (in[0]) {
          for (std::size_t i = 0; i < g.size(); ++i) (*in[0])[i] += g[i];
        }
        if (in[1]) {
          for (std::size_t i = 0; i < g.size(); ++i) (*in[1])[i] -= g[i];
        }
      });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  auto& o = out.mutable_values();
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] * bv[i];
  Tape* tape = common_tape({&a, &b});
  if (!tape) return out;
  Tensor a_saved = a;
  Tensor b_saved = b;
  return tape->record(
      std::move(out), {&a, &b},
      [a_saved, b_saved](const std::vector<double>& g,
                         const Tape::GradSlots& in) {
        if (in[0]) {
          const auto& bv = b_saved.values();
          for (std::size_t i = 0; i < g.size(); ++i) {
            (*in[0])[i] += g[i] * bv[i];
          }
        }
        if (in[1]) {
          const auto& av = a_saved.values();
          for (std::size_t i = 0; i < g.size(); ++i) {
            (*in[1])[i] += g[i] * av[i];
          }
        }
      });
}

Tensor scale(const Tensor& a, double c) {
  Tensor out(a.shape());
  auto& o = out.mutable_values();
  const auto& av = a.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = av[i] * c;
  Tape* tape = common_tape({&a});
  if (!tape) return out;
  return tape->record(
      std::move(out), {&a},
      [c](const std::vector<double>& g, const Tape::GradSlots& in) {
        if (in[0]) {
          for (std::size_t i = 0; i < g.size(); ++i) (*in[0])[i] += g[i] * c;
        }
      });
}

Tensor add_rowwise(const Tensor& x, const Tensor& bias) {
  if (x.rank() < 1 || bias.rank() != 1 ||
      x.shape().back() != bias.dim(0)) {
    throw ShapeError("add_rowwise: shape mismatch " + shape_str(x.shape()) +
                     " vs " + shape_str(bias.shape()));
  }
  const std::size_t h = bias.dim(0);
  Tensor out(x.shape());
  auto& o = out.mutable_values();
  const auto& xv = x.values();
  const auto& bv = bias.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = xv[i] + bv[i % h];
  Tape* tape = common_tape({&x, &bias});
  if (!tape) return out;
  return tape->record(
      std::move(out), {&x, &bias},
      [h](const std::vector<double>& g, const Tape::GradSlots& in) {
        if (in[0]) {
          for (std::size_t i = 0; i < g.size(); ++i) (*in[0])[i] += g[i];
        }
        if (in[1]) {
          for (std::size_t i = 0; i < g.size(); ++i) {
            (*in[1])[i % h] += g[i];
          }
        }
      });
}

Tensor add_constant(const Tensor& x, const std::vector<double>& c) {
  if (c.size() != x.size()) {
    throw ShapeError("add_constant: got " + std::to_string(c.size()) +
                     " constants for tensor " + shape_str(x.shape()));
  }
  Tensor out(x.shape());
  auto& o = out.mutable_values();
  const auto& xv = x.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = xv[i] + c[i];
  Tape* tape = common_tape({&x});
  if (!tape) return out;
  return tape->record(
      std::move(out), {&x},
      [](const std::vector<double>& g, const Tape::GradSlots& in) {
        if (in[0]) {
          for (std::size_t i = 0; i < g.size(); ++i) (*in[0])[i] += g[i];
        }
      });
}

// --- linear algebra ----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: inner dimensions disagree, " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  kernels::matmul(a.values().data(), b.values().data(),
                  out.mutable_values().data(), m, k, n);
  Tape* tape = common_tape({&a, &b});
  if (!tape) return out;
  Tensor a_saved = a;
  Tensor b_saved = b;
  return tape->record(
      std::move(out), {&a, &b},
      [a_saved, b_saved, m, k, n](const std::vector<double>& g,
                                  const Tape::GradSlots& in) {
        if (in[0]) {
          kernels::matmul_grad_a(g.data(), b_saved.values().data(),
                                 in[0]->data(), m, k, n);
        }
        if (in[1]) {
          kernels::matmul_grad_b(a_saved.values().data(), g.data(),
                                 in[1]->data(), m, k, n);
        }
      });
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor out({n, m});
  auto& o = out.mutable_values();
  const auto& av = a.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) o[j * m + i] = av[i * n + j];
  }
  Tape* tape = common_tape({&a});
  if (!tape) return out;
  return tape->record(
      std::move(out), {&a},
      [m, n](const std::vector<double>& g, const Tape::GradSlots& in) {
        if (in[0]) {
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
              (*in[0])[i * n + j] += g[j * m + i];
            }
          }
        }
      });
}

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape) {
  check_positive_dims(shape);
  if (shape_product(shape) != x.size()) {
    throw ShapeError("reshape: " + shape_str(x.shape()) + " -> " +
                     shape_str(shape) + " changes element count");
  }
  Tensor out(std::move(shape), x.values());
  Tape* tape = common_tape({&x});
  if (!tape) return out;
  return tape->record(
      std::move(out), {&x},
      [](const std::vector<double>& g, const Tape::GradSlots& in) {
        if (in[0]) {
          for (std::size_t i = 0; i < g.size(); ++i) (*in[0])[i] += g[i];
        }
      });
}

// --- nonlinearities ----------------------------------------------------------

namespace {

// Iterates the rows of `x` along `axis`: calls fn(base, stride) for each row
// of length shape[axis].
template <typename Fn>
void for_each_axis_row(const std::vector<std::size_t>& shape, std::size_t axis,
                       Fn&& fn) {
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t n = shape[axis];
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t r = 0; r < inner; ++r) {
      fn(o * n * inner + r, inner);
    }
  }
}

}  // namespace

Tensor softmax(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw ShapeError("softmax: axis " + std::to_string(axis) +
                     " out of range for shape " + shape_str(x.shape()));
  }
  const std::size_t n = x.shape()[axis];
  Tensor out(x.shape());
  const auto& xv = x.values();
  auto& ov = out.mutable_values();
  if (axis == x.rank() - 1) {
    kernels::softmax_rows(xv.data(), ov.data(), x.size() / n, n);
  } else {
    for_each_axis_row(x.shape(), axis, [&](std::size_t base,
                                           std::size_t stride) {
      double mx = xv[base];
      for (std::size_t j = 1; j < n; ++j) {
        mx = std::max(mx, xv[base + j * stride]);
      }
      double z = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double e = std::exp(xv[base + j * stride] - mx);
        ov[base + j * stride] = e;
        z += e;
      }
      for (std::size_t j = 0; j < n; ++j) ov[base + j * stride] /= z;
    });
  }
  Tape* tape = common_tape({&x});
  if (!tape) return out;
  Tensor saved = out;
  std::vector<std::size_t> shape = x.shape();
  return tape->record(
      std::move(out), {&x},
      [saved, shape, axis, n](const std::vector<double>& g,
                              const Tape::GradSlots& in) {
        if (!in[0]) return;
        const auto& s = saved.values();
        for_each_axis_row(shape, axis, [&](std::size_t base,
                                           std::size_t stride) {
          double dot = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            dot += g[base + j * stride] * s[base + j * stride];
          }
          for (std::size_t j = 0; j < n; ++j) {
            std::size_t idx = base + j * stride;
            (*in[0])[idx] += s[idx] * (g[idx] - dot);
          }
        });
      });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  if (x.rank() < 1) throw ShapeError("layer_norm: scalar input");
  const std::size_t h = x.shape().back();
  if (gain.shape() != std::vector<std::size_t>{h} ||
      bias.shape() != std::vector<std::size_t>{h}) {
    throw ShapeError("layer_norm: gain/bias must be length " +
                     std::to_string(h) + ", got " + shape_str(gain.shape()) +
                     " and " + shape_str(bias.shape()));
  }
  if (!(eps > 0.0)) throw InputError("layer_norm: eps must be positive");
  const std::size_t rows = x.size() / h;
  Tensor out(x.shape());
  auto& ov = out.mutable_values();
  const auto& xv = x.values();
  const auto& gv = gain.values();
  const auto& bv = bias.values();
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv_sigma = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data() + r * h;
    double mu = 0.0;
    for (std::size_t j = 0; j < h; ++j) mu += xr[j];
    mu /= static_cast<double>(h);
    double var = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
      double d = xr[j] - mu;
      var += d * d;
    }
    var /= static_cast<double>(h);
    double is = 1.0 / std::sqrt(var + eps);
    (*inv_sigma)[r] = is;
    for (std::size_t j = 0; j < h; ++j) {
      double xh = (xr[j] - mu) * is;
      (*xhat)[r * h + j] = xh;
      ov[r * h + j] = gv[j] * xh + bv[j];
    }
  }
  Tape* tape = common_tape({&x, &gain, &bias});
  if (!tape) return out;
  Tensor gain_saved = gain;
  return tape->record(
      std::move(out), {&x, &gain, &bias},
      [xhat, inv_sigma, gain_saved, rows, h](const std::vector<double>& g,
                                             const Tape::GradSlots& in) {
        const auto& gv = gain_saved.values();
        for (std::size_t r = 0; r < rows; ++r) {
          const double* gr = g.data() + r * h;
          const double* xh = xhat->data() + r * h;
          if (in[0]) {
            double m1 = 0.0, m2 = 0.0;
            for (std::size_t j = 0; j < h; ++j) {
              double dxh = gr[j] * gv[j];
              m1 += dxh;
              m2 += dxh * xh[j];
            }
            m1 /= static_cast<double>(h);
            m2 /= static_cast<double>(h);
            double is = (*inv_sigma)[r];
            for (std::size_t j = 0; j < h; ++j) {
              double dxh = gr[j] * gv[j];
              (*in[0])[r * h + j] += (dxh - m1 - xh[j] * m2) * is;
            }
          }
          if (in[1]) {
            for (std::size_t j = 0; j < h; ++j) {
              (*in[1])[j] += gr[j] * xh[j];
            }
          }
          if (in[2]) {
            for (std::size_t j = 0; j < h; ++j) (*in[2])[j] += gr[j];
          }
        }
      });
}

Tensor gelu(const Tensor& x) {
  Tensor out(x.shape());
  kernels::gelu(x.values().data(), out.mutable_values().data(), x.size());
  Tape* tape = common_tape({&x});
  if (!tape) return out;
  Tensor x_saved = x;
  return tape->record(
      std::move(out), {&x},
      [x_saved](const std::vector<double>& g, const Tape::GradSlots& in) {
        if (in[0]) {
          kernels::gelu_grad(x_saved.values().data(), g.data(),
                             in[0]->data(), g.size());
        }
      });
}

// --- reductions ----------------------------------------------------------------

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  Tensor out = Tensor::scalar(acc);
  Tape* tape = common_tape({&x});
  if (!tape) return out;
  std::size_t n = x.size();
  return tape->record(
      std::move(out), {&x},
      [n](const std::vector<double>& g, const Tape::GradSlots& in) {
        if (in[0]) {
          for (std::size_t i = 0; i < n; ++i) (*in[0])[i] += g[0];
        }
      });
}

Tensor mean(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  const double inv_n = 1.0 / static_cast<double>(x.size());
  Tensor out = Tensor::scalar(acc * inv_n);
  Tape* tape = common_tape({&x});
  if (!tape) return out;
  std::size_t n = x.size();
  return tape->record(
      std::move(out), {&x},
      [n, inv_n](const std::vector<double>& g, const Tape::GradSlots& in) {
        if (in[0]) {
          for (std::size_t i = 0; i < n; ++i) (*in[0])[i] += g[0] * inv_n;
        }
      });
}

// --- embedding-specific ops -----------------------------------------------------

Tensor l2_normalize_rows(const Tensor& x) {
  require_matrix(x, "l2_normalize_rows");
  const std::size_t rows = x.dim(0), h = x.dim(1);
  Tensor out(x.shape());
  auto& ov = out.mutable_values();
  const auto& xv = x.values();
  auto norms = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double sq = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
      sq += xv[r * h + j] * xv[r * h + j];
    }
    double norm = std::sqrt(sq);
    if (norm == 0.0) {
      throw NumericError("l2_normalize_rows: zero-norm row " +
                         std::to_string(r));
    }
    (*norms)[r] = norm;
    for (std::size_t j = 0; j < h; ++j) ov[r * h + j] = xv[r * h + j] / norm;
  }
  Tape* tape = common_tape({&x});
  if (!tape) return out;
  Tensor saved = out;
  return tape->record(
      std::move(out), {&x},
      [saved, norms, rows, h](const std::vector<double>& g,
                              const Tape::GradSlots& in) {
        if (!in[0]) return;
        const auto& rv = saved.values();
        for (std::size_t r = 0; r < rows; ++r) {
          double dot = 0.0;
          for (std::size_t j = 0; j < h; ++j) {
            dot += g[r * h + j] * rv[r * h + j];
          }
          for (std::size_t j = 0; j < h; ++j) {
            (*in[0])[r * h + j] +=
                (g[r * h + j] - rv[r * h + j] * dot) / (*norms)[r];
          }
        }
      });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  require_matrix(a, "concat_rows");
  require_matrix(b, "concat_rows");
  if (a.dim(1) != b.dim(1)) {
    throw ShapeError("concat_rows: column mismatch " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  }
  const std::size_t na = a.dim(0), nb = b.dim(0), h = a.dim(1);
  Tensor out({na + nb, h});
  auto& ov = out.mutable_values();
  std::copy(a.values().begin(), a.values().end(), ov.begin());
  std::copy(b.values().begin(), b.values().end(), ov.begin() + na * h);
  Tape* tape = common_tape({&a, &b});
  if (!tape) return out;
  return tape->record(
      std::move(out), {&a, &b},
      [na, nb, h](const std::vector<double>& g, const Tape::GradSlots& in) {
        if (in[0]) {
          for (std::size_t i = 0; i < na * h; ++i) (*in[0])[i] += g[i];
        }
        if (in[1]) {
          for (std::size_t i = 0; i < nb * h; ++i) {
            (*in[1])[i] += g[na * h + i];
          }
        }
      });
}

Tensor rowwise_cosine(const Tensor& u, const Tensor& v) {
  require_matrix(u, "rowwise_cosine");
  require_same_shape(u, v, "rowwise_cosine");
  const std::size_t rows = u.dim(0), h = u.dim(1);
  Tensor out({rows});
  auto& ov = out.mutable_values();
  const auto& uv = u.values();
  const auto& vv = v.values();
  auto nu = std::make_shared<std::vector<double>>(rows);
  auto nv = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double su = 0.0, sv = 0.0, dot = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
      su += uv[r * h + j] * uv[r * h + j];
      sv += vv[r * h + j] * vv[r * h + j];
      dot += uv[r * h + j] * vv[r * h + j];
    }
    double un = std::sqrt(su), vn = std::sqrt(sv);
    if (un == 0.0 || vn == 0.0) {
      throw NumericError("rowwise_cosine: zero-norm row " + std::to_string(r));
    }
    (*nu)[r] = un;
    (*nv)[r] = vn;
    ov[r] = dot / (un * vn);
  }
  Tape* tape = common_tape({&u, &v});
  if (!tape) return out;
  Tensor u_saved = u, v_saved = v;
  Tensor cos_saved = out;
  return tape->record(
      std::move(out), {&u, &v},
      [u_saved, v_saved, cos_saved, nu, nv, rows, h](
          const std::vector<double>& g, const Tape::GradSlots& in) {
        const auto& uv = u_saved.values();
        const auto& vv = v_saved.values();
        const auto& cv = cos_saved.values();
        for (std::size_t r = 0; r < rows; ++r) {
          double un = (*nu)[r], vn = (*nv)[r], c = cv[r], gr = g[r];
          if (in[0]) {
            for (std::size_t j = 0; j < h; ++j) {
              (*in[0])[r * h + j] +=
                  gr * (vv[r * h + j] / (un * vn) -
                        c * uv[r * h + j] / (un * un));
            }
          }
          if (in[1]) {
            for (std::size_t j = 0; j < h; ++j) {
              (*in[1])[r * h + j] +=
                  gr * (uv[r * h + j] / (un * vn) -
                        c * vv[r * h + j] / (vn * vn));
            }
          }
        }
      });
}

Tensor softmax_cross_entropy(const Tensor& logits,
                             const std::vector<std::size_t>& targets) {
  require_matrix(logits, "softmax_cross_entropy");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  if (targets.size() != n) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(targets.size()) +
                     " targets for " + std::to_string(n) + " rows");
  }
  for (std::size_t t : targets) {
    if (t >= c) {
      throw InputError("softmax_cross_entropy: target " + std::to_string(t) +
                       " out of range for " + std::to_string(c) + " classes");
    }
  }
  const auto& lv = logits.values();
  auto probs = std::make_shared<std::vector<double>>(n * c);
  kernels::softmax_rows(lv.data(), probs->data(), n, c);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    // log-sum-exp form, stable even when the target prob underflows
    const double* row = lv.data() + r * c;
    double mx = row[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - mx);
    total += mx + std::log(z) - row[targets[r]];
  }
  Tensor out = Tensor::scalar(total / static_cast<double>(n));
  Tape* tape = common_tape({&logits});
  if (!tape) return out;
  auto tgts = std::make_shared<std::vector<std::size_t>>(targets);
  return tape->record(
      std::move(out), {&logits},
      [probs, tgts, n, c](const std::vector<double>& g,
                          const Tape::GradSlots& in) {
        if (!in[0]) return;
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t j = 0; j < c; ++j) {
            double ind = (j == (*tgts)[r]) ? 1.0 : 0.0;
            (*in[0])[r * c + j] += g[0] * ((*probs)[r * c + j] - ind) * inv_n;
          }
        }
      });
}

Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids) {
  require_matrix(table, "embedding_lookup");
  const std::size_t v = table.dim(0), h = table.dim(1);
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= v) {
      throw InputError("embedding_lookup: id " + std::to_string(id) +
                       " out of range for table of " + std::to_string(v) +
                       " rows");
    }
  }
  if (ids.empty()) throw InputError("embedding_lookup: empty id list");
  Tensor out({ids.size(), h});
  auto& ov = out.mutable_values();
  const auto& tv = table.values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy(tv.begin() + static_cast<std::ptrdiff_t>(ids[i] * h),
              tv.begin() + static_cast<std::ptrdiff_t>((ids[i] + 1) * h),
              ov.begin() + static_cast<std::ptrdiff_t>(i * h));
  }
  Tape* tape = common_tape({&table});
  if (!tape) return out;
  auto ids_saved = std::make_shared<std::vector<int>>(ids);
  return tape->record(
      std::move(out), {&table},
      [ids_saved, h](const std::vector<double>& g, const Tape::GradSlots& in) {
        if (!in[0]) return;
        for (std::size_t i = 0; i < ids_saved->size(); ++i) {
          const std::size_t row = static_cast<std::size_t>((*ids_saved)[i]);
          for (std::size_t j = 0; j < h; ++j) {
            (*in[0])[row * h + j] += g[i * h + j];
          }
        }
      });
}

Tensor masked_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                        const std::vector<int>& mask, std::size_t batch,
                        std::size_t seq_len, std::size_t num_heads) {
  require_matrix(q, "masked_attention");
  require_same_shape(q, k, "masked_attention");
  require_same_shape(q, v, "masked_attention");
  const std::size_t h = q.dim(1);
  if (q.dim(0) != batch * seq_len) {
    throw ShapeError("masked_attention: expected " +
                     std::to_string(batch * seq_len) + " rows, got " +
                     shape_str(q.shape()));
  }
  if (num_heads == 0 || h % num_heads != 0) {
    throw ShapeError("masked_attention: hidden " + std::to_string(h) +
                     " not divisible by " + std::to_string(num_heads) +
                     " heads");
  }
  if (mask.size() != batch * seq_len) {
    throw ShapeError("masked_attention: mask size mismatch");
  }
  const std::size_t hd = h / num_heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const auto& qv = q.values();
  const auto& kv = k.values();
  const auto& vv = v.values();
  Tensor out({batch * seq_len, h});
  auto& ov = out.mutable_values();
  auto probs =
      std::make_shared<std::vector<double>>(batch * num_heads * seq_len *
                                            seq_len);
  std::vector<double> logits(seq_len);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t a = 0; a < num_heads; ++a) {
      const std::size_t off = a * hd;
      for (std::size_t t1 = 0; t1 < seq_len; ++t1) {
        const double* qrow = qv.data() + (b * seq_len + t1) * h + off;
        for (std::size_t t2 = 0; t2 < seq_len; ++t2) {
          const double* krow = kv.data() + (b * seq_len + t2) * h + off;
          double dot = 0.0;
          for (std::size_t j = 0; j < hd; ++j) dot += qrow[j] * krow[j];
          logits[t2] = dot * inv_scale +
                       (mask[b * seq_len + t2] ? 0.0 : -1e9);
        }
        double* prow = probs->data() +
                       ((b * num_heads + a) * seq_len + t1) * seq_len;
        kernels::serial::softmax_rows(logits.data(), prow, 1, seq_len);
        double* orow = ov.data() + (b * seq_len + t1) * h + off;
        for (std::size_t j = 0; j < hd; ++j) {
          double acc = 0.0;
          for (std::size_t t2 = 0; t2 < seq_len; ++t2) {
            acc += prow[t2] * vv[(b * seq_len + t2) * h + off + j];
          }
          orow[j] = acc;
        }
      }
    }
  }
  Tape* tape = common_tape({&q, &k, &v});
  if (!tape) return out;
  Tensor q_saved = q, k_saved = k, v_saved = v;
  return tape->record(
      std::move(out), {&q, &k, &v},
      [q_saved, k_saved, v_saved, probs, batch, seq_len, num_heads, hd, h,
       inv_scale](const std::vector<double>& g, const Tape::GradSlots& in) {
        const auto& qv = q_saved.values();
        const auto& kv = k_saved.values();
        const auto& vv = v_saved.values();
        std::vector<double> dprob(seq_len);
        std::vector<double> dlogit(seq_len);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t a = 0; a < num_heads; ++a) {
            const std::size_t off = a * hd;
            for (std::size_t t1 = 0; t1 < seq_len; ++t1) {
              const double* prow = probs->data() +
                                   ((b * num_heads + a) * seq_len + t1) *
                                       seq_len;
              const double* grow = g.data() + (b * seq_len + t1) * h + off;
              // dV and dP
              for (std::size_t t2 = 0; t2 < seq_len; ++t2) {
                const double* vrow = vv.data() + (b * seq_len + t2) * h + off;
                double acc = 0.0;
                for (std::size_t j = 0; j < hd; ++j) acc += grow[j] * vrow[j];
                dprob[t2] = acc;
                if (in[2]) {
                  double* dvrow = in[2]->data() + (b * seq_len + t2) * h + off;
                  for (std::size_t j = 0; j < hd; ++j) {
                    dvrow[j] += prow[t2] * grow[j];
                  }
                }
              }
              // softmax backward
              double dot = 0.0;
              for (std::size_t t2 = 0; t2 < seq_len; ++t2) {
                dot += dprob[t2] * prow[t2];
              }
              for (std::size_t t2 = 0; t2 < seq_len; ++t2) {
                dlogit[t2] = prow[t2] * (dprob[t2] - dot);
              }
              // dQ and dK
              const double* qrow = qv.data() + (b * seq_len + t1) * h + off;
              for (std::size_t t2 = 0; t2 < seq_len; ++t2) {
                const double* krow = kv.data() + (b * seq_len + t2) * h + off;
                const double w = dlogit[t2] * inv_scale;
                if (in[0]) {
                  double* dqrow = in[0]->data() + (b * seq_len + t1) * h + off;
                  for (std::size_t j = 0; j < hd; ++j) {
                    dqrow[j] += w * krow[j];
                  }
                }
                if (in[1]) {
                  double* dkrow = in[1]->data() + (b * seq_len + t2) * h + off;
                  for (std::size_t j = 0; j < hd; ++j) {
                    dkrow[j] += w * qrow[j];
                  }
                }
              }
            }
          }
        }
      });
}

}  // namespace sembed
