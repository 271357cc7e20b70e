#include "ntt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ntt {

namespace {

std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::runtime_error("tensor shape has non-positive dim " + shape_str(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

bool same_shape(const std::vector<int>& a, const std::vector<int>& b) { return a == b; }

bool is_single(const Tensor& t) { return t.size() == 1; }

[[noreturn]] void shape_error(const std::string& op, const Tensor& a, const Tensor& b) {
  throw std::runtime_error(op + ": incompatible shapes " + shape_str(a.shape()) + " and " +
                           shape_str(b.shape()));
}

}  // namespace

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << " ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor make_op_result(std::vector<int> shape, std::vector<real> value,
                      std::vector<std::shared_ptr<TensorNode>> parents,
                      std::function<void(const std::vector<real>&, GradSink&)> fn) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool needs = false;
  for (const auto& p : parents)
    if (p->requires_grad) needs = true;
  node->requires_grad = needs;
  if (needs) {
    node->parents = std::move(parents);
    node->backprop = std::move(fn);
  }
  return Tensor(std::move(node));
}

namespace {

// Accumulate into the sink slot for a node, creating it zero-filled on first touch.
std::vector<real>& sink_slot(GradSink& sink, const TensorNode* node) {
  auto it = sink.find(node);
  if (it == sink.end())
    it = sink.emplace(node, std::vector<real>(node->value.size(), real(0))).first;
  return it->second;
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  std::size_t n = shape_numel(shape);
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value.assign(n, real(0));
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::full(std::vector<int> shape, real fill, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.node_->value.begin(), t.node_->value.end(), fill);
  return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<real> data, bool requires_grad) {
  if (shape_numel(shape) != data.size())
    throw std::runtime_error("tensor from: data size " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(real v, bool requires_grad) { return from({1}, {v}, requires_grad); }

real Tensor::item() const {
  if (size() != 1)
    throw std::runtime_error("item: tensor has shape " + shape_str(shape()) +
                             ", expected a single element");
  return node_->value[0];
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (same_shape(a.shape(), b.shape())) {
    std::size_t n = a.values().size();
    std::vector<real> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a.values()[i] + b.values()[i];
    auto pa = a.node_ptr();
    auto pb = b.node_ptr();
    return make_op_result(a.shape(), std::move(out), {pa, pb},
                          [pa, pb](const std::vector<real>& g, GradSink& sink) {
                            if (pa->requires_grad) {
                              auto& sa = sink_slot(sink, pa.get());
                              for (std::size_t i = 0; i < g.size(); ++i) sa[i] += g[i];
                            }
                            if (pb->requires_grad) {
                              auto& sb = sink_slot(sink, pb.get());
                              for (std::size_t i = 0; i < g.size(); ++i) sb[i] += g[i];
                            }
                          });
  }
  if (is_single(b)) {
    std::size_t n = a.values().size();
    std::vector<real> out(n);
    real bv = b.values()[0];
    for (std::size_t i = 0; i < n; ++i) out[i] = a.values()[i] + bv;
    auto pa = a.node_ptr();
    auto pb = b.node_ptr();
    return make_op_result(a.shape(), std::move(out), {pa, pb},
                          [pa, pb](const std::vector<real>& g, GradSink& sink) {
                            if (pa->requires_grad) {
                              auto& sa = sink_slot(sink, pa.get());
                              for (std::size_t i = 0; i < g.size(); ++i) sa[i] += g[i];
                            }
                            if (pb->requires_grad) {
                              auto& sb = sink_slot(sink, pb.get());
                              for (real gv : g) sb[0] += gv;
                            }
                          });
  }
  if (is_single(a)) return add(b, a);
  shape_error("add", a, b);
}

Tensor add(const Tensor& a, real b) { return add(a, Tensor::scalar(b)); }

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, mul(b, real(-1))); }

Tensor mul(const Tensor& a, const Tensor& b) {
  if (same_shape(a.shape(), b.shape())) {
    std::size_t n = a.values().size();
    std::vector<real> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a.values()[i] * b.values()[i];
    auto pa = a.node_ptr();
    auto pb = b.node_ptr();
    return make_op_result(a.shape(), std::move(out), {pa, pb},
                          [pa, pb](const std::vector<real>& g, GradSink& sink) {
                            if (pa->requires_grad) {
                              auto& sa = sink_slot(sink, pa.get());
                              for (std::size_t i = 0; i < g.size(); ++i)
                                sa[i] += g[i] * pb->value[i];
                            }
                            if (pb->requires_grad) {
                              auto& sb = sink_slot(sink, pb.get());
                              for (std::size_t i = 0; i < g.size(); ++i)
                                sb[i] += g[i] * pa->value[i];
                            }
                          });
  }
  if (is_single(b)) {
    std::size_t n = a.values().size();
    std::vector<real> out(n);
    real bv = b.values()[0];
    for (std::size_t i = 0; i < n; ++i) out[i] = a.values()[i] * bv;
    auto pa = a.node_ptr();
    auto pb = b.node_ptr();
    return make_op_result(a.shape(), std::move(out), {pa, pb},
                          [pa, pb, bv](const std::vector<real>& g, GradSink& sink) {
                            if (pa->requires_grad) {
                              auto& sa = sink_slot(sink, pa.get());
                              for (std::size_t i = 0; i < g.size(); ++i) sa[i] += g[i] * bv;
                            }
                            if (pb->requires_grad) {
                              auto& sb = sink_slot(sink, pb.get());
                              for (std::size_t i = 0; i < g.size(); ++i)
                                sb[0] += g[i] * pa->value[i];
                            }
                          });
  }
  if (is_single(a)) return mul(b, a);
  shape_error("mul", a, b);
}

Tensor mul(const Tensor& a, real b) { return mul(a, Tensor::scalar(b)); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2) throw std::runtime_error("matmul: lhs must be rank 2, got " + shape_str(a.shape()));
  int m = a.dim(0), k = a.dim(1);
  if (b.rank() == 1) {
    if (b.dim(0) != k) shape_error("matmul", a, b);
    std::vector<real> out(static_cast<std::size_t>(m), real(0));
    const auto& av = a.values();
    const auto& bv = b.values();
    for (int i = 0; i < m; ++i) {
      real acc = 0;
      const real* arow = av.data() + static_cast<std::size_t>(i) * k;
      for (int j = 0; j < k; ++j) acc += arow[j] * bv[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(i)] = acc;
    }
    auto pa = a.node_ptr();
    auto pb = b.node_ptr();
    return make_op_result({m}, std::move(out), {pa, pb},
                          [pa, pb, m, k](const std::vector<real>& g, GradSink& sink) {
                            if (pa->requires_grad) {
                              auto& sa = sink_slot(sink, pa.get());
                              for (int i = 0; i < m; ++i)
                                for (int j = 0; j < k; ++j)
                                  sa[static_cast<std::size_t>(i) * k + j] +=
                                      g[static_cast<std::size_t>(i)] *
                                      pb->value[static_cast<std::size_t>(j)];
                            }
                            if (pb->requires_grad) {
                              auto& sb = sink_slot(sink, pb.get());
                              for (int i = 0; i < m; ++i)
                                for (int j = 0; j < k; ++j)
                                  sb[static_cast<std::size_t>(j)] +=
                                      g[static_cast<std::size_t>(i)] *
                                      pa->value[static_cast<std::size_t>(i) * k + j];
                            }
                          });
  }
  if (b.rank() != 2 || b.dim(0) != k) shape_error("matmul", a, b);
  int n = b.dim(1);
  std::vector<real> out(static_cast<std::size_t>(m) * n, real(0));
  const auto& av = a.values();
  const auto& bv = b.values();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) {
      real aij = av[static_cast<std::size_t>(i) * k + j];
      const real* brow = bv.data() + static_cast<std::size_t>(j) * n;
      real* orow = out.data() + static_cast<std::size_t>(i) * n;
      for (int c = 0; c < n; ++c) orow[c] += aij * brow[c];
    }
  auto pa = a.node_ptr();
  auto pb = b.node_ptr();
  return make_op_result({m, n}, std::move(out), {pa, pb},
                        [pa, pb, m, k, n](const std::vector<real>& g, GradSink& sink) {
                          if (pa->requires_grad) {
                            auto& sa = sink_slot(sink, pa.get());
                            for (int i = 0; i < m; ++i)
                              for (int j = 0; j < k; ++j) {
                                real acc = 0;
                                for (int c = 0; c < n; ++c)
                                  acc += g[static_cast<std::size_t>(i) * n + c] *
                                         pb->value[static_cast<std::size_t>(j) * n + c];
                                sa[static_cast<std::size_t>(i) * k + j] += acc;
                              }
                          }
                          if (pb->requires_grad) {
                            auto& sb = sink_slot(sink, pb.get());
                            for (int j = 0; j < k; ++j)
                              for (int c = 0; c < n; ++c) {
                                real acc = 0;
                                for (int i = 0; i < m; ++i)
                                  acc += pa->value[static_cast<std::size_t>(i) * k + j] *
                                         g[static_cast<std::size_t>(i) * n + c];
                                sb[static_cast<std::size_t>(j) * n + c] += acc;
                              }
                          }
                        });
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::runtime_error("concat: no inputs");
  int total = 0;
  for (const auto& p : parts) {
    if (p.rank() != 1)
      throw std::runtime_error("concat: expects rank-1 tensors, got " + shape_str(p.shape()));
    total += p.dim(0);
  }
  std::vector<real> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<std::shared_ptr<TensorNode>> parents;
  parents.reserve(parts.size());
  for (const auto& p : parts) {
    out.insert(out.end(), p.values().begin(), p.values().end());
    parents.push_back(p.node_ptr());
  }
  auto ps = parents;
  return make_op_result({total}, std::move(out), std::move(parents),
                        [ps](const std::vector<real>& g, GradSink& sink) {
                          std::size_t off = 0;
                          for (const auto& p : ps) {
                            std::size_t n = p->value.size();
                            if (p->requires_grad) {
                              auto& s = sink_slot(sink, p.get());
                              for (std::size_t i = 0; i < n; ++i) s[i] += g[off + i];
                            }
                            off += n;
                          }
                        });
}

Tensor slice(const Tensor& t, int start, int len) {
  if (t.rank() != 1)
    throw std::runtime_error("slice: expects rank-1 tensor, got " + shape_str(t.shape()));
  if (start < 0 || len <= 0 || start + len > t.dim(0))
    throw std::runtime_error("slice: range [" + std::to_string(start) + ", " +
                             std::to_string(start + len) + ") out of bounds for " +
                             shape_str(t.shape()));
  std::vector<real> out(t.values().begin() + start, t.values().begin() + start + len);
  auto pt = t.node_ptr();
  return make_op_result({len}, std::move(out), {pt},
                        [pt, start, len](const std::vector<real>& g, GradSink& sink) {
                          if (!pt->requires_grad) return;
                          auto& s = sink_slot(sink, pt.get());
                          for (int i = 0; i < len; ++i)
                            s[static_cast<std::size_t>(start + i)] += g[static_cast<std::size_t>(i)];
                        });
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw std::runtime_error("stack_rows: no inputs");
  int len = rows[0].dim(0);
  for (const auto& r : rows)
    if (r.rank() != 1 || r.dim(0) != len)
      throw std::runtime_error("stack_rows: all rows must be rank-1 of length " +
                               std::to_string(len) + ", got " + shape_str(r.shape()));
  int n = static_cast<int>(rows.size());
  std::vector<real> out;
  out.reserve(static_cast<std::size_t>(n) * len);
  std::vector<std::shared_ptr<TensorNode>> parents;
  parents.reserve(rows.size());
  for (const auto& r : rows) {
    out.insert(out.end(), r.values().begin(), r.values().end());
    parents.push_back(r.node_ptr());
  }
  auto ps = parents;
  return make_op_result({n, len}, std::move(out), std::move(parents),
                        [ps, len](const std::vector<real>& g, GradSink& sink) {
                          for (std::size_t r = 0; r < ps.size(); ++r) {
                            if (!ps[r]->requires_grad) continue;
                            auto& s = sink_slot(sink, ps[r].get());
                            for (int i = 0; i < len; ++i)
                              s[static_cast<std::size_t>(i)] +=
                                  g[r * static_cast<std::size_t>(len) + i];
                          }
                        });
}

Tensor row(const Tensor& m, int i) {
  if (m.rank() != 2)
    throw std::runtime_error("row: expects rank-2 tensor, got " + shape_str(m.shape()));
  if (i < 0 || i >= m.dim(0))
    throw std::runtime_error("row: index " + std::to_string(i) + " out of bounds for " +
                             shape_str(m.shape()));
  int cols = m.dim(1);
  std::size_t off = static_cast<std::size_t>(i) * cols;
  std::vector<real> out(m.values().begin() + off, m.values().begin() + off + cols);
  auto pm = m.node_ptr();
  return make_op_result({cols}, std::move(out), {pm},
                        [pm, off, cols](const std::vector<real>& g, GradSink& sink) {
                          if (!pm->requires_grad) return;
                          auto& s = sink_slot(sink, pm.get());
                          for (int c = 0; c < cols; ++c) s[off + c] += g[static_cast<std::size_t>(c)];
                        });
}

Tensor pick(const Tensor& t, int i) {
  if (i < 0 || i >= t.size())
    throw std::runtime_error("pick: index " + std::to_string(i) + " out of bounds for " +
                             shape_str(t.shape()));
  std::vector<real> out{t.values()[static_cast<std::size_t>(i)]};
  auto pt = t.node_ptr();
  return make_op_result({1}, std::move(out), {pt},
                        [pt, i](const std::vector<real>& g, GradSink& sink) {
                          if (!pt->requires_grad) return;
                          sink_slot(sink, pt.get())[static_cast<std::size_t>(i)] += g[0];
                        });
}

namespace {

template <class F, class DF>
Tensor unary_op(const Tensor& t, F f, DF df_from_y) {
  std::size_t n = t.values().size();
  std::vector<real> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(t.values()[i]);
  auto pt = t.node_ptr();
  auto y = std::make_shared<std::vector<real>>(out);
  return make_op_result(t.shape(), std::move(out), {pt},
                        [pt, y, df_from_y](const std::vector<real>& g, GradSink& sink) {
                          if (!pt->requires_grad) return;
                          auto& s = sink_slot(sink, pt.get());
                          for (std::size_t i = 0; i < g.size(); ++i)
                            s[i] += g[i] * df_from_y((*y)[i], pt->value[i]);
                        });
}

}  // namespace

Tensor tanh(const Tensor& t) {
  return unary_op(
      t, [](real x) { return std::tanh(x); },
      [](real y, real) { return real(1) - y * y; });
}

Tensor sigmoid(const Tensor& t) {
  return unary_op(
      t,
      [](real x) {
        if (x >= 0) {
          real e = std::exp(-x);
          return real(1) / (real(1) + e);
        }
        real e = std::exp(x);
        return e / (real(1) + e);
      },
      [](real y, real) { return y * (real(1) - y); });
}

Tensor relu(const Tensor& t) {
  return unary_op(
      t, [](real x) { return x > 0 ? x : real(0); },
      [](real, real x) { return x > 0 ? real(1) : real(0); });
}

Tensor log(const Tensor& t) {
  for (real v : t.values())
    if (!(v > 0))
      throw std::runtime_error("log: non-positive input " + std::to_string(v));
  return unary_op(
      t, [](real x) { return std::log(x); },
      [](real, real x) { return real(1) / x; });
}

Tensor sum(const Tensor& t) {
  real acc = 0;
  for (real v : t.values()) acc += v;
  auto pt = t.node_ptr();
  return make_op_result({1}, {acc}, {pt}, [pt](const std::vector<real>& g, GradSink& sink) {
    if (!pt->requires_grad) return;
    auto& s = sink_slot(sink, pt.get());
    for (auto& v : s) v += g[0];
  });
}

Tensor mean(const Tensor& t) { return mul(sum(t), real(1) / static_cast<real>(t.size())); }

Tensor softmax(const Tensor& t) {
  if (t.rank() != 1)
    throw std::runtime_error("softmax: expects rank-1 tensor, got " + shape_str(t.shape()));
  for (real v : t.values())
    if (!std::isfinite(v)) throw std::runtime_error("softmax: non-finite logit");
  std::size_t n = t.values().size();
  real mx = t.values()[0];
  for (real v : t.values()) mx = std::max(mx, v);
  std::vector<real> out(n);
  real z = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(t.values()[i] - mx);
    z += out[i];
  }
  for (auto& v : out) v /= z;
  auto pt = t.node_ptr();
  auto y = std::make_shared<std::vector<real>>(out);
  return make_op_result(t.shape(), std::move(out), {pt},
                        [pt, y](const std::vector<real>& g, GradSink& sink) {
                          if (!pt->requires_grad) return;
                          auto& s = sink_slot(sink, pt.get());
                          real dot = 0;
                          for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * (*y)[i];
                          for (std::size_t i = 0; i < g.size(); ++i)
                            s[i] += (*y)[i] * (g[i] - dot);
                        });
}

GradSink backward(const Tensor& loss) {
  if (loss.size() != 1)
    throw std::runtime_error("backward: loss must be a single element, got " +
                             shape_str(loss.shape()));
  GradSink sink;
  if (!loss.requires_grad()) return sink;

  // Topological order via iterative DFS over requires_grad subgraph.
  std::vector<TensorNode*> order;
  std::unordered_map<TensorNode*, int> state;  // 0 unseen, 1 open, 2 done
  std::vector<TensorNode*> stack{loss.node()};
  while (!stack.empty()) {
    TensorNode* n = stack.back();
    int& st = state[n];
    if (st == 0) {
      st = 1;
      for (const auto& p : n->parents)
        if (p->requires_grad && state[p.get()] == 0) stack.push_back(p.get());
    } else {
      stack.pop_back();
      if (st == 1) {
        st = 2;
        order.push_back(n);
      }
    }
  }

  sink[loss.node()] = {real(1)};
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* n = *it;
    auto found = sink.find(n);
    if (found == sink.end() || !n->backprop) continue;
    n->backprop(found->second, sink);
  }
  return sink;
}

}  // namespace ntt
