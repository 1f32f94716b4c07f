// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/tensor/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Core>

namespace mgforge::tensor {

namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<Mat<T>>;
template <typename T>
using CMapM = Eigen::Map<const Mat<T>>;
template <typename T>
using StridedM = Eigen::Map<Mat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using CStridedM = Eigen::Map<const Mat<T>, 0, Eigen::OuterStride<>>;

// Output node; records `parents` and `fn` only when some parent needs grad.
template <typename T>
std::shared_ptr<Node<T>> make_node(Shape shape, std::initializer_list<const Tensor<T>*> inputs) {
  auto n = std::make_shared<Node<T>>();
  n->shape = std::move(shape);
  n->value.resize(numel(n->shape));
  if (grad_enabled()) {
    for (const Tensor<T>* in : inputs) {
      if (in->requires_grad()) {
        n->requires_grad = true;
      }
    }
    if (n->requires_grad) {
      for (const Tensor<T>* in : inputs) {
        n->parents.push_back(in->shared());
      }
    }
  }
  return n;
}

template <typename T>
bool wants(const Node<T>* n) {
  return n->requires_grad;
}

// dst = e when dst was just allocated uninitialized, dst += e otherwise.
template <typename Dst, typename Expr>
void assign_or_add(bool fresh, Dst&& dst, const Expr& e) {
  if (fresh) {
    dst.noalias() = e;
  } else {
    dst.noalias() += e;
  }
}

// Gradient target for `n`; falls back to the zeroed buffer when another
// parent of the same op shares the node (both would write the same memory).
template <typename T>
T* target(Node<T>* n, bool shared, bool& fresh) {
  if (shared) {
    fresh = false;
    return n->grad_buffer();
  }
  return n->grad_target(fresh);
}

bool is_suffix(const Shape& big, const Shape& small) {
  if (small.size() > big.size()) {
    return false;
  }
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

}  // namespace

template <typename T>
void log_softmax_row(std::span<const T> logits, std::span<T> out) {
  const T mx = *std::max_element(logits.begin(), logits.end());
  T s = 0;
  for (T v : logits) {
    s += std::exp(v - mx);
  }
  const T lse = mx + std::log(s);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = logits[i] - lse;
  }
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& x, const Tensor<T>& w) {
  if (w.ndim() != 2 || x.ndim() < 1 || x.dim(-1) != w.dim(0)) {
    throw shape_error("matmul", x.shape(), w.shape());
  }
  const int k = w.dim(0);
  const int n = w.dim(1);
  const int m = static_cast<int>(x.numel() / static_cast<std::size_t>(k));
  Shape out_shape = x.shape();
  out_shape.back() = n;
  auto out = make_node<T>(out_shape, {&x, &w});
  MapM<T>(out->value.data(), m, n).noalias() =
      CMapM<T>(x.data().data(), m, k) * CMapM<T>(w.data().data(), k, n);
  if (out->requires_grad) {
    out->backward = [m, k, n](Node<T>& self) {
      Node<T>* xa = self.parents[0].get();
      Node<T>* wa = self.parents[1].get();
      CMapM<T> g(self.grad.data(), m, n);
      const bool shared = xa == wa;
      bool fresh = false;
      if (wants(xa)) {
        T* gx = target(xa, shared, fresh);
        assign_or_add(fresh, MapM<T>(gx, m, k), g * CMapM<T>(wa->value.data(), k, n).transpose());
      }
      if (wants(wa)) {
        T* gw = target(wa, shared, fresh);
        assign_or_add(fresh, MapM<T>(gw, k, n), CMapM<T>(xa->value.data(), m, k).transpose() * g);
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  if (w.ndim() != 2 || x.ndim() < 1 || x.dim(-1) != w.dim(0) || b.shape() != Shape{w.dim(1)}) {
    throw shape_error("linear", x.shape(), w.shape());
  }
  const int k = w.dim(0);
  const int n = w.dim(1);
  const int m = static_cast<int>(x.numel() / static_cast<std::size_t>(k));
  Shape out_shape = x.shape();
  out_shape.back() = n;
  auto out = make_node<T>(out_shape, {&x, &w, &b});
  MapM<T> y(out->value.data(), m, n);
  y.noalias() = CMapM<T>(x.data().data(), m, k) * CMapM<T>(w.data().data(), k, n);
  y.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(b.data().data(), n);
  if (out->requires_grad) {
    out->backward = [m, k, n](Node<T>& self) {
      Node<T>* xa = self.parents[0].get();
      Node<T>* wa = self.parents[1].get();
      Node<T>* ba = self.parents[2].get();
      CMapM<T> g(self.grad.data(), m, n);
      const bool shared = xa == wa;
      bool fresh = false;
      if (wants(xa)) {
        T* gx = target(xa, shared, fresh);
        assign_or_add(fresh, MapM<T>(gx, m, k), g * CMapM<T>(wa->value.data(), k, n).transpose());
      }
      if (wants(wa)) {
        T* gw = target(wa, shared, fresh);
        assign_or_add(fresh, MapM<T>(gw, k, n), CMapM<T>(xa->value.data(), m, k).transpose() * g);
      }
      if (wants(ba)) {
        T* gb = target(ba, ba == xa || ba == wa, fresh);
        assign_or_add(fresh, Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(gb, n), g.colwise().sum());
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> bmm(const Tensor<T>& a, const Tensor<T>& b, bool transpose_b) {
  if (a.ndim() != 3 || b.ndim() != 3 || a.dim(0) != b.dim(0) || a.dim(2) != b.dim(transpose_b ? 2 : 1)) {
    throw shape_error(transpose_b ? "bmm(transpose_b)" : "bmm", a.shape(), b.shape());
  }
  const int batch = a.dim(0);
  const int m = a.dim(1);
  const int k = a.dim(2);
  const int n = transpose_b ? b.dim(1) : b.dim(2);
  auto out = make_node<T>({batch, m, n}, {&a, &b});
  const std::size_t sa = static_cast<std::size_t>(m) * k;
  const std::size_t sb = static_cast<std::size_t>(k) * n;
  const std::size_t sc = static_cast<std::size_t>(m) * n;
  for (int i = 0; i < batch; ++i) {
    CMapM<T> am(a.data().data() + i * sa, m, k);
    MapM<T> cm(out->value.data() + i * sc, m, n);
    if (transpose_b) {
      cm.noalias() = am * CMapM<T>(b.data().data() + i * sb, n, k).transpose();
    } else {
      cm.noalias() = am * CMapM<T>(b.data().data() + i * sb, k, n);
    }
  }
  if (out->requires_grad) {
    out->backward = [=](Node<T>& self) {
      Node<T>* an = self.parents[0].get();
      Node<T>* bn = self.parents[1].get();
      for (int i = 0; i < batch; ++i) {
        CMapM<T> g(self.grad.data() + i * sc, m, n);
        if (transpose_b) {
          // c = a b^T with b [n, k]
          CMapM<T> bm(bn->value.data() + i * sb, n, k);
          if (wants(an)) {
            MapM<T>(an->grad_buffer() + i * sa, m, k).noalias() += g * bm;
          }
          if (wants(bn)) {
            MapM<T>(bn->grad_buffer() + i * sb, n, k).noalias() +=
                g.transpose() * CMapM<T>(an->value.data() + i * sa, m, k);
          }
        } else {
          CMapM<T> bm(bn->value.data() + i * sb, k, n);
          if (wants(an)) {
            MapM<T>(an->grad_buffer() + i * sa, m, k).noalias() += g * bm.transpose();
          }
          if (wants(bn)) {
            MapM<T>(bn->grad_buffer() + i * sb, k, n).noalias() +=
                CMapM<T>(an->value.data() + i * sa, m, k).transpose() * g;
          }
        }
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (!is_suffix(a.shape(), b.shape())) {
    throw shape_error("add", a.shape(), b.shape());
  }
  auto out = make_node<T>(a.shape(), {&a, &b});
  const std::size_t n = a.numel();
  const std::size_t period = b.numel();
  const T* av = a.data().data();
  const T* bv = b.data().data();
  T* o = out->value.data();
  for (std::size_t i = 0; i < n; i += period) {
    for (std::size_t j = 0; j < period; ++j) {
      o[i + j] = av[i + j] + bv[j];
    }
  }
  if (out->requires_grad) {
    out->backward = [n, period](Node<T>& self) {
      Node<T>* an = self.parents[0].get();
      Node<T>* bn = self.parents[1].get();
      const T* g = self.grad.data();
      const bool shared = an == bn;
      bool fresh = false;
      if (wants(an)) {
        T* ga = target(an, shared, fresh);
        if (fresh) {
          std::copy(g, g + n, ga);
        } else {
          for (std::size_t i = 0; i < n; ++i) {
            ga[i] += g[i];
          }
        }
      }
      if (wants(bn)) {
        T* gb = target(bn, shared, fresh);
        std::size_t start = 0;
        if (fresh) {
          std::copy(g, g + period, gb);
          start = period;
        }
        for (std::size_t i = start; i < n; i += period) {
          for (std::size_t j = 0; j < period; ++j) {
            gb[j] += g[i + j];
          }
        }
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  if (!is_suffix(a.shape(), b.shape())) {
    throw shape_error("mul", a.shape(), b.shape());
  }
  auto out = make_node<T>(a.shape(), {&a, &b});
  const std::size_t n = a.numel();
  const std::size_t period = b.numel();
  for (std::size_t i = 0; i < n; ++i) {
    out->value[i] = a.data()[i] * b.data()[i % period];
  }
  if (out->requires_grad) {
    out->backward = [n, period](Node<T>& self) {
      Node<T>* an = self.parents[0].get();
      Node<T>* bn = self.parents[1].get();
      const T* g = self.grad.data();
      if (wants(an)) {
        T* ga = an->grad_buffer();
        for (std::size_t i = 0; i < n; ++i) {
          ga[i] += g[i] * bn->value[i % period];
        }
      }
      if (wants(bn)) {
        T* gb = bn->grad_buffer();
        for (std::size_t i = 0; i < n; ++i) {
          gb[i % period] += g[i] * an->value[i];
        }
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  auto out = make_node<T>(a.shape(), {&a});
  for (std::size_t i = 0; i < a.numel(); ++i) {
    out->value[i] = a.data()[i] * factor;
  }
  if (out->requires_grad) {
    out->backward = [factor](Node<T>& self) {
      T* ga = self.parents[0]->grad_buffer();
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        ga[i] += self.grad[i] * factor;
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a, int axis0, int axis1) {
  const int nd = a.ndim();
  if (axis0 < 0) {
    axis0 += nd;
  }
  if (axis1 < 0) {
    axis1 += nd;
  }
  if (axis0 < 0 || axis1 < 0 || axis0 >= nd || axis1 >= nd) {
    throw shape_error("transpose", a.shape(), {axis0, axis1});
  }
  Shape out_shape = a.shape();
  std::swap(out_shape[static_cast<std::size_t>(axis0)], out_shape[static_cast<std::size_t>(axis1)]);
  // Source stride for every output axis.
  std::vector<std::size_t> in_stride(static_cast<std::size_t>(nd));
  std::size_t s = 1;
  for (int d = nd - 1; d >= 0; --d) {
    in_stride[static_cast<std::size_t>(d)] = s;
    s *= static_cast<std::size_t>(a.shape()[static_cast<std::size_t>(d)]);
  }
  std::swap(in_stride[static_cast<std::size_t>(axis0)], in_stride[static_cast<std::size_t>(axis1)]);
  // map[i] = source offset of output element i
  const std::size_t total = a.numel();
  auto map = std::make_shared<std::vector<std::size_t>>(total);
  std::vector<int> idx(static_cast<std::size_t>(nd), 0);
  std::size_t src = 0;
  for (std::size_t i = 0; i < total; ++i) {
    (*map)[i] = src;
    for (int d = nd - 1; d >= 0; --d) {
      const auto du = static_cast<std::size_t>(d);
      src += in_stride[du];
      if (++idx[du] < out_shape[du]) {
        break;
      }
      src -= in_stride[du] * static_cast<std::size_t>(out_shape[du]);
      idx[du] = 0;
    }
  }
  auto out = make_node<T>(out_shape, {&a});
  for (std::size_t i = 0; i < total; ++i) {
    out->value[i] = a.data()[(*map)[i]];
  }
  if (out->requires_grad) {
    out->backward = [map](Node<T>& self) {
      T* ga = self.parents[0]->grad_buffer();
      for (std::size_t i = 0; i < map->size(); ++i) {
        ga[(*map)[i]] += self.grad[i];
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, const Shape& shape) {
  if (numel(shape) != a.numel()) {
    throw shape_error("reshape", a.shape(), shape);
  }
  auto out = make_node<T>(shape, {&a});
  std::copy(a.data().begin(), a.data().end(), out->value.begin());
  if (out->requires_grad) {
    out->backward = [](Node<T>& self) {
      bool fresh = false;
      T* ga = self.parents[0]->grad_target(fresh);
      if (fresh) {
        std::copy(self.grad.begin(), self.grad.end(), ga);
        return;
      }
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        ga[i] += self.grad[i];
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> concat_last(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) {
    throw shape_error("concat_last", {}, {});
  }
  Shape lead = parts[0].shape();
  lead.pop_back();
  std::vector<int> widths;
  int total_width = 0;
  bool any_grad = false;
  for (const auto& p : parts) {
    Shape pl = p.shape();
    pl.pop_back();
    if (pl != lead) {
      throw shape_error("concat_last", parts[0].shape(), p.shape());
    }
    widths.push_back(p.dim(-1));
    total_width += p.dim(-1);
    any_grad = any_grad || p.requires_grad();
  }
  Shape out_shape = lead;
  out_shape.push_back(total_width);
  auto out = std::make_shared<Node<T>>();
  out->shape = out_shape;
  out->value.resize(numel(out_shape));
  const std::size_t rows = numel(lead);
  int offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const int w = widths[p];
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(parts[p].data().data() + r * static_cast<std::size_t>(w), w,
                  out->value.data() + r * static_cast<std::size_t>(total_width) + offset);
    }
    offset += w;
  }
  if (any_grad && grad_enabled()) {
    out->requires_grad = true;
    for (const auto& p : parts) {
      out->parents.push_back(p.shared());
    }
    out->backward = [rows, widths, total_width](Node<T>& self) {
      int off = 0;
      for (std::size_t p = 0; p < self.parents.size(); ++p) {
        const int w = widths[p];
        if (wants(self.parents[p].get())) {
          T* gp = self.parents[p]->grad_buffer();
          for (std::size_t r = 0; r < rows; ++r) {
            for (int j = 0; j < w; ++j) {
              gp[r * static_cast<std::size_t>(w) + j] += self.grad[r * static_cast<std::size_t>(total_width) + off + j];
            }
          }
        }
        off += w;
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> softmax_last(const Tensor<T>& a) {
  const int w = a.dim(-1);
  const std::size_t rows = a.numel() / static_cast<std::size_t>(w);
  auto out = make_node<T>(a.shape(), {&a});
  for (std::size_t r = 0; r < rows; ++r) {
    const T* x = a.data().data() + r * w;
    T* y = out->value.data() + r * w;
    const T mx = *std::max_element(x, x + w);
    T s = 0;
    for (int j = 0; j < w; ++j) {
      y[j] = std::exp(x[j] - mx);
      s += y[j];
    }
    const T inv = T(1) / s;
    for (int j = 0; j < w; ++j) {
      y[j] *= inv;
    }
  }
  if (out->requires_grad) {
    out->backward = [rows, w](Node<T>& self) {
      T* ga = self.parents[0]->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        const T* y = self.value.data() + r * w;
        const T* g = self.grad.data() + r * w;
        T dot = 0;
        for (int j = 0; j < w; ++j) {
          dot += g[j] * y[j];
        }
        for (int j = 0; j < w; ++j) {
          ga[r * w + j] += y[j] * (g[j] - dot);
        }
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> layernorm_last(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  const int w = x.dim(-1);
  if (gamma.shape() != Shape{w} || beta.shape() != Shape{w}) {
    throw shape_error("layernorm_last", x.shape(), gamma.shape());
  }
  const std::size_t rows = x.numel() / static_cast<std::size_t>(w);
  auto out = make_node<T>(x.shape(), {&x, &gamma, &beta});
  const bool record = out->requires_grad;
  auto xhat = std::make_shared<std::vector<T>>(record ? x.numel() : 0);
  auto inv_std = std::make_shared<std::vector<T>>(record ? rows : 0);
  const T* g = gamma.data().data();
  const T* b = beta.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xi = x.data().data() + r * w;
    T mean = 0;
    for (int j = 0; j < w; ++j) {
      mean += xi[j];
    }
    mean /= static_cast<T>(w);
    T var = 0;
    for (int j = 0; j < w; ++j) {
      const T d = xi[j] - mean;
      var += d * d;
    }
    var /= static_cast<T>(w);
    const T is = T(1) / std::sqrt(var + eps);
    T* y = out->value.data() + r * w;
    for (int j = 0; j < w; ++j) {
      const T h = (xi[j] - mean) * is;
      y[j] = h * g[j] + b[j];
      if (record) {
        (*xhat)[r * w + j] = h;
      }
    }
    if (record) {
      (*inv_std)[r] = is;
    }
  }
  if (record) {
    out->backward = [rows, w, xhat, inv_std](Node<T>& self) {
      Node<T>* xn = self.parents[0].get();
      Node<T>* gn = self.parents[1].get();
      Node<T>* bn = self.parents[2].get();
      const T* gam = gn->value.data();
      // Only x is large enough for the uninitialized path to pay off.
      bool fresh_x = false;
      T* gx = wants(xn) ? target(xn, xn == gn || xn == bn, fresh_x) : nullptr;
      T* gg = wants(gn) ? gn->grad_buffer() : nullptr;
      T* gb = wants(bn) ? bn->grad_buffer() : nullptr;
      for (std::size_t r = 0; r < rows; ++r) {
        const T* dy = self.grad.data() + r * w;
        const T* h = xhat->data() + r * w;
        if (gg != nullptr || gb != nullptr) {
          for (int j = 0; j < w; ++j) {
            if (gg != nullptr) {
              gg[j] += dy[j] * h[j];
            }
            if (gb != nullptr) {
              gb[j] += dy[j];
            }
          }
        }
        if (gx != nullptr) {
          T mean_d = 0;
          T mean_dh = 0;
          for (int j = 0; j < w; ++j) {
            const T d = dy[j] * gam[j];
            mean_d += d;
            mean_dh += d * h[j];
          }
          mean_d /= static_cast<T>(w);
          mean_dh /= static_cast<T>(w);
          const T is = (*inv_std)[r];
          T* gxr = gx + r * w;
          if (fresh_x) {
            for (int j = 0; j < w; ++j) {
              gxr[j] = is * (dy[j] * gam[j] - mean_d - h[j] * mean_dh);
            }
          } else {
            for (int j = 0; j < w; ++j) {
              gxr[j] += is * (dy[j] * gam[j] - mean_d - h[j] * mean_dh);
            }
          }
        }
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> embedding(const Tensor<T>& table, std::span<const int> ids, const Shape& prefix_shape) {
  if (table.ndim() != 2 || numel(prefix_shape) != ids.size()) {
    throw shape_error("embedding", table.shape(), prefix_shape);
  }
  const int rows = table.dim(0);
  const int d = table.dim(1);
  for (int id : ids) {
    if (id < 0 || id >= rows) {
      throw Error(ErrorCategory::kModel, "IndexOutOfRange",
                  "embedding index " + std::to_string(id) + " outside table of " + std::to_string(rows) + " rows");
    }
  }
  Shape out_shape = prefix_shape;
  out_shape.push_back(d);
  auto out = make_node<T>(out_shape, {&table});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(table.data().data() + static_cast<std::size_t>(ids[i]) * d, d, out->value.data() + i * d);
  }
  if (out->requires_grad) {
    out->backward = [index = std::vector<int>(ids.begin(), ids.end()), d](Node<T>& self) {
      T* gt = self.parents[0]->grad_buffer();
      for (std::size_t i = 0; i < index.size(); ++i) {
        T* row = gt + static_cast<std::size_t>(index[i]) * d;
        const T* g = self.grad.data() + i * d;
        for (int j = 0; j < d; ++j) {
          row[j] += g[j];
        }
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  auto out = make_node<T>(a.shape(), {&a});
  for (std::size_t i = 0; i < a.numel(); ++i) {
    out->value[i] = a.data()[i] > T(0) ? a.data()[i] : T(0);
  }
  if (out->requires_grad) {
    out->backward = [](Node<T>& self) {
      bool fresh = false;
      T* __restrict ga = self.parents[0]->grad_target(fresh);
      const T* __restrict y = self.value.data();
      const T* __restrict g = self.grad.data();
      const std::size_t n = self.grad.size();
      if (fresh) {
        for (std::size_t i = 0; i < n; ++i) {
          ga[i] = y[i] > T(0) ? g[i] : T(0);
        }
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          ga[i] += y[i] > T(0) ? g[i] : T(0);
        }
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> masked_fill(const Tensor<T>& a, std::span<const std::uint8_t> mask, const Shape& mask_shape) {
  if (!is_suffix(a.shape(), mask_shape) || mask.size() != numel(mask_shape)) {
    throw shape_error("masked_fill", a.shape(), mask_shape);
  }
  const std::size_t period = mask.size();
  auto out = make_node<T>(a.shape(), {&a});
  const T sentinel = static_cast<T>(kMaskSentinel);
  for (std::size_t i = 0; i < a.numel(); ++i) {
    out->value[i] = mask[i % period] ? sentinel : a.data()[i];
  }
  if (out->requires_grad) {
    out->backward = [m = std::vector<std::uint8_t>(mask.begin(), mask.end())](Node<T>& self) {
      T* ga = self.parents[0]->grad_buffer();
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        if (!m[i % m.size()]) {
          ga[i] += self.grad[i];
        }
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> targets, std::span<const T> weights) {
  if (logits.ndim() != 2 || targets.size() != static_cast<std::size_t>(logits.dim(0)) ||
      weights.size() != targets.size()) {
    throw shape_error("cross_entropy", logits.shape(), {static_cast<int>(targets.size())});
  }
  const int n = logits.dim(0);
  const int v = logits.dim(1);
  T wsum = 0;
  for (T w : weights) {
    wsum += w;
  }
  if (!(wsum > T(0))) {
    throw Error(ErrorCategory::kModel, "EmptyMask", "cross_entropy needs at least one weighted position");
  }
  auto out = make_node<T>({}, {&logits});
  const bool record = out->requires_grad;
  auto logp = std::make_shared<std::vector<T>>(record ? logits.numel() : 0);
  std::vector<T> row(static_cast<std::size_t>(v));
  T total = 0;
  for (int i = 0; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    if (weights[iu] == T(0)) {
      continue;
    }
    const int t = targets[iu];
    if (t < 0 || t >= v) {
      throw Error(ErrorCategory::kModel, "IndexOutOfRange", "target id " + std::to_string(t) + " outside " + std::to_string(v) + " classes");
    }
    std::span<const T> li(logits.data().data() + iu * v, static_cast<std::size_t>(v));
    std::span<T> lo = record ? std::span<T>(logp->data() + iu * v, static_cast<std::size_t>(v)) : std::span<T>(row);
    log_softmax_row<T>(li, lo);
    total -= weights[iu] * lo[static_cast<std::size_t>(t)];
  }
  out->value[0] = total / wsum;
  if (record) {
    out->backward = [n, v, wsum, logp, tg = std::vector<int>(targets.begin(), targets.end()),
                     wt = std::vector<T>(weights.begin(), weights.end())](Node<T>& self) {
      bool fresh = false;
      T* gl = self.parents[0]->grad_target(fresh);
      if (fresh) {
        std::fill_n(gl, static_cast<std::size_t>(n) * v, T(0));
      }
      const T g = self.grad[0] / wsum;
      for (int i = 0; i < n; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        if (wt[iu] == T(0)) {
          continue;
        }
        const T c = g * wt[iu];
        for (int j = 0; j < v; ++j) {
          gl[iu * v + j] += c * std::exp((*logp)[iu * v + j]);
        }
        gl[iu * v + static_cast<std::size_t>(tg[iu])] -= c;
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  auto out = make_node<T>({}, {&a});
  out->value[0] = std::accumulate(a.data().begin(), a.data().end(), T(0));
  if (out->requires_grad) {
    out->backward = [](Node<T>& self) {
      Node<T>* an = self.parents[0].get();
      T* ga = an->grad_buffer();
      for (std::size_t i = 0; i < an->value.size(); ++i) {
        ga[i] += self.grad[0];
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, int n_heads, bool causal) {
  if (q.ndim() != 3 || k.ndim() != 3 || v.ndim() != 3 || n_heads < 1 || q.dim(0) != k.dim(0) ||
      k.dim(0) != v.dim(0) || k.dim(1) != v.dim(1) || q.dim(2) != k.dim(2) || q.dim(2) % n_heads != 0 ||
      v.dim(2) % n_heads != 0 || (causal && q.dim(1) != k.dim(1))) {
    throw shape_error("attention", q.shape(), k.shape());
  }
  const int batch = q.dim(0);
  const int lq = q.dim(1);
  const int lk = k.dim(1);
  const int wk = q.dim(2);
  const int wv = v.dim(2);
  const int dk = wk / n_heads;
  const int dv = wv / n_heads;
  const T scale_factor = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dk)));
  auto out = make_node<T>({batch, lq, wv}, {&q, &k, &v});
  // Attention weights [B, h, Lq, Lk], kept for the backward pass.
  auto probs = std::make_shared<std::vector<T>>(static_cast<std::size_t>(batch) * n_heads * lq * lk);
  const std::size_t plane = static_cast<std::size_t>(lq) * lk;
  for (int b = 0; b < batch; ++b) {
    for (int h = 0; h < n_heads; ++h) {
      CStridedM<T> qh(q.data().data() + static_cast<std::size_t>(b) * lq * wk + h * dk, lq, dk, Eigen::OuterStride<>(wk));
      CStridedM<T> kh(k.data().data() + static_cast<std::size_t>(b) * lk * wk + h * dk, lk, dk, Eigen::OuterStride<>(wk));
      CStridedM<T> vh(v.data().data() + static_cast<std::size_t>(b) * lk * wv + h * dv, lk, dv, Eigen::OuterStride<>(wv));
      T* p = probs->data() + (static_cast<std::size_t>(b) * n_heads + h) * plane;
      MapM<T> pm(p, lq, lk);
      pm.noalias() = qh * kh.transpose();
      for (int i = 0; i < lq; ++i) {
        T* row = p + static_cast<std::size_t>(i) * lk;
        const int visible = causal ? i + 1 : lk;
        T mx = row[0] * scale_factor;
        for (int j = 0; j < visible; ++j) {
          row[j] *= scale_factor;
          mx = std::max(mx, row[j]);
        }
        T total = 0;
        for (int j = 0; j < visible; ++j) {
          row[j] = std::exp(row[j] - mx);
          total += row[j];
        }
        const T inv = T(1) / total;
        for (int j = 0; j < visible; ++j) {
          row[j] *= inv;
        }
        for (int j = visible; j < lk; ++j) {
          row[j] = T(0);
        }
      }
      StridedM<T>(out->value.data() + static_cast<std::size_t>(b) * lq * wv + h * dv, lq, dv, Eigen::OuterStride<>(wv))
          .noalias() = pm * vh;
    }
  }
  if (out->requires_grad) {
    out->backward = [=](Node<T>& self) {
      Node<T>* qn = self.parents[0].get();
      Node<T>* kn = self.parents[1].get();
      Node<T>* vn = self.parents[2].get();
      // Heads write disjoint column blocks, so one fresh flag covers all.
      bool fresh_q = false;
      bool fresh_k = false;
      bool fresh_v = false;
      T* gq = wants(qn) ? target(qn, qn == kn || qn == vn, fresh_q) : nullptr;
      T* gk = wants(kn) ? target(kn, kn == qn || kn == vn, fresh_k) : nullptr;
      T* gv = wants(vn) ? target(vn, vn == qn || vn == kn, fresh_v) : nullptr;
      Mat<T> dp(lq, lk);
      for (int b = 0; b < batch; ++b) {
        for (int h = 0; h < n_heads; ++h) {
          const std::size_t qoff = static_cast<std::size_t>(b) * lq * wk + h * dk;
          const std::size_t koff = static_cast<std::size_t>(b) * lk * wk + h * dk;
          const std::size_t voff = static_cast<std::size_t>(b) * lk * wv + h * dv;
          const std::size_t ooff = static_cast<std::size_t>(b) * lq * wv + h * dv;
          CMapM<T> pm(probs->data() + (static_cast<std::size_t>(b) * n_heads + h) * plane, lq, lk);
          CStridedM<T> go(self.grad.data() + ooff, lq, dv, Eigen::OuterStride<>(wv));
          if (wants(vn)) {
            assign_or_add(fresh_v, StridedM<T>(gv + voff, lk, dv, Eigen::OuterStride<>(wv)), pm.transpose() * go);
          }
          if (!wants(qn) && !wants(kn)) {
            continue;
          }
          dp.noalias() = go * CStridedM<T>(vn->value.data() + voff, lk, dv, Eigen::OuterStride<>(wv)).transpose();
          // Softmax backward, then the 1/sqrt(dk) scale.
          for (int i = 0; i < lq; ++i) {
            T dot = 0;
            for (int j = 0; j < lk; ++j) {
              dot += dp(i, j) * pm(i, j);
            }
            for (int j = 0; j < lk; ++j) {
              dp(i, j) = pm(i, j) * (dp(i, j) - dot) * scale_factor;
            }
          }
          if (wants(qn)) {
            assign_or_add(fresh_q, StridedM<T>(gq + qoff, lq, dk, Eigen::OuterStride<>(wk)),
                          dp * CStridedM<T>(kn->value.data() + koff, lk, dk, Eigen::OuterStride<>(wk)));
          }
          if (wants(kn)) {
            assign_or_add(fresh_k, StridedM<T>(gk + koff, lk, dk, Eigen::OuterStride<>(wk)),
                          dp.transpose() * CStridedM<T>(qn->value.data() + qoff, lq, dk, Eigen::OuterStride<>(wk)));
          }
        }
      }
    };
  }
  return Tensor<T>(out);
}

std::vector<std::uint8_t> causal_mask(int length) {
  std::vector<std::uint8_t> m(static_cast<std::size_t>(length) * length, 0);
  for (int i = 0; i < length; ++i) {
    for (int j = i + 1; j < length; ++j) {
      m[static_cast<std::size_t>(i) * length + j] = 1;
    }
  }
  return m;
}

#define MGFORGE_INSTANTIATE(T)                                                                          \
  template void log_softmax_row<T>(std::span<const T>, std::span<T>);                                    \
  template Tensor<T> matmul<T>(const Tensor<T>&, const Tensor<T>&);                                      \
  template Tensor<T> linear<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                    \
  template Tensor<T> attention<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, bool);      \
  template Tensor<T> bmm<T>(const Tensor<T>&, const Tensor<T>&, bool);                                   \
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                                         \
  template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                                         \
  template Tensor<T> scale<T>(const Tensor<T>&, T);                                                      \
  template Tensor<T> transpose<T>(const Tensor<T>&, int, int);                                           \
  template Tensor<T> reshape<T>(const Tensor<T>&, const Shape&);                                         \
  template Tensor<T> concat_last<T>(const std::vector<Tensor<T>>&);                                      \
  template Tensor<T> softmax_last<T>(const Tensor<T>&);                                                  \
  template Tensor<T> layernorm_last<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);         \
  template Tensor<T> embedding<T>(const Tensor<T>&, std::span<const int>, const Shape&);                 \
  template Tensor<T> relu<T>(const Tensor<T>&);                                                          \
  template Tensor<T> masked_fill<T>(const Tensor<T>&, std::span<const std::uint8_t>, const Shape&);      \
  template Tensor<T> cross_entropy<T>(const Tensor<T>&, std::span<const int>, std::span<const T>);       \
  template Tensor<T> sum<T>(const Tensor<T>&);

MGFORGE_INSTANTIATE(float)
MGFORGE_INSTANTIATE(double)

#undef MGFORGE_INSTANTIATE

}  // namespace mgforge::tensor
