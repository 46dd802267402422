// SPDX-License-Identifier: Apache-2.0
#include "vstg/numcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vstg/error.hpp"

namespace vstg {
namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

void require_rank2(const char* op, const Tensor& a) {
  if (a.rank() != 2) throw ShapeError(std::string(op) + ": expected rank-2 tensor, got " + shape_str(a.shape()));
}

// c += a @ b
void gemm_nn(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c += a @ b^T ; a is m x n, b is k x n, c is m x k
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t m = a.rows(), n = a.cols(), k = b.rows();
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = pa + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = pb + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
      pc[i * k + p] += acc;
    }
  }
}

// c += a^T @ b ; a is m x k, b is m x n, c is k x n
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* brow = pb + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      double* crow = pc + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

struct AxisLayout {
  std::size_t outer, len, inner;
};

AxisLayout axis_layout(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw ShapeError("softmax axis " + std::to_string(axis) + " out of range for " + shape_str(shape));
  }
  AxisLayout l{1, shape[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) l.outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) l.inner *= shape[i];
  return l;
}

Tensor softmax_axis(const Tensor& x, std::size_t axis) {
  const AxisLayout l = axis_layout(x.shape(), axis);
  if (l.len == 0) throw ShapeError("softmax over empty axis");
  Tensor y(x.shape());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t in = 0; in < l.inner; ++in) {
      auto at = [&](std::size_t j) { return (o * l.len + j) * l.inner + in; };
      double mx = x[at(0)];
      for (std::size_t j = 1; j < l.len; ++j) mx = std::max(mx, x[at(j)]);
      double total = 0.0;
      for (std::size_t j = 0; j < l.len; ++j) {
        const double e = std::exp(x[at(j)] - mx);
        y[at(j)] = e;
        total += e;
      }
      for (std::size_t j = 0; j < l.len; ++j) y[at(j)] /= total;
    }
  }
  return y;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2("matmul", a);
  require_rank2("matmul", b);
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a.shape()) + " @ " +
                     shape_str(b.shape()));
  }
  Tensor c({a.rows(), b.cols()});
  gemm_nn(a, b, c);
  return c;
}

Tensor transpose(const Tensor& a) {
  require_rank2("transpose", a);
  Tensor t({a.cols(), a.rows()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Tensor softmax(const Tensor& x) { return softmax_axis(x, x.rank() ? x.rank() - 1 : 0); }

Var matmul(const Var& a, const Var& b) {
  return Var::make(matmul(a.value(), b.value()), {a, b}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    if (pa.requires_grad) gemm_nt(self.grad, pb.value, pa.grad_buffer());
    if (pb.requires_grad) gemm_tn(pa.value, self.grad, pb.grad_buffer());
  });
}

Var transpose(const Var& a) {
  return Var::make(transpose(a.value()), {a}, [](Node& self) {
    parent(self, 0).accumulate(transpose(self.grad));
  });
}

Var affine(const Var& x, const Var& w, const Var& b) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  if (bv.size() != wv.cols()) {
    throw ShapeError("affine: bias " + shape_str(bv.shape()) + " does not match weight " + shape_str(wv.shape()));
  }
  Tensor out = matmul(xv, wv);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bv[j];
  return Var::make(std::move(out), {x, w, b}, [](Node& self) {
    Node& px = parent(self, 0);
    Node& pw = parent(self, 1);
    Node& pb = parent(self, 2);
    if (px.requires_grad) gemm_nt(self.grad, pw.value, px.grad_buffer());
    if (pw.requires_grad) gemm_tn(px.value, self.grad, pw.grad_buffer());
    if (pb.requires_grad) {
      Tensor& gb = pb.grad_buffer();
      for (std::size_t i = 0; i < self.grad.rows(); ++i)
        for (std::size_t j = 0; j < self.grad.cols(); ++j) gb[j] += self.grad(i, j);
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape("add", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return Var::make(std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p)
      if (parent(self, p).requires_grad) parent(self, p).accumulate(self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape("sub", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return Var::make(std::move(out), {a, b}, [](Node& self) {
    if (parent(self, 0).requires_grad) parent(self, 0).accumulate(self.grad);
    if (parent(self, 1).requires_grad) {
      Tensor& g = parent(self, 1).grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape("mul", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return Var::make(std::move(out), {a, b}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    if (pa.requires_grad) {
      Tensor& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      Tensor& g = pb.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa.value[i];
    }
  });
}

Var add_row(const Var& a, const Var& row) {
  const Tensor& av = a.value();
  const Tensor& rv = row.value();
  if (rv.size() != av.cols()) {
    throw ShapeError("add_row: row " + shape_str(rv.shape()) + " does not broadcast over " + shape_str(av.shape()));
  }
  Tensor out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += rv[j];
  return Var::make(std::move(out), {a, row}, [](Node& self) {
    if (parent(self, 0).requires_grad) parent(self, 0).accumulate(self.grad);
    Node& pr = parent(self, 1);
    if (pr.requires_grad) {
      Tensor& g = pr.grad_buffer();
      for (std::size_t i = 0; i < self.grad.rows(); ++i)
        for (std::size_t j = 0; j < self.grad.cols(); ++j) g[j] += self.grad(i, j);
    }
  });
}

Var scale(const Var& a, double c) {
  Tensor out = a.value();
  for (auto& v : out.storage()) v *= c;
  return Var::make(std::move(out), {a}, [c](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += c * self.grad[i];
  });
}

Var add_scalar(const Var& a, double c) {
  Tensor out = a.value();
  for (auto& v : out.storage()) v += c;
  return Var::make(std::move(out), {a}, [](Node& self) { parent(self, 0).accumulate(self.grad); });
}

Var mul_scalar(const Var& a, const Var& s) {
  if (s.value().size() != 1) throw ShapeError("mul_scalar: scalar operand has shape " + shape_str(s.shape()));
  const double sv = s.value()[0];
  Tensor out = a.value();
  for (auto& v : out.storage()) v *= sv;
  return Var::make(std::move(out), {a, s}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& ps = parent(self, 1);
    if (pa.requires_grad) {
      Tensor& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * ps.value[0];
    }
    if (ps.requires_grad) {
      double acc = 0.0;
      for (std::size_t i = 0; i < self.grad.size(); ++i) acc += self.grad[i] * pa.value[i];
      ps.grad_buffer()[0] += acc;
    }
  });
}

Var sigmoid(const Var& a) {
  Tensor out = a.value();
  for (auto& v : out.storage()) v = 1.0 / (1.0 + std::exp(-v));
  return Var::make(std::move(out), {a}, [](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = self.value[i];
      g[i] += self.grad[i] * y * (1.0 - y);
    }
  });
}

Var tanh(const Var& a) {
  Tensor out = a.value();
  for (auto& v : out.storage()) v = std::tanh(v);
  return Var::make(std::move(out), {a}, [](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = self.value[i];
      g[i] += self.grad[i] * (1.0 - y * y);
    }
  });
}

Var relu(const Var& a) {
  Tensor out = a.value();
  for (auto& v : out.storage()) v = v > 0.0 ? v : 0.0;
  return Var::make(std::move(out), {a}, [](Node& self) {
    Node& pa = parent(self, 0);
    Tensor& g = pa.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (pa.value[i] > 0.0) g[i] += self.grad[i];
  });
}

Var softmax(const Var& x, std::size_t axis) {
  return Var::make(softmax_axis(x.value(), axis), {x}, [axis](Node& self) {
    const AxisLayout l = axis_layout(self.value.shape(), axis);
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t o = 0; o < l.outer; ++o) {
      for (std::size_t in = 0; in < l.inner; ++in) {
        auto at = [&](std::size_t j) { return (o * l.len + j) * l.inner + in; };
        double dot = 0.0;
        for (std::size_t j = 0; j < l.len; ++j) dot += self.grad[at(j)] * self.value[at(j)];
        for (std::size_t j = 0; j < l.len; ++j) g[at(j)] += self.value[at(j)] * (self.grad[at(j)] - dot);
      }
    }
  });
}

Var log_softmax(const Var& x) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.rows(); ++i) {
    const auto row = xv.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double v : row) total += std::exp(v - mx);
    const double lse = mx + std::log(total);
    for (std::size_t j = 0; j < row.size(); ++j) out(i, j) = row[j] - lse;
  }
  return Var::make(std::move(out), {x}, [](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < self.value.rows(); ++i) {
      double gsum = 0.0;
      for (std::size_t j = 0; j < self.value.cols(); ++j) gsum += self.grad(i, j);
      for (std::size_t j = 0; j < self.value.cols(); ++j)
        g(i, j) += self.grad(i, j) - std::exp(self.value(i, j)) * gsum;
    }
  });
}

Var layernorm(const Var& x, const Var& gain, const Var& bias, double eps) {
  const Tensor& xv = x.value();
  const std::size_t d = xv.cols();
  if (d == 0) throw ShapeError("layernorm over empty feature axis");
  if (gain.value().size() != d || bias.value().size() != d) {
    throw ShapeError("layernorm: gain/bias " + shape_str(gain.shape()) + "/" + shape_str(bias.shape()) +
                     " do not match width " + std::to_string(d));
  }
  const std::size_t n = xv.rows();
  Tensor xhat(xv.shape());
  std::vector<double> inv_std(n);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = xv.row(i);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat(i, j) = (row[j] - mean) * inv_std[i];
      out(i, j) = gain.value()[j] * xhat(i, j) + bias.value()[j];
    }
  }
  return Var::make(std::move(out), {x, gain, bias},
                   [xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
    Node& px = parent(self, 0);
    Node& pg = parent(self, 1);
    Node& pb = parent(self, 2);
    const std::size_t rows = self.value.rows();
    const std::size_t d = self.value.cols();
    if (pg.requires_grad || pb.requires_grad) {
      Tensor& gg = pg.grad_buffer();
      Tensor& gb = pb.grad_buffer();
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          gg[j] += self.grad(i, j) * xhat(i, j);
          gb[j] += self.grad(i, j);
        }
    }
    if (px.requires_grad) {
      Tensor& gx = px.grad_buffer();
      std::vector<double> dxhat(d);
      for (std::size_t i = 0; i < rows; ++i) {
        double mean_d = 0.0, mean_dx = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          dxhat[j] = self.grad(i, j) * pg.value[j];
          mean_d += dxhat[j];
          mean_dx += dxhat[j] * xhat(i, j);
        }
        mean_d /= static_cast<double>(d);
        mean_dx /= static_cast<double>(d);
        for (std::size_t j = 0; j < d; ++j)
          gx(i, j) += inv_std[i] * (dxhat[j] - mean_d - xhat(i, j) * mean_dx);
      }
    }
  });
}

Var mean_rows(const Var& x) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows();
  if (n == 0) throw ShapeError("mean_rows over zero rows");
  Tensor out({1, xv.cols()});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < xv.cols(); ++j) out[j] += xv(i, j);
  for (auto& v : out.storage()) v /= static_cast<double>(n);
  return Var::make(std::move(out), {x}, [](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    const double inv = 1.0 / static_cast<double>(g.rows());
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) += self.grad[j] * inv;
  });
}

Var sum(const Var& x) {
  double total = 0.0;
  for (double v : x.value().storage()) total += v;
  return Var::make(Tensor({1, 1}, total), {x}, [](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (auto& v : g.storage()) v += self.grad[0];
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols of zero tensors");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols: row counts differ, " + shape_str(parts[0].shape()) + " vs " + shape_str(p.shape()));
    cols += p.cols();
  }
  Tensor out({rows, cols});
  std::size_t off = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < p.cols(); ++j) out(i, off + j) = p.value()(i, j);
    off += p.cols();
  }
  return Var::make(std::move(out), std::vector<Var>(parts.begin(), parts.end()), [](Node& self) {
    std::size_t off = 0;
    for (auto& pp : self.parents) {
      const std::size_t c = pp->value.cols();
      if (pp->requires_grad) {
        Tensor& g = pp->grad_buffer();
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < c; ++j) g(i, j) += self.grad(i, off + j);
      }
      off += c;
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows of zero tensors");
  const std::size_t cols = parts[0].cols();
  std::vector<double> data;
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows: widths differ, " + shape_str(parts[0].shape()) + " vs " + shape_str(p.shape()));
    rows += p.rows();
    data.insert(data.end(), p.value().storage().begin(), p.value().storage().end());
  }
  return Var::make(Tensor({rows, cols}, std::move(data)), std::vector<Var>(parts.begin(), parts.end()), [](Node& self) {
    std::size_t off = 0;
    for (auto& pp : self.parents) {
      const std::size_t n = pp->value.size();
      if (pp->requires_grad) {
        Tensor& g = pp->grad_buffer();
        for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[off + i];
      }
      off += n;
    }
  });
}

Var slice_cols(const Var& x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  if (begin > end || end > xv.cols()) {
    throw ShapeError("slice_cols [" + std::to_string(begin) + ", " + std::to_string(end) + ") out of range for " + shape_str(xv.shape()));
  }
  Tensor out({xv.rows(), end - begin});
  for (std::size_t i = 0; i < xv.rows(); ++i)
    for (std::size_t j = begin; j < end; ++j) out(i, j - begin) = xv(i, j);
  return Var::make(std::move(out), {x}, [begin](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < self.grad.rows(); ++i)
      for (std::size_t j = 0; j < self.grad.cols(); ++j) g(i, begin + j) += self.grad(i, j);
  });
}

Var slice_rows(const Var& x, std::size_t begin, std::size_t end) {
  return Var::make(x.value().slice_rows(begin, end), {x}, [begin](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    const std::size_t off = begin * g.cols();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[off + i] += self.grad[i];
  });
}

Var broadcast_rows(const Var& row, std::size_t n) {
  const Tensor& rv = row.value();
  if (rv.rows() != 1) throw ShapeError("broadcast_rows expects a row vector, got " + shape_str(rv.shape()));
  Tensor out({n, rv.cols()});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < rv.cols(); ++j) out(i, j) = rv[j];
  return Var::make(std::move(out), {row}, [](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < self.grad.rows(); ++i)
      for (std::size_t j = 0; j < self.grad.cols(); ++j) g[j] += self.grad(i, j);
  });
}

Var select_row(const Var& x, std::size_t r) {
  if (r >= x.rows()) {
    throw IndexError("row " + std::to_string(r) + " out of range for " + shape_str(x.shape()));
  }
  return Var::make(x.value().row_copy(r), {x}, [r](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t j = 0; j < self.grad.size(); ++j) g(r, j) += self.grad[j];
  });
}

std::vector<std::size_t> topk_indices(std::span<const double> row, std::size_t k) {
  std::vector<std::size_t> idx(row.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, row.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) { return row[a] > row[b] || (row[a] == row[b] && a < b); });
  idx.resize(k);
  return idx;
}

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i)
    if (row[i] > row[best]) best = i;
  return best;
}

Var topk_softmax(const Var& logits, std::size_t k) {
  const Tensor& lv = logits.value();
  const std::size_t n = lv.size();
  if (k < 1 || k > n) {
    throw ConfigError("top_k " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<char> selected(n, 0);
  for (std::size_t i : topk_indices(lv.data(), k)) selected[i] = 1;
  // Same max-subtraction and index-order summation as softmax(), so k == N
  // reproduces it bit-for-bit.
  double mx = lv[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, lv[i]);
  Tensor out(lv.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!selected[i]) continue;
    out[i] = std::exp(lv[i] - mx);
    total += out[i];
  }
  for (std::size_t i = 0; i < n; ++i)
    if (selected[i]) out[i] /= total;
  return Var::make(std::move(out), {logits}, [selected = std::move(selected)](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    double dot = 0.0;
    for (std::size_t i = 0; i < self.value.size(); ++i)
      if (selected[i]) dot += self.grad[i] * self.value[i];
    for (std::size_t i = 0; i < self.value.size(); ++i)
      if (selected[i]) g[i] += self.value[i] * (self.grad[i] - dot);
  });
}

Var dropout(const Var& x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw ConfigError("dropout rate must be < 1");
  Tensor mask(x.shape());
  const double keep = 1.0 / (1.0 - rate);
  for (auto& m : mask.storage()) m = rng.uniform() < rate ? 0.0 : keep;
  return mul(x, Var::constant(std::move(mask)));
}

}  // namespace vstg
