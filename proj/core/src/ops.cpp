#include "ccsp/ops.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ccsp/dsp.hpp"
#include "ccsp/error.hpp"

namespace ccsp::ad {

namespace {

void expect_rank(const Tensor& t, std::size_t rank, const char* op, const char* what) {
  if (t.rank() != rank) {
    throw_invalid(fmt::format("{}: {} must have rank {}, got {}", op, what, rank, shape_string(t.shape())));
  }
}

}  // namespace

Var conv_temporal(const Var& x, const Var& kernels, const Var& bias) {
  const auto& xv = x.value();
  const auto& kv = kernels.value();
  expect_rank(xv, 4, "conv_temporal", "input");
  expect_rank(kv, 2, "conv_temporal", "kernels");
  const std::size_t n = xv.dim(0), kin = xv.dim(1), c = xv.dim(2), t = xv.dim(3);
  const std::size_t kout = kv.dim(0), klen = kv.dim(1);
  if (kin != 1 && kin != kout) {
    throw_invalid(fmt::format("conv_temporal: input has {} maps for {} kernels", kin, kout));
  }
  if (klen > t) throw_invalid(fmt::format("conv_temporal: kernel length {} exceeds {} samples", klen, t));
  if (bias.defined() && bias.value().size() != kout) {
    throw_invalid(fmt::format("conv_temporal: bias has {} entries for {} kernels", bias.value().size(), kout));
  }
  const auto pad = static_cast<long>((klen - 1) / 2);
  const auto T = static_cast<long>(t);

  // Valid output range for kernel tap j: t + j - pad in [0, T).
  const auto tap_range = [pad, T](std::size_t j) {
    const long off = static_cast<long>(j) - pad;
    return std::pair<long, long>{std::max(0L, -off), std::min(T, T - off)};
  };

  Tensor out({n, kout, c, t});
  for (std::size_t in = 0; in < n; ++in) {
    for (std::size_t k = 0; k < kout; ++k) {
      const std::size_t src = kin == 1 ? 0 : k;
      const double* w = kv.raw() + k * klen;
      const double b = bias.defined() ? bias.value()[k] : 0.0;
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double* xs = xv.raw() + ((in * kin + src) * c + ch) * t;
        double* ys = out.raw() + ((in * kout + k) * c + ch) * t;
        std::fill(ys, ys + t, b);
        for (std::size_t j = 0; j < klen; ++j) {
          const double wj = w[j];
          const long off = static_cast<long>(j) - pad;
          const auto [lo, hi] = tap_range(j);
          for (long s = lo; s < hi; ++s) ys[s] += wj * xs[s + off];
        }
      }
    }
  }

  return make_op("conv_temporal", std::move(out), {x, kernels, bias},
                 [n, kin, kout, c, t, klen, pad, tap_range](Node& self) {
                   const auto& gy = self.grad_buffer();
                   auto& xnode = *self.parents[0];
                   auto& knode = *self.parents[1];
                   Node* bnode = self.parents.size() > 2 && self.parents[2] ? self.parents[2].get() : nullptr;
                   const auto& xv = xnode.value;
                   const auto& kv = knode.value;
                   Tensor* gx = xnode.requires_grad ? &xnode.grad_buffer() : nullptr;
                   Tensor* gk = knode.requires_grad ? &knode.grad_buffer() : nullptr;
                   Tensor* gb = bnode && bnode->requires_grad ? &bnode->grad_buffer() : nullptr;
                   for (std::size_t in = 0; in < n; ++in) {
                     for (std::size_t k = 0; k < kout; ++k) {
                       const std::size_t src = kin == 1 ? 0 : k;
                       const double* w = kv.raw() + k * klen;
                       for (std::size_t ch = 0; ch < c; ++ch) {
                         const std::size_t xoff = ((in * kin + src) * c + ch) * t;
                         const double* gys = gy.raw() + ((in * kout + k) * c + ch) * t;
                         if (gb) {
                           double s = 0.0;
                           for (std::size_t i = 0; i < t; ++i) s += gys[i];
                           (*gb)[k] += s;
                         }
                         for (std::size_t j = 0; j < klen; ++j) {
                           const long off = static_cast<long>(j) - pad;
                           const auto [lo, hi] = tap_range(j);
                           if (gk) {
                             const double* xs = xv.raw() + xoff;
                             double s = 0.0;
                             for (long i = lo; i < hi; ++i) s += gys[i] * xs[i + off];
                             (*gk)[k * klen + j] += s;
                           }
                           if (gx) {
                             double* gxs = gx->raw() + xoff;
                             const double wj = w[j];
                             for (long i = lo; i < hi; ++i) gxs[i + off] += wj * gys[i];
                           }
                         }
                       }
                     }
                   }
                 });
}

BatchNormStats BatchNormStats::init(std::size_t features) {
  BatchNormStats s;
  s.mean = Tensor({features}, 0.0);
  s.var = Tensor({features}, 1.0);
  return s;
}

Var batch_norm(const Var& x, const Var& gamma, const Var& beta, BatchNormStats& stats, BnMode mode) {
  const auto& xv = x.value();
  if (xv.rank() != 2 && xv.rank() != 4) {
    throw_invalid(fmt::format("batch_norm: expected rank 2 or 4 input, got {}", shape_string(xv.shape())));
  }
  const std::size_t n = xv.dim(0), f = xv.dim(1);
  const std::size_t inner = xv.size() / (n * f);
  if (gamma.value().size() != f || beta.value().size() != f || stats.mean.size() != f || stats.var.size() != f) {
    throw_invalid(fmt::format("batch_norm: parameters do not match {} features", f));
  }
  if (mode == BnMode::train && n < 2) throw_invalid("batch_norm: train mode needs a batch of at least 2");

  const double count = static_cast<double>(n * inner);
  std::vector<double> mean(f), inv_std(f);
  if (mode == BnMode::train) {
    for (std::size_t j = 0; j < f; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double* p = xv.raw() + (i * f + j) * inner;
        for (std::size_t r = 0; r < inner; ++r) s += p[r];
      }
      const double mu = s / count;
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double* p = xv.raw() + (i * f + j) * inner;
        for (std::size_t r = 0; r < inner; ++r) ss += (p[r] - mu) * (p[r] - mu);
      }
      const double var = ss / count;
      mean[j] = mu;
      inv_std[j] = 1.0 / std::sqrt(var + stats.eps);
      stats.mean[j] = (1.0 - stats.momentum) * stats.mean[j] + stats.momentum * mu;
      stats.var[j] = (1.0 - stats.momentum) * stats.var[j] + stats.momentum * var * count / (count - 1.0);
    }
  } else {
    for (std::size_t j = 0; j < f; ++j) {
      mean[j] = stats.mean[j];
      inv_std[j] = 1.0 / std::sqrt(stats.var[j] + stats.eps);
    }
  }

  Tensor xhat(xv.shape());
  Tensor out(xv.shape());
  const auto& g = gamma.value();
  const auto& b = beta.value();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < f; ++j) {
      const std::size_t base = (i * f + j) * inner;
      for (std::size_t r = 0; r < inner; ++r) {
        const double h = (xv[base + r] - mean[j]) * inv_std[j];
        xhat[base + r] = h;
        out[base + r] = g[j] * h + b[j];
      }
    }
  }

  const bool train = mode == BnMode::train;
  return make_op("batch_norm", std::move(out), {x, gamma, beta},
                 [n, f, inner, count, train, inv_std = std::move(inv_std), xhat = std::move(xhat)](Node& self) {
                   const auto& gy = self.grad_buffer();
                   auto& xnode = *self.parents[0];
                   auto& gnode = *self.parents[1];
                   auto& bnode = *self.parents[2];
                   const auto& gv = gnode.value;
                   for (std::size_t j = 0; j < f; ++j) {
                     double sum_dy = 0.0, sum_dy_xhat = 0.0;
                     for (std::size_t i = 0; i < n; ++i) {
                       const std::size_t base = (i * f + j) * inner;
                       for (std::size_t r = 0; r < inner; ++r) {
                         sum_dy += gy[base + r];
                         sum_dy_xhat += gy[base + r] * xhat[base + r];
                       }
                     }
                     if (gnode.requires_grad) gnode.grad_buffer()[j] += sum_dy_xhat;
                     if (bnode.requires_grad) bnode.grad_buffer()[j] += sum_dy;
                     if (!xnode.requires_grad) continue;
                     auto& gx = xnode.grad_buffer();
                     const double k = gv[j] * inv_std[j];
                     for (std::size_t i = 0; i < n; ++i) {
                       const std::size_t base = (i * f + j) * inner;
                       for (std::size_t r = 0; r < inner; ++r) {
                         if (train) {
                           gx[base + r] += k * (gy[base + r] - sum_dy / count - xhat[base + r] * sum_dy_xhat / count);
                         } else {
                           gx[base + r] += k * gy[base + r];
                         }
                       }
                     }
                   }
                 });
}

Var dense(const Var& x, const Var& w, const Var& b) {
  const auto& xv = x.value();
  const auto& wv = w.value();
  expect_rank(xv, 2, "dense", "input");
  expect_rank(wv, 2, "dense", "weights");
  const std::size_t n = xv.dim(0), din = xv.dim(1), dout = wv.dim(1);
  if (wv.dim(0) != din) {
    throw_invalid(fmt::format("dense: input {} does not match weights {}", shape_string(xv.shape()),
                              shape_string(wv.shape())));
  }
  if (b.defined() && b.value().size() != dout) {
    throw_invalid(fmt::format("dense: bias has {} entries, expected {}", b.value().size(), dout));
  }
  Tensor out({n, dout});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t o = 0; o < dout; ++o) {
      double s = b.defined() ? b.value()[o] : 0.0;
      for (std::size_t d = 0; d < din; ++d) s += xv[i * din + d] * wv[d * dout + o];
      out[i * dout + o] = s;
    }
  }
  return make_op("dense", std::move(out), {x, w, b}, [n, din, dout](Node& self) {
    const auto& gy = self.grad_buffer();
    auto& xnode = *self.parents[0];
    auto& wnode = *self.parents[1];
    Node* bnode = self.parents[2].get();
    if (xnode.requires_grad) {
      auto& gx = xnode.grad_buffer();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < din; ++d) {
          double s = 0.0;
          for (std::size_t o = 0; o < dout; ++o) s += gy[i * dout + o] * wnode.value[d * dout + o];
          gx[i * din + d] += s;
        }
    }
    if (wnode.requires_grad) {
      auto& gw = wnode.grad_buffer();
      for (std::size_t d = 0; d < din; ++d)
        for (std::size_t o = 0; o < dout; ++o) {
          double s = 0.0;
          for (std::size_t i = 0; i < n; ++i) s += xnode.value[i * din + d] * gy[i * dout + o];
          gw[d * dout + o] += s;
        }
    }
    if (bnode && bnode->requires_grad) {
      auto& gb = bnode->grad_buffer();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t o = 0; o < dout; ++o) gb[o] += gy[i * dout + o];
    }
  });
}

Var softmax(const Var& x) {
  const auto& xv = x.value();
  if (xv.rank() == 0) throw_invalid("softmax: scalar input");
  const std::size_t d = xv.shape().back();
  const std::size_t rows = xv.size() / d;
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* p = xv.raw() + r * d;
    double* q = out.raw() + r * d;
    const double mx = *std::max_element(p, p + d);
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += (q[i] = std::exp(p[i] - mx));
    for (std::size_t i = 0; i < d; ++i) q[i] /= s;
  }
  Tensor probs = out;
  return make_op("softmax", std::move(out), {x}, [rows, d, probs = std::move(probs)](Node& self) {
    const auto& gy = self.grad_buffer();
    auto& gx = self.parents[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += gy[r * d + i] * probs[r * d + i];
      for (std::size_t i = 0; i < d; ++i) gx[r * d + i] += probs[r * d + i] * (gy[r * d + i] - dot);
    }
  });
}

Var log_variance(const Var& x) {
  const auto& xv = x.value();
  if (xv.rank() == 0) throw_invalid("log_variance: scalar input");
  const std::size_t t = xv.shape().back();
  if (t < 2) throw_invalid("log_variance: need at least 2 samples per row");
  const std::size_t rows = xv.size() / t;
  Shape out_shape(xv.shape().begin(), xv.shape().end() - 1);
  Tensor out(out_shape);
  std::vector<double> means(rows), vars(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* p = xv.raw() + r * t;
    double s = 0.0;
    for (std::size_t i = 0; i < t; ++i) s += p[i];
    const double mu = s / static_cast<double>(t);
    double ss = 0.0;
    for (std::size_t i = 0; i < t; ++i) ss += (p[i] - mu) * (p[i] - mu);
    const double var = ss / static_cast<double>(t);
    if (!(var > 0.0)) throw_numerical(fmt::format("log_variance: row {} has zero variance", r));
    means[r] = mu;
    vars[r] = var;
    out[r] = std::log(var);
  }
  return make_op("log_variance", std::move(out), {x},
                 [rows, t, means = std::move(means), vars = std::move(vars)](Node& self) {
                   const auto& gy = self.grad_buffer();
                   auto& xnode = *self.parents[0];
                   auto& gx = xnode.grad_buffer();
                   for (std::size_t r = 0; r < rows; ++r) {
                     const double k = 2.0 * gy[r] / (static_cast<double>(t) * vars[r]);
                     const double* p = xnode.value.raw() + r * t;
                     double* g = gx.raw() + r * t;
                     for (std::size_t i = 0; i < t; ++i) g[i] += k * (p[i] - means[r]);
                   }
                 });
}

Var spatial_project(const Var& x, std::span<const Matrix> filters) {
  const auto& xv = x.value();
  expect_rank(xv, 4, "spatial_project", "input");
  const std::size_t n = xv.dim(0), k = xv.dim(1), c = xv.dim(2), t = xv.dim(3);
  if (filters.size() != k) {
    throw_invalid(fmt::format("spatial_project: {} filters for {} feature maps", filters.size(), k));
  }
  const auto m = static_cast<std::size_t>(filters.front().cols());
  for (const auto& w : filters) {
    if (static_cast<std::size_t>(w.rows()) != c || static_cast<std::size_t>(w.cols()) != m) {
      throw_invalid(fmt::format("spatial_project: filter {}x{} does not match {} channels", w.rows(), w.cols(), c));
    }
  }
  using ConstMap = Eigen::Map<const RowMatrix>;
  using Map = Eigen::Map<RowMatrix>;
  const auto ci = static_cast<Eigen::Index>(c), ti = static_cast<Eigen::Index>(t),
             mi = static_cast<Eigen::Index>(m);
  Tensor out({n, k, m, t});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      ConstMap xs(xv.raw() + (i * k + j) * c * t, ci, ti);
      Map es(out.raw() + (i * k + j) * m * t, mi, ti);
      es.noalias() = filters[j].transpose() * xs;
    }
  }
  std::vector<Matrix> held(filters.begin(), filters.end());
  return make_op("spatial_project", std::move(out), {x},
                 [n, k, c, t, m, held = std::move(held)](Node& self) {
                   const auto& gy = self.grad_buffer();
                   auto& gx = self.parents[0]->grad_buffer();
                   const auto ci = static_cast<Eigen::Index>(c), ti = static_cast<Eigen::Index>(t),
                              mi = static_cast<Eigen::Index>(m);
                   for (std::size_t i = 0; i < n; ++i) {
                     for (std::size_t j = 0; j < k; ++j) {
                       Eigen::Map<const RowMatrix> ge(gy.raw() + (i * k + j) * m * t, mi, ti);
                       Eigen::Map<RowMatrix> gxs(gx.raw() + (i * k + j) * c * t, ci, ti);
                       gxs.noalias() += held[j] * ge;
                     }
                   }
                 });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return make_op("reshape", std::move(out), {x}, [](Node& self) {
    const auto& gy = self.grad_buffer();
    auto& gx = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
  });
}

Var add(const Var& a, const Var& b) {
  if (a.value().size() != b.value().size()) {
    throw_invalid(fmt::format("add: shapes {} and {} differ", shape_string(a.shape()), shape_string(b.shape())));
  }
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return make_op("add", std::move(out), {a, b}, [](Node& self) {
    const auto& gy = self.grad_buffer();
    for (auto& p : self.parents) {
      if (p->requires_grad) p->accumulate(gy);
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  for (auto& v : out.storage()) v *= s;
  return make_op("scale", std::move(out), {a}, [s](Node& self) {
    const auto& gy = self.grad_buffer();
    auto& gx = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += s * gy[i];
  });
}

namespace {
constexpr double kProbFloor = 1e-12;
}

Var binary_cross_entropy(const Var& p, const Tensor& target) {
  const auto& pv = p.value();
  if (pv.size() != target.size() || pv.rank() == 0) {
    throw_invalid(fmt::format("binary_cross_entropy: prediction {} vs target {}", shape_string(pv.shape()),
                              shape_string(target.shape())));
  }
  const double n = static_cast<double>(pv.dim(0));
  double loss = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double q = std::clamp(pv[i], kProbFloor, 1.0 - kProbFloor);
    loss -= target[i] * std::log(q) + (1.0 - target[i]) * std::log(1.0 - q);
  }
  return make_op("binary_cross_entropy", Tensor::scalar(loss / n), {p}, [n, target](Node& self) {
    const double gy = self.grad_buffer()[0];
    auto& pnode = *self.parents[0];
    auto& gp = pnode.grad_buffer();
    for (std::size_t i = 0; i < gp.size(); ++i) {
      const double q = std::clamp(pnode.value[i], kProbFloor, 1.0 - kProbFloor);
      gp[i] += gy * (-target[i] / q + (1.0 - target[i]) / (1.0 - q)) / n;
    }
  });
}

Var softmax_cross_entropy(const Var& logits, std::span<const int> labels) {
  const auto& lv = logits.value();
  expect_rank(lv, 2, "softmax_cross_entropy", "logits");
  const std::size_t n = lv.dim(0), d = lv.dim(1);
  if (labels.size() != n) throw_invalid("softmax_cross_entropy: label count mismatch");
  Tensor probs(lv.shape());
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* z = lv.raw() + i * d;
    const double mx = *std::max_element(z, z + d);
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += std::exp(z[j] - mx);
    const double log_norm = mx + std::log(s);
    for (std::size_t j = 0; j < d; ++j) probs[i * d + j] = std::exp(z[j] - log_norm);
    const auto y = static_cast<std::size_t>(labels[i]);
    if (y >= d) throw_invalid(fmt::format("softmax_cross_entropy: label {} out of range", labels[i]));
    loss += log_norm - z[y];
  }
  std::vector<int> held(labels.begin(), labels.end());
  return make_op("softmax_cross_entropy", Tensor::scalar(loss / static_cast<double>(n)), {logits},
                 [n, d, probs = std::move(probs), held = std::move(held)](Node& self) {
                   const double gy = self.grad_buffer()[0] / static_cast<double>(n);
                   auto& gx = self.parents[0]->grad_buffer();
                   for (std::size_t i = 0; i < n; ++i)
                     for (std::size_t j = 0; j < d; ++j) {
                       const double onehot = static_cast<std::size_t>(held[i]) == j ? 1.0 : 0.0;
                       gx[i * d + j] += gy * (probs[i * d + j] - onehot);
                     }
                 });
}

Var fisher_criterion(const Var& g, std::span<const int> labels) {
  const auto& gv = g.value();
  const std::size_t n = gv.size();
  if (labels.size() != n) throw_invalid("fisher_criterion: label count mismatch");
  double s[2] = {0.0, 0.0};
  double cnt[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw_invalid("fisher_criterion: labels must be 0 or 1");
    s[labels[i]] += gv[i];
    cnt[labels[i]] += 1.0;
  }
  if (cnt[0] == 0.0 || cnt[1] == 0.0) throw_invalid("fisher_criterion: both classes must be present");
  const double mu0 = s[0] / cnt[0], mu1 = s[1] / cnt[1];
  double ss[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = labels[i] == 0 ? mu0 : mu1;
    ss[labels[i]] += (gv[i] - mu) * (gv[i] - mu);
  }
  const double v0 = ss[0] / cnt[0], v1 = ss[1] / cnt[1];
  const double gap = mu0 - mu1;
  if (gap == 0.0) throw_numerical("fisher_criterion: class means coincide");
  const double j = (v0 + v1) / (gap * gap);
  std::vector<int> held(labels.begin(), labels.end());
  return make_op("fisher_criterion", Tensor::scalar(j), {g},
                 [n, mu0, mu1, v0, v1, gap, c0 = cnt[0], c1 = cnt[1], held = std::move(held)](Node& self) {
                   const double gy = self.grad_buffer()[0];
                   auto& gnode = *self.parents[0];
                   auto& gg = gnode.grad_buffer();
                   const double gap2 = gap * gap;
                   const double gap3 = gap2 * gap;
                   for (std::size_t i = 0; i < n; ++i) {
                     const double x = gnode.value[i];
                     double d = 0.0;
                     if (held[i] == 0) {
                       d = 2.0 * (x - mu0) / c0 / gap2 - 2.0 * (v0 + v1) / gap3 / c0;
                     } else {
                       d = 2.0 * (x - mu1) / c1 / gap2 + 2.0 * (v0 + v1) / gap3 / c1;
                     }
                     gg[i] += gy * d;
                   }
                 });
}

Var morlet_bank(const Var& params, int kernel_len, double fs) {
  const auto& pv = params.value();
  if (pv.rank() != 2 || pv.dim(1) != 3) {
    throw_invalid(fmt::format("morlet_bank: expected K x 3 parameters, got {}", shape_string(pv.shape())));
  }
  const std::size_t k = pv.dim(0);
  const auto len = static_cast<std::size_t>(kernel_len);
  Tensor out({k, len});
  for (std::size_t i = 0; i < k; ++i) {
    const auto w = dsp::build_morlet({pv[i * 3], pv[i * 3 + 1], pv[i * 3 + 2], kernel_len, fs});
    std::copy(w.begin(), w.end(), out.raw() + i * len);
  }
  return make_op("morlet_bank", std::move(out), {params}, [k, len, kernel_len, fs](Node& self) {
    const auto& gy = self.grad_buffer();
    auto& pnode = *self.parents[0];
    auto& gp = pnode.grad_buffer();
    for (std::size_t i = 0; i < k; ++i) {
      const dsp::MorletParams mp{pnode.value[i * 3], pnode.value[i * 3 + 1], pnode.value[i * 3 + 2], kernel_len, fs};
      const auto g = dsp::morlet_gradients(mp, std::span<const double>(gy.raw() + i * len, len));
      gp[i * 3] += g.df;
      gp[i * 3 + 1] += g.dh;
      gp[i * 3 + 2] += g.dc;
    }
  });
}

}  // namespace ccsp::ad
