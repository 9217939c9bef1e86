#include "agcrn/ops.hpp"

#include <cmath>
#include <cstdlib>

namespace agcrn::ops {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_str(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shapes differ: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

const char* unary_name(Unary k) {
  switch (k) {
    case Unary::relu: return "relu";
    case Unary::sigmoid: return "sigmoid";
    case Unary::tanh: return "tanh";
    case Unary::abs: return "abs";
  }
  return "?";
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  if (a.extent(1) != b.extent(0)) {
    throw ShapeError("matmul: inner extents differ: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  Tensor out({m, n});
  // i-k-j order keeps the b rows hot.
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = out.data() + i * n;
    const double* arow = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  out.require_finite("matmul");
  return out;
}

void matmul_vjp(const Tensor& a, const Tensor& b, const Tensor& gout, Tensor* ga, Tensor* gb) {
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  if (ga) {
    // ga += gout * b^T
    for (std::size_t i = 0; i < m; ++i) {
      const double* grow = gout.data() + i * n;
      double* garow = ga->data() + i * k;
      for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b.data() + p * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
        garow[p] += acc;
      }
    }
  }
  if (gb) {
    // gb += a^T * gout
    for (std::size_t i = 0; i < m; ++i) {
      const double* arow = a.data() + i * k;
      const double* grow = gout.data() + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = arow[p];
        if (av == 0.0) continue;
        double* gbrow = gb->data() + p * n;
        for (std::size_t j = 0; j < n; ++j) gbrow[j] += av * grow[j];
      }
    }
  }
}

Tensor transpose(const Tensor& x) {
  require_rank(x, 2, "transpose");
  const std::size_t m = x.extent(0), n = x.extent(1);
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(j, i) = x.at(i, j);
  return out;
}

Tensor apply_unary(const Tensor& x, Unary k) {
  Tensor out(x.shape());
  const std::size_t n = x.size();
  switch (k) {
    case Unary::relu:
      for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
      break;
    case Unary::sigmoid:
      for (std::size_t i = 0; i < n; ++i) out[i] = sigmoid_scalar(x[i]);
      break;
    case Unary::tanh:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(x[i]);
      break;
    case Unary::abs:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::fabs(x[i]);
      break;
  }
  out.require_finite(unary_name(k));
  return out;
}

void unary_vjp(const Tensor& x, const Tensor& y, Unary k, const Tensor& gout, Tensor* gx) {
  if (!gx) return;
  const std::size_t n = x.size();
  switch (k) {
    case Unary::relu:
      for (std::size_t i = 0; i < n; ++i) (*gx)[i] += x[i] > 0.0 ? gout[i] : 0.0;
      break;
    case Unary::sigmoid:
      for (std::size_t i = 0; i < n; ++i) (*gx)[i] += gout[i] * y[i] * (1.0 - y[i]);
      break;
    case Unary::tanh:
      for (std::size_t i = 0; i < n; ++i) (*gx)[i] += gout[i] * (1.0 - y[i] * y[i]);
      break;
    case Unary::abs:
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i] > 0.0)
          (*gx)[i] += gout[i];
        else if (x[i] < 0.0)
          (*gx)[i] -= gout[i];
      }
      break;
  }
}

Tensor softmax_rows(const Tensor& x) {
  require_rank(x, 2, "softmax_rows");
  const std::size_t m = x.extent(0), n = x.extent(1);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = x.data() + i * n;
    double* orow = out.data() + i * n;
    double mx = row[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      orow[j] = std::exp(row[j] - mx);
      sum += orow[j];
    }
    for (std::size_t j = 0; j < n; ++j) orow[j] /= sum;
  }
  out.require_finite("softmax_rows");
  return out;
}

void softmax_rows_vjp(const Tensor& y, const Tensor& gout, Tensor* gx) {
  if (!gx) return;
  const std::size_t m = y.extent(0), n = y.extent(1);
  for (std::size_t i = 0; i < m; ++i) {
    const double* yrow = y.data() + i * n;
    const double* grow = gout.data() + i * n;
    double dot = 0.0;
    for (std::size_t j = 0; j < n; ++j) dot += yrow[j] * grow[j];
    double* gxrow = gx->data() + i * n;
    for (std::size_t j = 0; j < n; ++j) gxrow[j] += yrow[j] * (grow[j] - dot);
  }
}

Tensor pool_contract(const Tensor& e, const Tensor& w) {
  require_rank(e, 2, "pool_contract");
  require_rank(w, 4, "pool_contract");
  if (e.extent(1) != w.extent(0)) {
    throw ShapeError("pool_contract: embedding dim " + shape_str(e.shape()) +
                     " does not match pool " + shape_str(w.shape()));
  }
  const std::size_t slab = w.size() / w.extent(0);
  // Contraction over d is a matmul against the flattened pool.
  Tensor out = matmul(e, w.reshaped({w.extent(0), slab}));
  return out.reshaped({e.extent(0), w.extent(1), w.extent(2), w.extent(3)});
}

void pool_contract_vjp(const Tensor& e, const Tensor& w, const Tensor& gout, Tensor* ge,
                       Tensor* gw) {
  const std::size_t slab = w.size() / w.extent(0);
  const Tensor wflat = w.reshaped({w.extent(0), slab});
  const Tensor gflat = gout.reshaped({e.extent(0), slab});
  Tensor gwflat = gw ? gw->reshaped({w.extent(0), slab}) : Tensor{};
  matmul_vjp(e, wflat, gflat, ge, gw ? &gwflat : nullptr);
  if (gw) *gw = gwflat.reshaped(w.shape());
}

Tensor napl_combine(const Tensor& props, const Tensor& theta) {
  require_rank(props, 3, "napl_combine");
  require_rank(theta, 4, "napl_combine");
  const std::size_t kk = props.extent(0), n = props.extent(1), c = props.extent(2);
  if (theta.extent(0) != n || theta.extent(1) != kk || theta.extent(2) != c) {
    throw ShapeError("napl_combine: props " + shape_str(props.shape()) + " vs theta " +
                     shape_str(theta.shape()));
  }
  const std::size_t f = theta.extent(3);
  Tensor out({n, f});
  for (std::size_t node = 0; node < n; ++node) {
    double* orow = out.data() + node * f;
    for (std::size_t k = 0; k < kk; ++k) {
      const double* prow = props.data() + (k * n + node) * c;
      const double* tslab = theta.data() + ((node * kk + k) * c) * f;
      for (std::size_t ci = 0; ci < c; ++ci) {
        const double pv = prow[ci];
        if (pv == 0.0) continue;
        const double* trow = tslab + ci * f;
        for (std::size_t fi = 0; fi < f; ++fi) orow[fi] += pv * trow[fi];
      }
    }
  }
  out.require_finite("napl_combine");
  return out;
}

void napl_combine_vjp(const Tensor& props, const Tensor& theta, const Tensor& gout, Tensor* gp,
                      Tensor* gt) {
  const std::size_t kk = props.extent(0), n = props.extent(1), c = props.extent(2);
  const std::size_t f = theta.extent(3);
  for (std::size_t node = 0; node < n; ++node) {
    const double* grow = gout.data() + node * f;
    for (std::size_t k = 0; k < kk; ++k) {
      const std::size_t pbase = (k * n + node) * c;
      const std::size_t tbase = ((node * kk + k) * c) * f;
      for (std::size_t ci = 0; ci < c; ++ci) {
        const double* trow = theta.data() + tbase + ci * f;
        if (gp) {
          double acc = 0.0;
          for (std::size_t fi = 0; fi < f; ++fi) acc += grow[fi] * trow[fi];
          (*gp)[pbase + ci] += acc;
        }
        if (gt) {
          const double pv = props[pbase + ci];
          if (pv != 0.0) {
            double* gtrow = gt->data() + tbase + ci * f;
            for (std::size_t fi = 0; fi < f; ++fi) gtrow[fi] += pv * grow[fi];
          }
        }
      }
    }
  }
}

Tensor gcn_combine(const Tensor& props, const Tensor& theta) {
  require_rank(props, 3, "gcn_combine");
  require_rank(theta, 3, "gcn_combine");
  const std::size_t kk = props.extent(0), n = props.extent(1), c = props.extent(2);
  if (theta.extent(0) != kk || theta.extent(1) != c) {
    throw ShapeError("gcn_combine: props " + shape_str(props.shape()) + " vs theta " +
                     shape_str(theta.shape()));
  }
  const std::size_t f = theta.extent(2);
  Tensor out({n, f});
  for (std::size_t k = 0; k < kk; ++k) {
    for (std::size_t node = 0; node < n; ++node) {
      const double* prow = props.data() + (k * n + node) * c;
      double* orow = out.data() + node * f;
      for (std::size_t ci = 0; ci < c; ++ci) {
        const double pv = prow[ci];
        if (pv == 0.0) continue;
        const double* trow = theta.data() + (k * c + ci) * f;
        for (std::size_t fi = 0; fi < f; ++fi) orow[fi] += pv * trow[fi];
      }
    }
  }
  out.require_finite("gcn_combine");
  return out;
}

void gcn_combine_vjp(const Tensor& props, const Tensor& theta, const Tensor& gout, Tensor* gp,
                     Tensor* gt) {
  const std::size_t kk = props.extent(0), n = props.extent(1), c = props.extent(2);
  const std::size_t f = theta.extent(2);
  for (std::size_t k = 0; k < kk; ++k) {
    for (std::size_t node = 0; node < n; ++node) {
      const std::size_t pbase = (k * n + node) * c;
      const double* grow = gout.data() + node * f;
      for (std::size_t ci = 0; ci < c; ++ci) {
        const double* trow = theta.data() + (k * c + ci) * f;
        if (gp) {
          double acc = 0.0;
          for (std::size_t fi = 0; fi < f; ++fi) acc += grow[fi] * trow[fi];
          (*gp)[pbase + ci] += acc;
        }
        if (gt) {
          const double pv = props[pbase + ci];
          if (pv != 0.0) {
            double* gtrow = gt->data() + (k * c + ci) * f;
            for (std::size_t fi = 0; fi < f; ++fi) gtrow[fi] += pv * grow[fi];
          }
        }
      }
    }
  }
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  out.require_finite("add");
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  out.require_finite("sub");
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  out.require_finite("mul");
  return out;
}

Tensor affine(const Tensor& x, double scale, double shift) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale * x[i] + shift;
  out.require_finite("affine");
  return out;
}

Tensor add_rowvec(const Tensor& x, const Tensor& v) {
  require_rank(x, 2, "add_rowvec");
  require_rank(v, 1, "add_rowvec");
  const std::size_t m = x.extent(0), n = x.extent(1);
  if (v.extent(0) != n) {
    throw ShapeError("add_rowvec: " + shape_str(x.shape()) + " vs " + shape_str(v.shape()));
  }
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = x.at(i, j) + v[j];
  out.require_finite("add_rowvec");
  return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "concat_cols");
  require_rank(b, 2, "concat_cols");
  if (a.extent(0) != b.extent(0)) {
    throw ShapeError("concat_cols: row counts differ: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  const std::size_t m = a.extent(0), ca = a.extent(1), cb = b.extent(1);
  Tensor out({m, ca + cb});
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = out.data() + i * (ca + cb);
    const double* arow = a.data() + i * ca;
    const double* brow = b.data() + i * cb;
    for (std::size_t j = 0; j < ca; ++j) orow[j] = arow[j];
    for (std::size_t j = 0; j < cb; ++j) orow[ca + j] = brow[j];
  }
  return out;
}

Tensor stack_mats(std::span<const Tensor* const> mats) {
  if (mats.empty()) throw ShapeError("stack_mats: empty list");
  const Tensor& first = *mats[0];
  require_rank(first, 2, "stack_mats");
  const std::size_t m = first.extent(0), n = first.extent(1);
  Tensor out({mats.size(), m, n});
  for (std::size_t k = 0; k < mats.size(); ++k) {
    require_same_shape(*mats[k], first, "stack_mats");
    const double* src = mats[k]->data();
    double* dst = out.data() + k * m * n;
    for (std::size_t i = 0; i < m * n; ++i) dst[i] = src[i];
  }
  return out;
}

double l1_mean(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "l1_mean");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::fabs(pred[i] - target[i]);
  double out = sum / static_cast<double>(pred.size());
  if (!std::isfinite(out)) throw NumericsError("non-finite value produced by l1_mean");
  return out;
}

void l1_mean_vjp(const Tensor& pred, const Tensor& target, double gout, Tensor* gpred) {
  if (!gpred) return;
  const double scale = gout / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    if (d > 0.0)
      (*gpred)[i] += scale;
    else if (d < 0.0)
      (*gpred)[i] -= scale;
  }
}

}  // namespace agcrn::ops
