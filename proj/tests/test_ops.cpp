#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "agcrn/errors.hpp"
#include "agcrn/ops.hpp"
#include "agcrn/rng.hpp"

using namespace agcrn;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

double dot_all(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double rel_err(double a, double n) {
  const double m = std::max(std::abs(a), std::abs(n));
  return m < 1e-8 ? std::abs(a - n) : std::abs(a - n) / m;
}

/// Central-difference check of one input's analytic cotangent for the
/// scalar loss dot(fwd(), gout).
double fd_max_err(const std::function<Tensor()>& fwd, Tensor& x, const Tensor& analytic,
                  const Tensor& gout, double h = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = dot_all(fwd(), gout);
    x[i] = keep - h;
    const double dn = dot_all(fwd(), gout);
    x[i] = keep;
    worst = std::max(worst, rel_err(analytic[i], (up - dn) / (2.0 * h)));
  }
  return worst;
}

}  // namespace

TEST_CASE("matmul identity is exact") {
  Tensor x({2, 2}, {1, 2, 3, 4});
  Tensor y = ops::matmul(Tensor::identity(2), x);
  for (std::size_t i = 0; i < 4; ++i) CHECK_EQ(y[i], x[i]);
}

TEST_CASE("matmul dot product") {
  Tensor a({1, 2}, {1, 2}), b({2, 1}, {3, 4});
  CHECK_EQ(ops::matmul(a, b).item(), 11.0);
}

TEST_CASE("matmul rejects mismatched inner extents") {
  Tensor a({2, 3}), b({2, 2});
  CHECK_THROWS_AS(ops::matmul(a, b), ShapeError);
  try {
    ops::matmul(a, b);
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
    CHECK(msg.find("2x2") != std::string::npos);
  }
}

TEST_CASE("matmul surfaces non-finite results") {
  Tensor a({1, 1}, {std::numeric_limits<double>::infinity()}), b({1, 1}, {1.0});
  CHECK_THROWS_AS(ops::matmul(a, b), NumericsError);
}

TEST_CASE("matmul backward vs finite differences") {
  Rng rng(11);
  Tensor a = random_tensor({3, 4}, rng), b = random_tensor({4, 2}, rng);
  Tensor gout = random_tensor({3, 2}, rng);
  Tensor ga(a.shape()), gb(b.shape());
  ops::matmul_vjp(a, b, gout, &ga, &gb);
  auto fwd = [&] { return ops::matmul(a, b); };
  CHECK(fd_max_err(fwd, a, ga, gout) <= 1e-6);
  CHECK(fd_max_err(fwd, b, gb, gout) <= 1e-6);
}

TEST_CASE("unary examples") {
  Tensor x({3}, {-1, 0, 2});
  Tensor y = ops::apply_unary(x, ops::Unary::relu);
  CHECK_EQ(y[0], 0.0);
  CHECK_EQ(y[1], 0.0);
  CHECK_EQ(y[2], 2.0);
  CHECK_EQ(ops::apply_unary(Tensor({1}, {0.0}), ops::Unary::sigmoid)[0], 0.5);
  CHECK_EQ(ops::apply_unary(Tensor({1}, {-3.0}), ops::Unary::abs)[0], 3.0);
}

TEST_CASE("relu and abs use subgradient 0 at the kink") {
  Tensor x({1}, {0.0}), gout({1}, {1.0});
  for (auto k : {ops::Unary::relu, ops::Unary::abs}) {
    Tensor y = ops::apply_unary(x, k);
    Tensor gx(x.shape());
    ops::unary_vjp(x, y, k, gout, &gx);
    CHECK_EQ(gx[0], 0.0);
  }
}

TEST_CASE("unary backward vs finite differences") {
  Rng rng(3);
  for (auto k : {ops::Unary::sigmoid, ops::Unary::tanh}) {
    Tensor x({1}, {0.3});
    Tensor y = ops::apply_unary(x, k);
    Tensor gout({1}, {1.0});
    Tensor gx(x.shape());
    ops::unary_vjp(x, y, k, gout, &gx);
    auto fwd = [&] { return ops::apply_unary(x, k); };
    CHECK(fd_max_err(fwd, x, gx, gout) <= 1e-6);
  }
  Tensor x = random_tensor({2, 3}, rng);
  for (auto k : {ops::Unary::relu, ops::Unary::sigmoid, ops::Unary::tanh, ops::Unary::abs}) {
    Tensor y = ops::apply_unary(x, k);
    Tensor gout = random_tensor({2, 3}, rng);
    Tensor gx(x.shape());
    ops::unary_vjp(x, y, k, gout, &gx);
    auto fwd = [&] { return ops::apply_unary(x, k); };
    CHECK(fd_max_err(fwd, x, gx, gout) <= 1e-4);
  }
}

TEST_CASE("softmax_rows examples") {
  Tensor u = ops::softmax_rows(Tensor({1, 2}, {0, 0}));
  CHECK_EQ(u[0], doctest::Approx(0.5).epsilon(1e-12));
  Tensor s = ops::softmax_rows(Tensor({1, 2}, {1, 0}));
  CHECK_EQ(s[0], doctest::Approx(0.73106).epsilon(1e-4));
  CHECK_EQ(s[1], doctest::Approx(0.26894).epsilon(1e-4));
}

TEST_CASE("softmax_rows is stable for huge logits") {
  Tensor s = ops::softmax_rows(Tensor({1, 2}, {0, 1000}));
  CHECK(s.all_finite());
  CHECK_EQ(s[0], doctest::Approx(0.0).epsilon(1e-12));
  CHECK_EQ(s[1], doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmax_rows rows sum to 1 with entries in [0,1]") {
  Rng rng(17);
  for (int it = 0; it < 20; ++it) {
    Tensor x = random_tensor({4, 5}, rng, -30.0, 30.0);
    Tensor y = ops::softmax_rows(x);
    for (std::size_t i = 0; i < 4; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < 5; ++j) {
        sum += y.at(i, j);
        CHECK(y.at(i, j) >= 0.0);
        CHECK(y.at(i, j) <= 1.0);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("softmax_rows backward vs finite differences") {
  Rng rng(23);
  Tensor x = random_tensor({3, 4}, rng);
  Tensor y = ops::softmax_rows(x);
  Tensor gout = random_tensor({3, 4}, rng);
  Tensor gx(x.shape());
  ops::softmax_rows_vjp(y, gout, &gx);
  auto fwd = [&] { return ops::softmax_rows(x); };
  CHECK(fd_max_err(fwd, x, gx, gout) <= 1e-6);
}

TEST_CASE("pool_contract scalar scaling") {
  Tensor e({1, 1}, {2.0});
  Tensor w({1, 1, 1, 1}, {5.0});
  CHECK_EQ(ops::pool_contract(e, w).item(), 10.0);
}

TEST_CASE("pool_contract null embedding") {
  Tensor e({2, 3});
  Rng rng(4);
  Tensor w = random_tensor({3, 2, 2, 2}, rng);
  Tensor out = ops::pool_contract(e, w);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK_EQ(out[i], 0.0);
}

TEST_CASE("pool_contract hand-summed slices") {
  Tensor e({1, 2}, {1, 1});
  Tensor w({2, 1, 1, 2}, {1, 2, 3, 4});  // w[0]=[[[1,2]]], w[1]=[[[3,4]]]
  Tensor out = ops::pool_contract(e, w);
  CHECK_EQ(out.at(0, 0, 0, 0), 4.0);
  CHECK_EQ(out.at(0, 0, 0, 1), 6.0);
}

TEST_CASE("pool_contract backward vs finite differences") {
  Rng rng(31);
  Tensor e = random_tensor({3, 2}, rng), w = random_tensor({2, 2, 3, 2}, rng);
  Tensor gout = random_tensor({3, 2, 3, 2}, rng);
  Tensor ge(e.shape()), gw(w.shape());
  ops::pool_contract_vjp(e, w, gout, &ge, &gw);
  auto fwd = [&] { return ops::pool_contract(e, w); };
  CHECK(fd_max_err(fwd, e, ge, gout) <= 1e-6);
  CHECK(fd_max_err(fwd, w, gw, gout) <= 1e-6);
}

TEST_CASE("napl_combine hand value and backward") {
  // one node, K=1, C=2, F=1: out = 1*3 + 2*4
  Tensor props({1, 1, 2}, {1, 2});
  Tensor theta({1, 1, 2, 1}, {3, 4});
  CHECK_EQ(ops::napl_combine(props, theta).at(0, 0), 11.0);

  Rng rng(37);
  Tensor p = random_tensor({2, 3, 2}, rng), th = random_tensor({3, 2, 2, 4}, rng);
  Tensor gout = random_tensor({3, 4}, rng);
  Tensor gp(p.shape()), gt(th.shape());
  ops::napl_combine_vjp(p, th, gout, &gp, &gt);
  auto fwd = [&] { return ops::napl_combine(p, th); };
  CHECK(fd_max_err(fwd, p, gp, gout) <= 1e-6);
  CHECK(fd_max_err(fwd, th, gt, gout) <= 1e-6);
}

TEST_CASE("gcn_combine hand value and backward") {
  // K=1: plain matmul of [N,C] by [C,F]
  Tensor props({1, 2, 2}, {1, 2, 3, 4});
  Tensor theta({1, 2, 1}, {1, 1});
  Tensor out = ops::gcn_combine(props, theta);
  CHECK_EQ(out.at(0, 0), 3.0);
  CHECK_EQ(out.at(1, 0), 7.0);

  Rng rng(41);
  Tensor p = random_tensor({2, 3, 2}, rng), th = random_tensor({2, 2, 4}, rng);
  Tensor gout = random_tensor({3, 4}, rng);
  Tensor gp(p.shape()), gt(th.shape());
  ops::gcn_combine_vjp(p, th, gout, &gp, &gt);
  auto fwd = [&] { return ops::gcn_combine(p, th); };
  CHECK(fd_max_err(fwd, p, gp, gout) <= 1e-6);
  CHECK(fd_max_err(fwd, th, gt, gout) <= 1e-6);
}

TEST_CASE("elementwise helpers") {
  Tensor a({2}, {1, 2}), b({2}, {3, 5});
  CHECK_EQ(ops::add(a, b)[1], 7.0);
  CHECK_EQ(ops::sub(b, a)[0], 2.0);
  CHECK_EQ(ops::mul(a, b)[1], 10.0);
  CHECK_EQ(ops::affine(a, 2.0, 1.0)[0], 3.0);
  CHECK_THROWS_AS(ops::add(a, Tensor({3})), ShapeError);

  Tensor x({2, 2}, {1, 2, 3, 4}), v({2}, {10, 20});
  Tensor y = ops::add_rowvec(x, v);
  CHECK_EQ(y.at(0, 1), 22.0);
  CHECK_EQ(y.at(1, 0), 13.0);

  Tensor c = ops::concat_cols(x, y);
  CHECK_EQ(c.extent(1), 4);
  CHECK_EQ(c.at(1, 3), 24.0);

  const Tensor* mats[2] = {&x, &y};
  Tensor s = ops::stack_mats(mats);
  CHECK_EQ(s.extent(0), 2);
  CHECK_EQ(s.at(1, 0, 1), 22.0);
}

TEST_CASE("transpose") {
  Tensor x({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor y = ops::transpose(x);
  CHECK_EQ(y.extent(0), 3);
  CHECK_EQ(y.at(2, 1), 6.0);
}

TEST_CASE("l1_mean examples and gradient") {
  Tensor p({2}, {1, 2}), t({2}, {2, 4});
  CHECK_EQ(ops::l1_mean(p, p), 0.0);
  CHECK_EQ(ops::l1_mean(p, t), 1.5);

  Rng rng(43);
  Tensor pred = random_tensor({3, 2}, rng), target = random_tensor({3, 2}, rng, 2.0, 3.0);
  Tensor gp(pred.shape());
  ops::l1_mean_vjp(pred, target, 1.0, &gp);
  double worst = 0.0;
  const double h = 1e-6;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double keep = pred[i];
    pred[i] = keep + h;
    const double up = ops::l1_mean(pred, target);
    pred[i] = keep - h;
    const double dn = ops::l1_mean(pred, target);
    pred[i] = keep;
    worst = std::max(worst, rel_err(gp[i], (up - dn) / (2.0 * h)));
  }
  CHECK(worst <= 1e-6);
}
