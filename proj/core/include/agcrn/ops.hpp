#pragma once

#include <span>

#include "agcrn/tensor.hpp"

namespace agcrn::ops {

/// Elementwise nonlinearities. relu/abs take subgradient 0 at the kink.
enum class Unary { relu, sigmoid, tanh, abs };

const char* unary_name(Unary k);

// Each forward kernel validates shapes, checks its output for NaN/Inf and
// throws ShapeError / NumericsError. The matching *_vjp accumulates (+=)
// input cotangents; a null output pointer skips that input.

/// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);
void matmul_vjp(const Tensor& a, const Tensor& b, const Tensor& gout, Tensor* ga, Tensor* gb);

/// [m,n] -> [n,m]
Tensor transpose(const Tensor& x);

Tensor apply_unary(const Tensor& x, Unary k);
void unary_vjp(const Tensor& x, const Tensor& y, Unary k, const Tensor& gout, Tensor* gx);

/// Row-stable softmax over the last axis of a matrix.
Tensor softmax_rows(const Tensor& x);
void softmax_rows_vjp(const Tensor& y, const Tensor& gout, Tensor* gx);

/// [N,d] x [d,K,Cin,Cout] -> [N,K,Cin,Cout], contraction over d.
Tensor pool_contract(const Tensor& e, const Tensor& w);
void pool_contract_vjp(const Tensor& e, const Tensor& w, const Tensor& gout, Tensor* ge,
                       Tensor* gw);

/// Per-node mix: props [K,N,C] with theta [N,K,C,F] -> [N,F].
/// out[n,f] = sum_k sum_c props[k,n,c] * theta[n,k,c,f]
Tensor napl_combine(const Tensor& props, const Tensor& theta);
void napl_combine_vjp(const Tensor& props, const Tensor& theta, const Tensor& gout, Tensor* gp,
                      Tensor* gt);

/// Shared-weight mix: props [K,N,C] with theta [K,C,F] -> [N,F].
Tensor gcn_combine(const Tensor& props, const Tensor& theta);
void gcn_combine_vjp(const Tensor& props, const Tensor& theta, const Tensor& gout, Tensor* gp,
                     Tensor* gt);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

/// scale * x + shift, elementwise.
Tensor affine(const Tensor& x, double scale, double shift);

/// Broadcast-add a length-n vector to every row of [m,n].
Tensor add_rowvec(const Tensor& x, const Tensor& v);

/// Column-wise concatenation of [m,c1] and [m,c2].
Tensor concat_cols(const Tensor& a, const Tensor& b);

/// Stack K same-shape matrices [m,n] into [K,m,n].
Tensor stack_mats(std::span<const Tensor* const> mats);

/// Mean absolute difference over all entries.
double l1_mean(const Tensor& pred, const Tensor& target);
void l1_mean_vjp(const Tensor& pred, const Tensor& target, double gout, Tensor* gpred);

}  // namespace agcrn::ops
