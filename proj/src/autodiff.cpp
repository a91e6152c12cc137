// Copyright 2026 The pulsekit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xcorr.hpp"

namespace pulsekit::ad {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

Tensor Tensor::zeros(Shape s) {
  Tensor t;
  t.shape = s;
  t.data.assign(static_cast<size_t>(s.size()), 0.0);
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.shape = {1, 1};
  t.data = {v};
  return t;
}

Tensor Tensor::row(std::vector<double> v) {
  Tensor t;
  t.shape = {1, static_cast<int>(v.size())};
  t.data = std::move(v);
  return t;
}

Tensor Tensor::col(std::vector<double> v) {
  Tensor t;
  t.shape = {static_cast<int>(v.size()), 1};
  t.data = std::move(v);
  return t;
}

Tensor Tensor::matrix(int rows, int cols, std::vector<double> v) {
  require(static_cast<size_t>(rows) * cols == v.size(),
          ErrorCode::invalid_argument, "matrix: size mismatch");
  Tensor t;
  t.shape = {rows, cols};
  t.data = std::move(v);
  return t;
}

NodeRef Tape::push(Node n) {
  n.grad = Tensor::zeros(n.shape);
  nodes_.push_back(std::move(n));
  return NodeRef{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::at(NodeRef r) const {
  require(r.idx >= 0 && r.idx < static_cast<int>(nodes_.size()),
          ErrorCode::invalid_argument, "invalid node reference");
  return nodes_[r.idx];
}

NodeRef Tape::input(Tensor v, const std::string& name) {
  Node n;
  n.op = Op::input;
  n.shape = v.shape;
  n.value = std::move(v);
  NodeRef r = push(std::move(n));
  if (!name.empty()) {
    require(!params_.count(name), ErrorCode::invalid_argument,
            "duplicate parameter name: " + name);
    params_[name] = r.idx;
  }
  return r;
}

NodeRef Tape::constant(Tensor v) {
  Node n;
  n.op = Op::constant;
  n.shape = v.shape;
  n.value = std::move(v);
  return push(std::move(n));
}

NodeRef Tape::add(NodeRef a, NodeRef b) {
  require(at(a).shape == at(b).shape, ErrorCode::invalid_argument,
          "add: shape mismatch");
  Node n;
  n.op = Op::add;
  n.shape = at(a).shape;
  n.parents = {a.idx, b.idx};
  n.value = Tensor::zeros(n.shape);
  for (int i = 0; i < n.shape.size(); ++i)
    n.value.data[i] = at(a).value.data[i] + at(b).value.data[i];
  return push(std::move(n));
}

NodeRef Tape::sub(NodeRef a, NodeRef b) {
  require(at(a).shape == at(b).shape, ErrorCode::invalid_argument,
          "sub: shape mismatch");
  Node n;
  n.op = Op::sub;
  n.shape = at(a).shape;
  n.parents = {a.idx, b.idx};
  n.value = Tensor::zeros(n.shape);
  for (int i = 0; i < n.shape.size(); ++i)
    n.value.data[i] = at(a).value.data[i] - at(b).value.data[i];
  return push(std::move(n));
}

NodeRef Tape::mul(NodeRef a, NodeRef b) {
  require(at(a).shape == at(b).shape, ErrorCode::invalid_argument,
          "mul: shape mismatch");
  Node n;
  n.op = Op::mul;
  n.shape = at(a).shape;
  n.parents = {a.idx, b.idx};
  n.value = Tensor::zeros(n.shape);
  for (int i = 0; i < n.shape.size(); ++i)
    n.value.data[i] = at(a).value.data[i] * at(b).value.data[i];
  return push(std::move(n));
}

NodeRef Tape::div(NodeRef a, NodeRef b) {
  require(at(a).shape == at(b).shape, ErrorCode::invalid_argument,
          "div: shape mismatch");
  Node n;
  n.op = Op::div;
  n.shape = at(a).shape;
  n.parents = {a.idx, b.idx};
  n.value = Tensor::zeros(n.shape);
  for (int i = 0; i < n.shape.size(); ++i)
    n.value.data[i] = at(a).value.data[i] / at(b).value.data[i];
  return push(std::move(n));
}

NodeRef Tape::affine(NodeRef x, double a, double b) {
  Node n;
  n.op = Op::affine;
  n.shape = at(x).shape;
  n.parents = {x.idx};
  n.c0 = a;
  n.c1 = b;
  n.value = Tensor::zeros(n.shape);
  for (int i = 0; i < n.shape.size(); ++i)
    n.value.data[i] = a * at(x).value.data[i] + b;
  return push(std::move(n));
}

NodeRef Tape::relu(NodeRef x) {
  Node n;
  n.op = Op::relu;
  n.shape = at(x).shape;
  n.parents = {x.idx};
  n.value = Tensor::zeros(n.shape);
  for (int i = 0; i < n.shape.size(); ++i)
    n.value.data[i] = std::max(at(x).value.data[i], 0.0);
  return push(std::move(n));
}

NodeRef Tape::log(NodeRef x) {
  Node n;
  n.op = Op::log;
  n.shape = at(x).shape;
  n.parents = {x.idx};
  n.value = Tensor::zeros(n.shape);
  for (int i = 0; i < n.shape.size(); ++i)
    n.value.data[i] = std::log(at(x).value.data[i]);
  return push(std::move(n));
}

NodeRef Tape::sqrt(NodeRef x) {
  Node n;
  n.op = Op::sqrt;
  n.shape = at(x).shape;
  n.parents = {x.idx};
  n.value = Tensor::zeros(n.shape);
  for (int i = 0; i < n.shape.size(); ++i)
    n.value.data[i] = std::sqrt(at(x).value.data[i]);
  return push(std::move(n));
}

NodeRef Tape::clamp_min(NodeRef x, double lo) {
  Node n;
  n.op = Op::clamp_min;
  n.shape = at(x).shape;
  n.parents = {x.idx};
  n.c0 = lo;
  n.value = Tensor::zeros(n.shape);
  for (int i = 0; i < n.shape.size(); ++i)
    n.value.data[i] = std::max(at(x).value.data[i], lo);
  return push(std::move(n));
}

NodeRef Tape::sub_scalar(NodeRef x, NodeRef s) {
  require(at(s).shape == Shape{1, 1}, ErrorCode::invalid_argument,
          "sub_scalar: scalar operand must be 1x1");
  Node n;
  n.op = Op::sub_scalar;
  n.shape = at(x).shape;
  n.parents = {x.idx, s.idx};
  n.value = Tensor::zeros(n.shape);
  double sv = at(s).value.data[0];
  for (int i = 0; i < n.shape.size(); ++i)
    n.value.data[i] = at(x).value.data[i] - sv;
  return push(std::move(n));
}

NodeRef Tape::div_scalar(NodeRef x, NodeRef s) {
  require(at(s).shape == Shape{1, 1}, ErrorCode::invalid_argument,
          "div_scalar: scalar operand must be 1x1");
  Node n;
  n.op = Op::div_scalar;
  n.shape = at(x).shape;
  n.parents = {x.idx, s.idx};
  n.value = Tensor::zeros(n.shape);
  double sv = at(s).value.data[0];
  for (int i = 0; i < n.shape.size(); ++i)
    n.value.data[i] = at(x).value.data[i] / sv;
  return push(std::move(n));
}

NodeRef Tape::sum_reduce(NodeRef x) {
  Node n;
  n.op = Op::sum_reduce;
  n.shape = {1, 1};
  n.parents = {x.idx};
  double s = 0.0;
  for (double v : at(x).value.data) s += v;
  n.value = Tensor::scalar(s);
  return push(std::move(n));
}

NodeRef Tape::max_reduce(NodeRef x) {
  require(at(x).shape.size() > 0, ErrorCode::invalid_argument,
          "max_reduce: empty input");
  Node n;
  n.op = Op::max_reduce;
  n.shape = {1, 1};
  n.parents = {x.idx};
  double best = at(x).value.data[0];
  for (double v : at(x).value.data) best = std::max(best, v);
  n.value = Tensor::scalar(best);
  return push(std::move(n));
}

NodeRef Tape::mean_center(NodeRef x) {
  Node n;
  n.op = Op::mean_center;
  n.shape = at(x).shape;
  n.parents = {x.idx};
  n.value = Tensor::zeros(n.shape);
  double mean = 0.0;
  for (double v : at(x).value.data) mean += v;
  mean /= n.shape.size();
  for (int i = 0; i < n.shape.size(); ++i)
    n.value.data[i] = at(x).value.data[i] - mean;
  return push(std::move(n));
}

NodeRef Tape::slice(NodeRef x, int r0, int c0, int rows, int cols) {
  const Shape xs = at(x).shape;
  require(r0 >= 0 && c0 >= 0 && rows > 0 && cols > 0 && r0 + rows <= xs.rows &&
              c0 + cols <= xs.cols,
          ErrorCode::invalid_argument, "slice: out of range");
  Node n;
  n.op = Op::slice;
  n.shape = {rows, cols};
  n.parents = {x.idx};
  n.iaux = {r0, c0};
  n.value = Tensor::zeros(n.shape);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      n.value.at(r, c) = at(x).value.at(r0 + r, c0 + c);
  return push(std::move(n));
}

NodeRef Tape::concat_rows(NodeRef a, NodeRef b) {
  require(at(a).shape.cols == at(b).shape.cols, ErrorCode::invalid_argument,
          "concat_rows: column mismatch");
  Node n;
  n.op = Op::concat_rows;
  n.shape = {at(a).shape.rows + at(b).shape.rows, at(a).shape.cols};
  n.parents = {a.idx, b.idx};
  n.value = Tensor::zeros(n.shape);
  std::copy(at(a).value.data.begin(), at(a).value.data.end(),
            n.value.data.begin());
  std::copy(at(b).value.data.begin(), at(b).value.data.end(),
            n.value.data.begin() + at(a).value.data.size());
  return push(std::move(n));
}

NodeRef Tape::concat_cols(NodeRef a, NodeRef b) {
  require(at(a).shape.rows == at(b).shape.rows, ErrorCode::invalid_argument,
          "concat_cols: row mismatch");
  Node n;
  n.op = Op::concat_cols;
  n.shape = {at(a).shape.rows, at(a).shape.cols + at(b).shape.cols};
  n.parents = {a.idx, b.idx};
  n.value = Tensor::zeros(n.shape);
  for (int r = 0; r < n.shape.rows; ++r) {
    for (int c = 0; c < at(a).shape.cols; ++c)
      n.value.at(r, c) = at(a).value.at(r, c);
    for (int c = 0; c < at(b).shape.cols; ++c)
      n.value.at(r, at(a).shape.cols + c) = at(b).value.at(r, c);
  }
  return push(std::move(n));
}

NodeRef Tape::reshape(NodeRef x, Shape s) {
  require(s.size() == at(x).shape.size(), ErrorCode::invalid_argument,
          "reshape: size mismatch");
  Node n;
  n.op = Op::reshape;
  n.shape = s;
  n.parents = {x.idx};
  n.value = at(x).value;
  n.value.shape = s;
  return push(std::move(n));
}

NodeRef Tape::matvec(NodeRef w, NodeRef x) {
  const Shape ws = at(w).shape, xs = at(x).shape;
  require(xs.cols == 1 && ws.cols == xs.rows, ErrorCode::invalid_argument,
          "matvec: expects (m x n) * (n x 1)");
  Node n;
  n.op = Op::matvec;
  n.shape = {ws.rows, 1};
  n.parents = {w.idx, x.idx};
  n.value = Tensor::zeros(n.shape);
  for (int i = 0; i < ws.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < ws.cols; ++j)
      s += at(w).value.at(i, j) * at(x).value.data[j];
    n.value.data[i] = s;
  }
  return push(std::move(n));
}

NodeRef Tape::conv1d(NodeRef x, NodeRef w, NodeRef b, int out_channels,
                     int kernel) {
  const Shape xs = at(x).shape;
  const int cin = xs.rows, len = xs.cols;
  require(kernel % 2 == 1 && kernel >= 1, ErrorCode::invalid_argument,
          "conv1d: kernel must be odd");
  require(at(w).shape == Shape{out_channels, cin * kernel},
          ErrorCode::invalid_argument, "conv1d: weight shape mismatch");
  require(at(b).shape == Shape{out_channels, 1}, ErrorCode::invalid_argument,
          "conv1d: bias shape mismatch");
  Node n;
  n.op = Op::conv1d;
  n.shape = {out_channels, len};
  n.parents = {x.idx, w.idx, b.idx};
  n.iaux = {kernel};
  n.value = Tensor::zeros(n.shape);
  const int half = kernel / 2;
  const Tensor& xv = at(x).value;
  const Tensor& wv = at(w).value;
  const Tensor& bv = at(b).value;
  for (int co = 0; co < out_channels; ++co) {
    for (int t = 0; t < len; ++t) {
      double s = bv.data[co];
      for (int ci = 0; ci < cin; ++ci) {
        for (int j = 0; j < kernel; ++j) {
          int src = t + j - half;
          if (src < 0 || src >= len) continue;
          s += wv.at(co, ci * kernel + j) * xv.at(ci, src);
        }
      }
      n.value.at(co, t) = s;
    }
  }
  return push(std::move(n));
}

NodeRef Tape::dft_real(NodeRef x, std::vector<int> bins) {
  const Shape xs = at(x).shape;
  require(xs.rows == 1 || xs.cols == 1, ErrorCode::invalid_argument,
          "dft_real: expects a vector");
  const int len = xs.size();
  Node n;
  n.op = Op::dft_real;
  n.shape = {1, static_cast<int>(bins.size())};
  n.parents = {x.idx};
  n.value = Tensor::zeros(n.shape);
  for (size_t j = 0; j < bins.size(); ++j) {
    require(bins[j] >= 0 && bins[j] < len, ErrorCode::invalid_argument,
            "dft_real: bin out of range");
    double s = 0.0;
    for (int i = 0; i < len; ++i)
      s += at(x).value.data[i] * std::cos(kTwoPi * bins[j] * i / len);
    n.value.data[j] = s;
  }
  n.iaux = std::move(bins);
  return push(std::move(n));
}

NodeRef Tape::dft_imag(NodeRef x, std::vector<int> bins) {
  const Shape xs = at(x).shape;
  require(xs.rows == 1 || xs.cols == 1, ErrorCode::invalid_argument,
          "dft_imag: expects a vector");
  const int len = xs.size();
  Node n;
  n.op = Op::dft_imag;
  n.shape = {1, static_cast<int>(bins.size())};
  n.parents = {x.idx};
  n.value = Tensor::zeros(n.shape);
  for (size_t j = 0; j < bins.size(); ++j) {
    require(bins[j] >= 0 && bins[j] < len, ErrorCode::invalid_argument,
            "dft_imag: bin out of range");
    double s = 0.0;
    for (int i = 0; i < len; ++i)
      s -= at(x).value.data[i] * std::sin(kTwoPi * bins[j] * i / len);
    n.value.data[j] = s;
  }
  n.iaux = std::move(bins);
  return push(std::move(n));
}

NodeRef Tape::periodic_similarity(NodeRef shorter, NodeRef longer, int fps,
                                  double delta_t_s) {
  const Shape ss = at(shorter).shape, ls = at(longer).shape;
  require((ss.rows == 1 || ss.cols == 1) && (ls.rows == 1 || ls.cols == 1),
          ErrorCode::invalid_argument, "periodic_similarity: expects vectors");
  require(ss.size() >= 2 && ss.size() <= ls.size(),
          ErrorCode::invalid_argument,
          "periodic_similarity: short signal must fit inside the long one");
  const double* a = at(shorter).value.data.data();
  const double* g = at(longer).value.data.data();
  const int la = ss.size(), lg = ls.size();

  std::vector<double> m = detail::swm_values(a, la, g, lg);
  detail::FpDetail d = detail::fp_detail(m, fps, delta_t_s);

  Node n;
  n.op = Op::periodic_similarity;
  n.shape = {1, 1};
  n.parents = {shorter.idx, longer.idx};
  n.value = Tensor::scalar(d.value);
  // Subgradient bookkeeping: each chunk contributes weight 1/N split equally
  // over tied window positions, then over tied lags at each position.
  const int N = d.seg.n_segments;
  for (size_t h = 0; h < d.chunk_argmax.size(); ++h) {
    if (d.chunk_argmax[h].empty()) continue;  // pad-only maximum
    double pos_share = 1.0 / (static_cast<double>(N) * d.chunk_ties[h]);
    for (int tau : d.chunk_argmax[h]) {
      std::vector<int> ks = detail::swm_tied_lags(a, la, g, tau, m[tau]);
      if (ks.empty()) continue;
      double w = pos_share / ks.size();
      for (int k : ks) {
        n.iaux.push_back(tau);
        n.iaux.push_back(k);
        n.daux.push_back(w);
      }
    }
  }
  return push(std::move(n));
}

NodeRef Tape::padded_ncc_max(NodeRef a, NodeRef b) {
  const Shape as = at(a).shape, bs = at(b).shape;
  require((as.rows == 1 || as.cols == 1) && (bs.rows == 1 || bs.cols == 1),
          ErrorCode::invalid_argument, "padded_ncc_max: expects vectors");
  // The shorter signal is the zero-padded, shifted one.
  bool swapped = as.size() > bs.size();
  NodeRef sn = swapped ? b : a, ln = swapped ? a : b;
  const double* s = at(sn).value.data.data();
  const double* l = at(ln).value.data.data();
  const int ls = at(sn).shape.size(), ll = at(ln).shape.size();
  std::vector<double> c = detail::lag_values(s, ls, l, ll);
  double best = c[0];
  for (double v : c) best = std::max(best, v);

  Node n;
  n.op = Op::padded_ncc_max;
  n.shape = {1, 1};
  n.parents = {sn.idx, ln.idx};
  n.value = Tensor::scalar(best);
  std::vector<int> ties;
  for (int k = -(ll - 1); k <= ll - 1; ++k)
    if (c[k + ll - 1] == best) ties.push_back(k);
  for (int k : ties) {
    n.iaux.push_back(k);
    n.daux.push_back(1.0 / ties.size());
  }
  return push(std::move(n));
}

const Tensor& Tape::value(NodeRef n) const { return at(n).value; }

double Tape::scalar_value(NodeRef n) const {
  require(at(n).shape == Shape{1, 1}, ErrorCode::invalid_argument,
          "scalar_value: node is not scalar");
  return at(n).value.data[0];
}

const Tensor& Tape::grad(NodeRef n) const { return at(n).grad; }

NodeRef Tape::param(const std::string& name) const {
  auto it = params_.find(name);
  require(it != params_.end(), ErrorCode::invalid_argument,
          "unknown parameter: " + name);
  return NodeRef{it->second};
}

std::map<std::string, Tensor> Tape::param_grads() const {
  std::map<std::string, Tensor> g;
  for (const auto& [name, idx] : params_) g[name] = nodes_[idx].grad;
  return g;
}

void Tape::backward(NodeRef output) {
  require(at(output).shape == Shape{1, 1}, ErrorCode::invalid_argument,
          "backward: output must be scalar");
  for (Node& n : nodes_) std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
  // Restrict the pass to ancestors of the output.
  std::vector<bool> reach(nodes_.size(), false);
  reach[output.idx] = true;
  for (int i = output.idx; i >= 0; --i) {
    if (!reach[i]) continue;
    for (int p : nodes_[i].parents) reach[p] = true;
  }
  nodes_[output.idx].grad.data[0] = 1.0;
  for (int i = output.idx; i >= 0; --i)
    if (reach[i]) backward_step(i);
}

void Tape::backward_step(int idx) {
  Node& n = nodes_[idx];
  const auto& g = n.grad.data;
  auto parent = [&](int i) -> Node& { return nodes_[n.parents[i]]; };
  switch (n.op) {
    case Op::input:
    case Op::constant:
      break;
    case Op::add: {
      for (int i = 0; i < n.shape.size(); ++i) {
        parent(0).grad.data[i] += g[i];
        parent(1).grad.data[i] += g[i];
      }
      break;
    }
    case Op::sub: {
      for (int i = 0; i < n.shape.size(); ++i) {
        parent(0).grad.data[i] += g[i];
        parent(1).grad.data[i] -= g[i];
      }
      break;
    }
    case Op::mul: {
      for (int i = 0; i < n.shape.size(); ++i) {
        parent(0).grad.data[i] += g[i] * parent(1).value.data[i];
        parent(1).grad.data[i] += g[i] * parent(0).value.data[i];
      }
      break;
    }
    case Op::div: {
      for (int i = 0; i < n.shape.size(); ++i) {
        double bv = parent(1).value.data[i];
        parent(0).grad.data[i] += g[i] / bv;
        parent(1).grad.data[i] -= g[i] * n.value.data[i] / bv;
      }
      break;
    }
    case Op::affine: {
      for (int i = 0; i < n.shape.size(); ++i)
        parent(0).grad.data[i] += n.c0 * g[i];
      break;
    }
    case Op::relu: {
      for (int i = 0; i < n.shape.size(); ++i)
        if (parent(0).value.data[i] > 0.0) parent(0).grad.data[i] += g[i];
      break;
    }
    case Op::log: {
      for (int i = 0; i < n.shape.size(); ++i)
        parent(0).grad.data[i] += g[i] / parent(0).value.data[i];
      break;
    }
    case Op::sqrt: {
      for (int i = 0; i < n.shape.size(); ++i)
        parent(0).grad.data[i] += g[i] / (2.0 * n.value.data[i]);
      break;
    }
    case Op::clamp_min: {
      for (int i = 0; i < n.shape.size(); ++i)
        if (parent(0).value.data[i] > n.c0) parent(0).grad.data[i] += g[i];
      break;
    }
    case Op::sub_scalar: {
      double s = 0.0;
      for (int i = 0; i < n.shape.size(); ++i) {
        parent(0).grad.data[i] += g[i];
        s += g[i];
      }
      parent(1).grad.data[0] -= s;
      break;
    }
    case Op::div_scalar: {
      double sv = parent(1).value.data[0];
      double s = 0.0;
      for (int i = 0; i < n.shape.size(); ++i) {
        parent(0).grad.data[i] += g[i] / sv;
        s += g[i] * n.value.data[i];
      }
      parent(1).grad.data[0] -= s / sv;
      break;
    }
    case Op::sum_reduce: {
      for (int i = 0; i < parent(0).shape.size(); ++i)
        parent(0).grad.data[i] += g[0];
      break;
    }
    case Op::max_reduce: {
      double best = n.value.data[0];
      int ties = 0;
      for (double v : parent(0).value.data)
        if (v == best) ++ties;
      double share = g[0] / ties;
      for (int i = 0; i < parent(0).shape.size(); ++i)
        if (parent(0).value.data[i] == best) parent(0).grad.data[i] += share;
      break;
    }
    case Op::mean_center: {
      double mean_g = 0.0;
      for (int i = 0; i < n.shape.size(); ++i) mean_g += g[i];
      mean_g /= n.shape.size();
      for (int i = 0; i < n.shape.size(); ++i)
        parent(0).grad.data[i] += g[i] - mean_g;
      break;
    }
    case Op::slice: {
      int r0 = n.iaux[0], c0 = n.iaux[1];
      for (int r = 0; r < n.shape.rows; ++r)
        for (int c = 0; c < n.shape.cols; ++c)
          parent(0).grad.at(r0 + r, c0 + c) += n.grad.at(r, c);
      break;
    }
    case Op::concat_rows: {
      size_t na = parent(0).value.data.size();
      for (size_t i = 0; i < na; ++i) parent(0).grad.data[i] += g[i];
      for (size_t i = 0; i < parent(1).value.data.size(); ++i)
        parent(1).grad.data[i] += g[na + i];
      break;
    }
    case Op::concat_cols: {
      int ca = parent(0).shape.cols;
      for (int r = 0; r < n.shape.rows; ++r) {
        for (int c = 0; c < ca; ++c) parent(0).grad.at(r, c) += n.grad.at(r, c);
        for (int c = 0; c < parent(1).shape.cols; ++c)
          parent(1).grad.at(r, c) += n.grad.at(r, ca + c);
      }
      break;
    }
    case Op::reshape: {
      for (int i = 0; i < n.shape.size(); ++i) parent(0).grad.data[i] += g[i];
      break;
    }
    case Op::matvec: {
      Node& w = parent(0);
      Node& x = parent(1);
      for (int i = 0; i < w.shape.rows; ++i) {
        for (int j = 0; j < w.shape.cols; ++j) {
          w.grad.at(i, j) += g[i] * x.value.data[j];
          x.grad.data[j] += g[i] * w.value.at(i, j);
        }
      }
      break;
    }
    case Op::conv1d: {
      Node& x = parent(0);
      Node& w = parent(1);
      Node& b = parent(2);
      const int kernel = n.iaux[0], half = kernel / 2;
      const int cin = x.shape.rows, len = x.shape.cols;
      for (int co = 0; co < n.shape.rows; ++co) {
        for (int t = 0; t < len; ++t) {
          double go = n.grad.at(co, t);
          if (go == 0.0) continue;
          b.grad.data[co] += go;
          for (int ci = 0; ci < cin; ++ci) {
            for (int j = 0; j < kernel; ++j) {
              int src = t + j - half;
              if (src < 0 || src >= len) continue;
              w.grad.at(co, ci * kernel + j) += go * x.value.at(ci, src);
              x.grad.at(ci, src) += go * w.value.at(co, ci * kernel + j);
            }
          }
        }
      }
      break;
    }
    case Op::dft_real: {
      const int len = parent(0).shape.size();
      for (size_t j = 0; j < n.iaux.size(); ++j) {
        double go = g[j];
        if (go == 0.0) continue;
        for (int i = 0; i < len; ++i)
          parent(0).grad.data[i] += go * std::cos(kTwoPi * n.iaux[j] * i / len);
      }
      break;
    }
    case Op::dft_imag: {
      const int len = parent(0).shape.size();
      for (size_t j = 0; j < n.iaux.size(); ++j) {
        double go = g[j];
        if (go == 0.0) continue;
        for (int i = 0; i < len; ++i)
          parent(0).grad.data[i] -= go * std::sin(kTwoPi * n.iaux[j] * i / len);
      }
      break;
    }
    case Op::periodic_similarity: {
      Node& sn = parent(0);
      Node& ln = parent(1);
      const double* a = sn.value.data.data();
      const double* l = ln.value.data.data();
      const int la = sn.shape.size();
      for (size_t p = 0; p < n.daux.size(); ++p) {
        int tau = n.iaux[2 * p], k = n.iaux[2 * p + 1];
        detail::NcTerms t = detail::nc_terms(a, la, l + tau, la, k);
        detail::accumulate_nc_grad(a, la, l + tau, la, k, t, g[0] * n.daux[p],
                                   sn.grad.data.data(),
                                   ln.grad.data.data() + tau);
      }
      break;
    }
    case Op::padded_ncc_max: {
      Node& sn = parent(0);
      Node& ln = parent(1);
      const double* s = sn.value.data.data();
      const double* l = ln.value.data.data();
      const int ls = sn.shape.size(), ll = ln.shape.size();
      for (size_t p = 0; p < n.daux.size(); ++p) {
        int k = n.iaux[p];
        detail::NcTerms t = detail::nc_terms(s, ls, l, ll, k);
        detail::accumulate_nc_grad(s, ls, l, ll, k, t, g[0] * n.daux[p],
                                   sn.grad.data.data(), ln.grad.data.data());
      }
      break;
    }
  }
}

Recording record(const std::function<NodeRef(Tape&)>& build) {
  Recording rec;
  rec.output = build(rec.tape);
  return rec;
}

GradCheckReport grad_check(const std::function<NodeRef(Tape&, NodeRef)>& f,
                           const Tensor& point, double step, double tol) {
  require(step > 0.0, ErrorCode::invalid_argument, "grad_check: step must be > 0");
  GradCheckReport rep;

  Tape tape;
  NodeRef x = tape.input(point);
  NodeRef out = f(tape, x);
  tape.backward(out);
  Tensor analytic = tape.grad(x);

  auto eval = [&](const Tensor& p) {
    Tape t;
    NodeRef xi = t.input(p);
    return t.scalar_value(f(t, xi));
  };

  rep.pass = true;
  for (int i = 0; i < point.size(); ++i) {
    Tensor hi = point, lo = point;
    hi.data[i] += step;
    lo.data[i] -= step;
    double numeric = (eval(hi) - eval(lo)) / (2.0 * step);
    double a = analytic.data[i];
    double rel = std::abs(a - numeric) /
                 std::max({std::abs(a), std::abs(numeric), 1e-6});
    // A non-finite gradient (or one that defeats the comparison) is a
    // failure in its own right.
    if (!std::isfinite(a) || !std::isfinite(numeric) || !std::isfinite(rel))
      rel = std::numeric_limits<double>::infinity();
    if (rel > rep.max_rel_err) {
      rep.max_rel_err = rel;
      rep.worst_coord = i;
      rep.analytic = a;
      rep.numeric = numeric;
    }
  }
  rep.pass = rep.max_rel_err <= tol;
  if (!rep.pass)
    rep.note = "gradient mismatch at coordinate " +
               std::to_string(rep.worst_coord) +
               " (possible non-differentiable point: kink or max tie)";
  return rep;
}

}  // namespace pulsekit::ad
