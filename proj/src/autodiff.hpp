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

#ifndef PULSEKIT_AUTODIFF_HPP_
#define PULSEKIT_AUTODIFF_HPP_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "error.hpp"

namespace pulsekit::ad {

// Reverse-mode tape over small dense tensors of rank <= 2. Values are never
// mutated after recording; backward walks the tape once in reverse order, so
// identical tapes produce bit-identical gradients.

struct Shape {
  int rows = 1;
  int cols = 1;
  int size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

struct Tensor {
  Shape shape{0, 0};
  std::vector<double> data;

  static Tensor zeros(Shape s);
  static Tensor scalar(double v);
  static Tensor row(std::vector<double> v);
  static Tensor col(std::vector<double> v);
  static Tensor matrix(int rows, int cols, std::vector<double> v);

  int size() const { return shape.size(); }
  double& at(int r, int c) { return data[static_cast<size_t>(r) * shape.cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * shape.cols + c]; }
};

struct NodeRef {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

enum class Op {
  input,
  constant,
  add,
  sub,
  mul,
  div,
  affine,      // a*x + b elementwise
  relu,
  log,
  sqrt,
  clamp_min,
  sub_scalar,  // x - s, s scalar node
  div_scalar,  // x / s
  sum_reduce,
  max_reduce,  // ties split equally
  mean_center, // x - mean(x)
  slice,
  concat_rows,
  concat_cols,
  reshape,
  matvec,
  conv1d,      // same zero padding, odd kernel
  dft_real,
  dft_imag,
  periodic_similarity,  // FP(SWM-NCC(short, long), delta_t)
  padded_ncc_max,       // max over lags of the zero-padded classical NCC
};

class Tape {
 public:
  NodeRef input(Tensor v, const std::string& name = {});
  NodeRef constant(Tensor v);

  NodeRef add(NodeRef a, NodeRef b);
  NodeRef sub(NodeRef a, NodeRef b);
  NodeRef mul(NodeRef a, NodeRef b);
  NodeRef div(NodeRef a, NodeRef b);
  NodeRef affine(NodeRef x, double a, double b);
  NodeRef relu(NodeRef x);
  NodeRef log(NodeRef x);
  NodeRef sqrt(NodeRef x);
  NodeRef clamp_min(NodeRef x, double lo);
  NodeRef sub_scalar(NodeRef x, NodeRef s);
  NodeRef div_scalar(NodeRef x, NodeRef s);
  NodeRef sum_reduce(NodeRef x);
  NodeRef max_reduce(NodeRef x);
  NodeRef mean_center(NodeRef x);
  NodeRef slice(NodeRef x, int r0, int c0, int rows, int cols);
  NodeRef concat_rows(NodeRef a, NodeRef b);
  NodeRef concat_cols(NodeRef a, NodeRef b);
  NodeRef reshape(NodeRef x, Shape s);
  NodeRef matvec(NodeRef w, NodeRef x);
  NodeRef conv1d(NodeRef x, NodeRef w, NodeRef b, int out_channels, int kernel);
  NodeRef dft_real(NodeRef x, std::vector<int> bins);
  NodeRef dft_imag(NodeRef x, std::vector<int> bins);
  NodeRef periodic_similarity(NodeRef shorter, NodeRef longer, int fps,
                              double delta_t_s);
  NodeRef padded_ncc_max(NodeRef a, NodeRef b);

  const Tensor& value(NodeRef n) const;
  double scalar_value(NodeRef n) const;

  // Reverse pass from a scalar output. Clears previous gradients.
  void backward(NodeRef output);
  const Tensor& grad(NodeRef n) const;

  NodeRef param(const std::string& name) const;
  std::map<std::string, Tensor> param_grads() const;
  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Op op;
    Shape shape;
    std::vector<int> parents;
    Tensor value;
    Tensor grad;
    // Op-specific payload.
    double c0 = 0.0, c1 = 0.0;
    std::vector<int> iaux;
    std::vector<double> daux;
  };

  NodeRef push(Node n);
  const Node& at(NodeRef r) const;
  void backward_step(int idx);

  std::vector<Node> nodes_;
  std::map<std::string, int> params_;
};

// Records a graph built by `build` on a fresh tape.
struct Recording {
  Tape tape;
  NodeRef output;
};
Recording record(const std::function<NodeRef(Tape&)>& build);

// Central-difference verification of the gradient of f at `point`, where f
// maps an input node to a scalar node on the given tape. rel_err uses
// |a - n| / max(|a|, |n|, 1e-6) per coordinate.
struct GradCheckReport {
  bool pass = false;
  double max_rel_err = 0.0;
  int worst_coord = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  std::string note;
};

GradCheckReport grad_check(
    const std::function<NodeRef(Tape&, NodeRef)>& f, const Tensor& point,
    double step, double tol);

}  // namespace pulsekit::ad

#endif  // PULSEKIT_AUTODIFF_HPP_
