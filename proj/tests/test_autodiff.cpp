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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>

#include "autodiff.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "xcorr.hpp"

using namespace pulsekit;
using ad::NodeRef;
using ad::Tape;
using ad::Tensor;

TEST_CASE("square function: forward value and gradient") {
  Tape t;
  NodeRef x = t.input(Tensor::scalar(3.0), "x");
  NodeRef y = t.mul(x, x);
  CHECK(t.scalar_value(y) == doctest::Approx(9.0));
  t.backward(y);
  CHECK(t.grad(x).data[0] == doctest::Approx(6.0));
}

TEST_CASE("relu forward and the zero side of its gradient") {
  Tape t;
  NodeRef x = t.input(Tensor::scalar(2.0));
  NodeRef y = t.relu(t.affine(x, -1.0, 0.0));  // relu(-x)
  CHECK(t.scalar_value(y) == doctest::Approx(0.0));
  t.backward(y);
  CHECK(t.grad(x).data[0] == doctest::Approx(0.0));
}

TEST_CASE("max over two values propagates only to the winner") {
  Tape t;
  NodeRef x = t.input(Tensor::scalar(2.0));
  NodeRef y = t.input(Tensor::scalar(5.0));
  NodeRef m = t.max_reduce(t.concat_cols(x, y));
  CHECK(t.scalar_value(m) == doctest::Approx(5.0));
  t.backward(m);
  CHECK(t.grad(x).data[0] == doctest::Approx(0.0));
  CHECK(t.grad(y).data[0] == doctest::Approx(1.0));
}

TEST_CASE("max ties split the gradient equally") {
  Tape t;
  NodeRef x = t.input(Tensor::row({3.0, 3.0, 1.0}));
  NodeRef m = t.max_reduce(x);
  t.backward(m);
  CHECK(t.grad(x).data[0] == doctest::Approx(0.5));
  CHECK(t.grad(x).data[1] == doctest::Approx(0.5));
  CHECK(t.grad(x).data[2] == doctest::Approx(0.0));
}

TEST_CASE("dft primitives match the direct DFT oracle on an impulse") {
  for (int pos : {0, 3}) {
    std::vector<double> x(8, 0.0);
    x[pos] = 1.0;
    Tape t;
    NodeRef xn = t.input(Tensor::row(x));
    std::vector<int> bins = {0, 1, 2, 3, 4, 5, 6, 7};
    NodeRef re = t.dft_real(xn, bins);
    NodeRef im = t.dft_imag(xn, bins);
    auto ref = oracle::dft(x);
    for (int k = 0; k < 8; ++k) {
      CHECK(t.value(re).data[k] == doctest::Approx(ref[k].real()).epsilon(1e-12));
      CHECK(t.value(im).data[k] == doctest::Approx(ref[k].imag()).epsilon(1e-12));
    }
  }
}

TEST_CASE("dft gradient scales linearly with the input scaling") {
  Rng rng(21);
  std::vector<double> x = oracle::random_signal(rng, 16);
  const double alpha = 2.75;
  auto grad_of = [&](double scale) {
    Tape t;
    NodeRef xn = t.input(Tensor::row(x));
    NodeRef y = t.sum_reduce(
        t.mul(t.dft_real(t.affine(xn, scale, 0.0), {1, 2, 3}),
              t.dft_real(t.affine(xn, scale, 0.0), {1, 2, 3})));
    t.backward(y);
    return t.grad(xn).data;
  };
  std::vector<double> g1 = grad_of(1.0);
  std::vector<double> ga = grad_of(alpha);
  for (size_t i = 0; i < g1.size(); ++i)
    CHECK(ga[i] == doctest::Approx(alpha * alpha * g1[i]).epsilon(1e-9));
}

TEST_CASE("backward is deterministic: identical tapes, identical bits") {
  auto run = [] {
    Rng rng(77);
    Tape t;
    NodeRef x = t.input(Tensor::row(oracle::random_signal(rng, 40)), "x");
    NodeRef w = t.input(Tensor::matrix(3, 40, oracle::random_signal(rng, 120)),
                        "w");
    NodeRef y = t.matvec(w, t.reshape(t.relu(x), {40, 1}));
    NodeRef out = t.sum_reduce(t.mul(y, y));
    t.backward(out);
    return std::make_pair(t.grad(x).data, t.grad(w).data);
  };
  auto [gx1, gw1] = run();
  auto [gx2, gw2] = run();
  CHECK(std::memcmp(gx1.data(), gx2.data(), gx1.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(gw1.data(), gw2.data(), gw1.size() * sizeof(double)) == 0);
}

TEST_CASE("backward rejects non-scalar outputs") {
  Tape t;
  NodeRef x = t.input(Tensor::row({1.0, 2.0}));
  CHECK_THROWS_AS(t.backward(x), Error);
}

TEST_CASE("grad_check: polynomial passes at tight tolerance") {
  Rng rng(31);
  Tensor point = Tensor::row(oracle::random_signal(rng, 6));
  auto f = [](Tape& t, NodeRef x) {
    NodeRef x2 = t.mul(x, x);
    NodeRef x3 = t.mul(x2, x);
    return t.sum_reduce(t.add(x3, t.affine(x2, -2.0, 5.0)));
  };
  ad::GradCheckReport rep = ad::grad_check(f, point, 1e-5, 1e-6);
  CHECK(rep.pass);
}

TEST_CASE("grad_check: |x| at zero is flagged as non-differentiable") {
  // |x| as sqrt(x^2): the backward pass divides by zero at the kink.
  auto f = [](Tape& t, NodeRef x) {
    return t.sum_reduce(t.sqrt(t.mul(x, x)));
  };
  CHECK(ad::grad_check(f, Tensor::scalar(1.3), 1e-6, 1e-6).pass);
  ad::GradCheckReport rep = ad::grad_check(f, Tensor::scalar(0.0), 1e-5, 1e-6);
  CHECK_FALSE(rep.pass);
  CHECK(rep.note.find("non-differentiable") != std::string::npos);
  CHECK(rep.worst_coord == 0);

  // A one-sided kink is caught too: relu at exactly 0 has subgradient 0 but
  // central difference 1/2.
  auto g = [](Tape& t, NodeRef x) { return t.sum_reduce(t.relu(x)); };
  CHECK_FALSE(ad::grad_check(g, Tensor::scalar(0.0), 1e-5, 1e-6).pass);
}

TEST_CASE("gradient times direction equals the directional derivative") {
  Rng rng(41);
  std::vector<double> p = oracle::random_signal(rng, 12);
  std::vector<double> dir = oracle::random_noise(rng, 12);
  auto eval = [&](const std::vector<double>& v, std::vector<double>* grad) {
    Tape t;
    NodeRef x = t.input(Tensor::row(v));
    NodeRef y = t.sum_reduce(t.mul(t.relu(x), t.mul(x, x)));
    if (grad) {
      t.backward(y);
      *grad = t.grad(x).data;
    }
    return t.scalar_value(y);
  };
  std::vector<double> g;
  eval(p, &g);
  const double h = 1e-6;
  std::vector<double> hi = p, lo = p;
  for (size_t i = 0; i < p.size(); ++i) {
    hi[i] += h * dir[i];
    lo[i] -= h * dir[i];
  }
  double numeric = (eval(hi, nullptr) - eval(lo, nullptr)) / (2 * h);
  double analytic = 0.0;
  for (size_t i = 0; i < p.size(); ++i) analytic += g[i] * dir[i];
  CHECK(analytic == doctest::Approx(numeric).epsilon(1e-5));
}

TEST_CASE("grad_check covers the structural and elementwise primitives") {
  Rng rng(51);

  SUBCASE("matvec + slice + concat + mean_center") {
    Tensor point = Tensor::row(oracle::random_signal(rng, 10));
    std::vector<double> wdata = oracle::random_signal(rng, 40);
    auto f = [wdata](Tape& t, NodeRef x) {
      NodeRef w = t.constant(Tensor::matrix(4, 10, wdata));
      NodeRef y = t.matvec(w, t.reshape(t.mean_center(x), {10, 1}));
      NodeRef s = t.slice(y, 1, 0, 2, 1);
      NodeRef c = t.concat_rows(s, y);
      return t.sum_reduce(t.mul(c, c));
    };
    CHECK(ad::grad_check(f, point, 1e-6, 1e-6).pass);
  }

  SUBCASE("log, sqrt, div, clamp_min on positive inputs") {
    std::vector<double> v(8);
    for (double& x : v) x = rng.next_uniform(0.5, 3.0);
    auto f = [](Tape& t, NodeRef x) {
      NodeRef num = t.log(t.clamp_min(x, 1e-12));
      NodeRef den = t.sqrt(x);
      return t.sum_reduce(t.div(num, den));
    };
    CHECK(ad::grad_check(f, Tensor::row(v), 1e-6, 1e-5).pass);
  }

  SUBCASE("conv1d") {
    Tensor point = Tensor::matrix(2, 12, oracle::random_signal(rng, 24));
    std::vector<double> w = oracle::random_signal(rng, 3 * 2 * 5);
    std::vector<double> b = {0.1, -0.2, 0.05};
    auto f = [w, b](Tape& t, NodeRef x) {
      NodeRef wn = t.constant(Tensor::matrix(3, 10, w));
      NodeRef bn = t.constant(Tensor::col(b));
      NodeRef y = t.conv1d(x, wn, bn, 3, 5);
      return t.sum_reduce(t.mul(y, y));
    };
    CHECK(ad::grad_check(f, point, 1e-6, 1e-5).pass);
  }

  SUBCASE("conv1d weight gradient") {
    Tensor point = Tensor::matrix(3, 10, oracle::random_signal(rng, 30));
    std::vector<double> x = oracle::random_signal(rng, 24);
    auto f = [x](Tape& t, NodeRef w) {
      NodeRef xn = t.constant(Tensor::matrix(2, 12, x));
      NodeRef bn = t.constant(Tensor::col({0.0, 0.0, 0.0}));
      NodeRef y = t.conv1d(xn, w, bn, 3, 5);
      return t.sum_reduce(t.mul(y, y));
    };
    CHECK(ad::grad_check(f, point, 1e-6, 1e-5).pass);
  }

  SUBCASE("div_scalar and sub_scalar") {
    std::vector<double> v(6);
    for (double& x : v) x = rng.next_uniform(0.5, 2.0);
    auto f = [](Tape& t, NodeRef x) {
      NodeRef s = t.sum_reduce(x);
      NodeRef z = t.div_scalar(t.sub_scalar(x, t.affine(s, 0.1, 0.0)), s);
      return t.sum_reduce(t.mul(z, z));
    };
    CHECK(ad::grad_check(f, Tensor::row(v), 1e-6, 1e-5).pass);
  }
}

TEST_CASE("periodic_similarity matches the plain SWM-NCC + FP path") {
  Rng rng(61);
  for (int trial = 0; trial < 8; ++trial) {
    Signal shrt, lng;
    shrt.fps = lng.fps = 20;
    shrt.samples = oracle::random_signal(rng, 40);
    lng.samples = oracle::random_signal(rng, 40 + rng.next_u64() % 80);
    Tape t;
    NodeRef a = t.input(Tensor::row(shrt.samples));
    NodeRef b = t.input(Tensor::row(lng.samples));
    NodeRef v = t.periodic_similarity(a, b, 20, 1.5);
    CHECK(t.scalar_value(v) ==
          doctest::Approx(fp(swm_ncc(shrt, lng), 20, 1.5)).epsilon(1e-12));
  }
}

TEST_CASE("periodic_similarity gradient passes finite differences") {
  Rng rng(62);
  std::vector<double> lng = oracle::random_signal(rng, 90);

  SUBCASE("w.r.t. the short signal") {
    Tensor point = Tensor::row(oracle::random_signal(rng, 24));
    auto f = [lng](Tape& t, NodeRef x) {
      NodeRef b = t.constant(Tensor::row(lng));
      return t.periodic_similarity(x, b, 12, 1.5);
    };
    ad::GradCheckReport rep = ad::grad_check(f, point, 1e-6, 1e-4);
    CHECK(rep.pass);
  }

  SUBCASE("w.r.t. the long signal") {
    std::vector<double> shrt = oracle::random_signal(rng, 24);
    Tensor point = Tensor::row(lng);
    auto f = [shrt](Tape& t, NodeRef x) {
      NodeRef a = t.constant(Tensor::row(shrt));
      return t.periodic_similarity(a, x, 12, 1.5);
    };
    ad::GradCheckReport rep = ad::grad_check(f, point, 1e-6, 1e-4);
    CHECK(rep.pass);
  }
}

TEST_CASE("padded_ncc_max value and gradient") {
  Rng rng(63);
  std::vector<double> gt = oracle::random_signal(rng, 60);
  std::vector<double> pred = oracle::random_signal(rng, 40);

  Signal a, b;
  a.fps = b.fps = 20;
  a.samples = pred;
  a.samples.resize(60, 0.0);
  b.samples = gt;
  {
    Tape t;
    NodeRef an = t.input(Tensor::row(pred));
    NodeRef bn = t.constant(Tensor::row(gt));
    NodeRef v = t.padded_ncc_max(an, bn);
    RunningCorrelation c = ncc(a, b);
    CHECK(t.scalar_value(v) ==
          doctest::Approx(*std::max_element(c.values.begin(), c.values.end()))
              .epsilon(1e-12));
  }
  auto f = [gt](Tape& t, NodeRef x) {
    NodeRef b2 = t.constant(Tensor::row(gt));
    return t.padded_ncc_max(x, b2);
  };
  CHECK(ad::grad_check(f, Tensor::row(pred), 1e-6, 1e-4).pass);
}
