// Copyright 2026 The ActionNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Straight-line Eigen re-implementation of the scoring model used as a test
// oracle. It shares nothing with the library beyond the parameter layout:
// no autodiff graph, no library kernels. Templated on the scalar so the
// oracle can run in extended precision.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

#include "actionnet/model.hpp"

namespace refm {

template <class S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
using Mat = MatT<double>;

template <class S = double>
MatT<S> to_mat(const actionnet::Tensor& t) {
  MatT<S> m(t.rows(), t.cols());
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) m(r, c) = static_cast<S>(t(r, c));
  return m;
}

template <class S>
MatT<S> relu(const MatT<S>& m) {
  return m.cwiseMax(S(0));
}

template <class S>
S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

// exp(-||e_i - e_j|| / K), pair by pair.
template <class S>
MatT<S> raw_adjacency(const MatT<S>& e, double k) {
  const Eigen::Index n = e.rows();
  MatT<S> a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        a(i, j) = S(1);
        continue;
      }
      S acc = 0;
      for (Eigen::Index d = 0; d < e.cols(); ++d) {
        const S diff = e(i, d) - e(j, d);
        acc += diff * diff;
      }
      a(i, j) = std::exp(-std::sqrt(acc) / S(k));
    }
  }
  return a;
}

// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I.
template <class S>
MatT<S> normalize_adjacency(const MatT<S>& a) {
  const Eigen::Index n = a.rows();
  MatT<S> t = a + MatT<S>::Identity(n, n);
  std::vector<S> deg(static_cast<std::size_t>(n), S(0));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) deg[static_cast<std::size_t>(i)] += t(i, j);
  MatT<S> out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = t(i, j) / std::sqrt(deg[static_cast<std::size_t>(i)] * deg[static_cast<std::size_t>(j)]);
  return out;
}

template <class S>
struct Branch {
  MatT<S> w1, b1, w2, b2;
  bool has_gcn = false;
  MatT<S> g1, g2;
  bool has_att = false;
  MatT<S> wh, bh, ws, bs;
};

template <class S>
struct Model {
  std::optional<Branch<S>> dyn, stat;
  MatT<S> h1, hb1, h2, hb2;
};

template <class S>
Branch<S> to_branch(const actionnet::BranchParams& p) {
  Branch<S> b;
  b.w1 = to_mat<S>(p.embed1.weight);
  b.b1 = to_mat<S>(p.embed1.bias);
  b.w2 = to_mat<S>(p.embed2.weight);
  b.b2 = to_mat<S>(p.embed2.bias);
  if (p.gcn) {
    b.has_gcn = true;
    b.g1 = to_mat<S>(p.gcn->layer1);
    b.g2 = to_mat<S>(p.gcn->layer2);
  }
  if (p.attention) {
    b.has_att = true;
    b.wh = to_mat<S>(p.attention->hidden.weight);
    b.bh = to_mat<S>(p.attention->hidden.bias);
    b.ws = to_mat<S>(p.attention->score.weight);
    b.bs = to_mat<S>(p.attention->score.bias);
  }
  return b;
}

template <class S>
Model<S> to_model(const actionnet::ModelParams& p) {
  Model<S> m;
  if (p.dynamic) m.dyn = to_branch<S>(*p.dynamic);
  if (p.stat) m.stat = to_branch<S>(*p.stat);
  m.h1 = to_mat<S>(p.head1.weight);
  m.hb1 = to_mat<S>(p.head1.bias);
  m.h2 = to_mat<S>(p.head2.weight);
  m.hb2 = to_mat<S>(p.head2.bias);
  return m;
}

// Points where a branch evaluation can resume from cached state.
enum Step {
  kZ1,    // Z1 = X W1 + b1
  kA1,    // A1 = relu(Z1)
  kZ2,    // Z2 = A1 W2 + b2
  kE,     // E = relu(Z2), adjacency
  kQ1,    // Q1 = Ahat E Wg1
  kG1,    // G1 = relu(Q1)
  kQ2,    // Q2 = Ahat G1 Wg2
  kC,     // C = relu(Q2), or E without a GCN
  kHpre,  // F = [E | C], Hpre = F Wh + bh
  kEps,   // weights and stream feature
};

template <class S>
struct BranchState {
  MatT<S> z1, a1, z2, e, ahat, q1, g1, q2, c, f, hpre, eps;
  MatT<S> feature;  // 1 x 512
};

template <class S>
struct Options {
  double kernel_scale = 1.0;
  // Used as the adjacency instead of recomputing it from E.
  const MatT<S>* frozen = nullptr;
};

template <class S>
MatT<S> add_row(const MatT<S>& m, const MatT<S>& row) {
  return m.rowwise() + row.row(0);
}

template <class S>
void run_branch(const Branch<S>& p, const MatT<S>& x, BranchState<S>& s, Step from, const Options<S>& o) {
  if (from <= kZ1) s.z1 = add_row<S>(x * p.w1, p.b1);
  if (from <= kA1) s.a1 = relu<S>(s.z1);
  if (from <= kZ2) s.z2 = add_row<S>(s.a1 * p.w2, p.b2);
  if (from <= kE) {
    s.e = relu<S>(s.z2);
    s.ahat = o.frozen ? *o.frozen : normalize_adjacency<S>(raw_adjacency<S>(s.e, o.kernel_scale));
  }
  if (p.has_gcn) {
    if (from <= kQ1) s.q1 = s.ahat * s.e * p.g1;
    if (from <= kG1) s.g1 = relu<S>(s.q1);
    if (from <= kQ2) s.q2 = s.ahat * s.g1 * p.g2;
    if (from <= kC) s.c = relu<S>(s.q2);
  } else if (from <= kC) {
    s.c = s.e;
  }
  const Eigen::Index n = s.e.rows();
  if (from <= kHpre) {
    s.f.resize(n, s.e.cols() + s.c.cols());
    s.f << s.e, s.c;
    if (p.has_att) s.hpre = add_row<S>(s.f * p.wh, p.bh);
  }
  if (p.has_att) {
    const MatT<S> scores = (relu<S>(s.hpre) * p.ws).array() + p.bs(0, 0);
    const S top = scores.maxCoeff();
    s.eps.resize(n, 1);
    S total = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      s.eps(i, 0) = std::exp(scores(i, 0) - top);
      total += s.eps(i, 0);
    }
    s.eps /= total;
  } else {
    s.eps = MatT<S>::Constant(n, 1, S(1) / static_cast<S>(n));
  }
  s.feature = s.eps.transpose() * s.f;
}

template <class S>
MatT<S> head_input(const BranchState<S>* dyn, const BranchState<S>* stat) {
  if (dyn && stat) {
    MatT<S> z(1, dyn->feature.cols() + stat->feature.cols());
    z << dyn->feature, stat->feature;
    return z;
  }
  return dyn ? dyn->feature : stat->feature;
}

template <class S>
MatT<S> head_pre(const Model<S>& m, const MatT<S>& z) {
  return add_row<S>(z * m.h1, m.hb1);
}

template <class S>
S score_from_pre(const Model<S>& m, const MatT<S>& u) {
  return sigmoid<S>((relu<S>(u) * m.h2)(0, 0) + m.hb2(0, 0));
}

template <class S>
S loss_from_pre(const Model<S>& m, const MatT<S>& u, double target) {
  const S d = score_from_pre<S>(m, u) - static_cast<S>(target);
  return d * d;
}

// True when every ReLU input keeps its sign.
template <class S>
bool same_signs(const MatT<S>& a, const MatT<S>& b) {
  if (a.size() != b.size()) return a.size() == 0 || b.size() == 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if ((a.data()[i] > 0) != (b.data()[i] > 0)) return false;
  }
  return true;
}

template <class S>
bool same_pattern(const BranchState<S>& a, const BranchState<S>& b) {
  return same_signs<S>(a.z1, b.z1) && same_signs<S>(a.z2, b.z2) && same_signs<S>(a.q1, b.q1) &&
         same_signs<S>(a.q2, b.q2) && same_signs<S>(a.hpre, b.hpre);
}

}  // namespace refm
