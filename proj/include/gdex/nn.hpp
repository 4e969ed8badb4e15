#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

namespace gdex::nn {

using Mat = Eigen::MatrixXd;  // rows = batch samples
using Vec = Eigen::VectorXd;

inline Mat relu(const Mat& x) { return x.cwiseMax(0.0); }
inline Mat relu_grad(const Mat& pre, const Mat& upstream) {
  return ((pre.array() > 0.0).cast<double>() * upstream.array()).matrix();
}

// Mutable view over a network's parameters and their gradients, in a fixed
// documented order. Shapes in `values` and `grads` correspond pairwise.
struct ParamSet {
  std::vector<Mat*> values;
  std::vector<Mat*> grads;

  std::size_t scalar_count() const;
  Vec flatten() const;
  void unflatten(const Vec& flat);
  Vec flatten_grads() const;
  void zero_grads();
};

// Fully connected layer, row-major batch convention: y = x * W + b.
// Biases are stored as 1 x out matrices so ParamSet stays homogeneous.
struct Dense {
  Mat W, b;
  Mat gW, gb;
  bool has_bias = true;

  void init(int in, int out, std::mt19937_64& rng, bool bias = true);
  Mat forward(const Mat& x) const;
  // Accumulates gW/gb from the cached input; returns the input gradient.
  Mat backward(const Mat& x, const Mat& upstream);
};

// Per-parameter adaptive-moment optimizer over a ParamSet.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamSet& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Mat> m_, v_;
};

// Actor: state -> FC(h1) ReLU -> FC(h2) ReLU -> FC(2) tanh.
class ActorNet {
 public:
  ActorNet() = default;
  ActorNet(int state_dim, int h1, int h2, std::mt19937_64& rng);

  Mat forward(const Mat& states) const;           // batch x 2, in (-1,1)
  Vec forward_single(const Vec& state) const;

  // Backward for loss gradient dL/d(action); populates parameter grads.
  void backward(const Mat& states, const Mat& upstream_actions);

  ParamSet params();
  const ActorNet& as_const() const { return *this; }
  int state_dim() const { return state_dim_; }
  int hidden1() const { return d1_.W.cols(); }
  int hidden2() const { return d2_.W.cols(); }

 private:
  struct Cache {
    Mat z1, z2, out;
  };
  Cache run(const Mat& states) const;

  int state_dim_ = 0;
  Dense d1_, d2_, d3_;
  mutable Cache cache_;
};

// Twin-critic branch: L_s = ReLU(FC(s)); L_c = L_s*W_t1 + a*W_t2 + b_t2;
// Q = FC(ReLU(L_c)).
class CriticNet {
 public:
  CriticNet() = default;
  CriticNet(int state_dim, int action_dim, int h1, int h2,
            std::mt19937_64& rng);

  Vec forward(const Mat& states, const Mat& actions) const;  // batch of Q

  // Backward from dL/dQ; populates parameter grads and returns dL/d(action).
  Mat backward(const Mat& states, const Mat& actions, const Vec& upstream_q);
  // Gradient of mean(Q) w.r.t. actions only; parameter grads untouched.
  Mat action_gradient(const Mat& states, const Mat& actions) const;

  ParamSet params();

 private:
  struct Cache {
    Mat zs, ls, lc;
  };
  Cache run(const Mat& states, const Mat& actions) const;

  Dense ds_;    // state path
  Dense tau1_;  // on L_s, no bias
  Dense tau2_;  // on action, carries the CFC bias
  Dense out_;
  mutable Cache cache_;
};

// theta_target <- (1 - rho) * theta + rho * theta_target
void soft_update(ParamSet target, ParamSet source, double rho);
void hard_copy(ParamSet target, ParamSet source);

}  // namespace gdex::nn
