#include "gdex/nn.hpp"

namespace gdex::nn {

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const Mat* m : values) n += m->size();
  return n;
}

Vec ParamSet::flatten() const {
  Vec out(scalar_count());
  Eigen::Index at = 0;
  for (const Mat* m : values) {
    out.segment(at, m->size()) = Eigen::Map<const Vec>(m->data(), m->size());
    at += m->size();
  }
  return out;
}

void ParamSet::unflatten(const Vec& flat) {
  Eigen::Index at = 0;
  for (Mat* m : values) {
    Eigen::Map<Vec>(m->data(), m->size()) = flat.segment(at, m->size());
    at += m->size();
  }
}

Vec ParamSet::flatten_grads() const {
  Vec out(scalar_count());
  Eigen::Index at = 0;
  for (const Mat* g : grads) {
    out.segment(at, g->size()) = Eigen::Map<const Vec>(g->data(), g->size());
    at += g->size();
  }
  return out;
}

void ParamSet::zero_grads() {
  for (Mat* g : grads) g->setZero();
}

void Dense::init(int in, int out, std::mt19937_64& rng, bool bias) {
  has_bias = bias;
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  W.resize(in, out);
  for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = dist(rng);
  b = Mat::Zero(1, out);
  if (has_bias)
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = dist(rng);
  gW = Mat::Zero(in, out);
  gb = Mat::Zero(1, out);
}

Mat Dense::forward(const Mat& x) const {
  Mat y = x * W;
  if (has_bias) y.rowwise() += b.row(0);
  return y;
}

Mat Dense::backward(const Mat& x, const Mat& upstream) {
  gW += x.transpose() * upstream;
  if (has_bias) gb += upstream.colwise().sum();
  return upstream * W.transpose();
}

void Adam::step(ParamSet& params) {
  if (m_.empty()) {
    for (const Mat* g : params.grads) {
      m_.push_back(Mat::Zero(g->rows(), g->cols()));
      v_.push_back(Mat::Zero(g->rows(), g->cols()));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    const Mat& g = *params.grads[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    const Mat m_hat = m_[i] / bc1;
    const Mat v_hat = v_[i] / bc2;
    params.values[i]->array() -=
        lr_ * m_hat.array() / (v_hat.array().sqrt() + eps_);
  }
}

ActorNet::ActorNet(int state_dim, int h1, int h2, std::mt19937_64& rng)
    : state_dim_(state_dim) {
  d1_.init(state_dim, h1, rng);
  d2_.init(h1, h2, rng);
  d3_.init(h2, 2, rng);
}

ActorNet::Cache ActorNet::run(const Mat& states) const {
  Cache c;
  c.z1 = d1_.forward(states);
  c.z2 = d2_.forward(relu(c.z1));
  c.out = d3_.forward(relu(c.z2)).array().tanh().matrix();
  return c;
}

Mat ActorNet::forward(const Mat& states) const {
  cache_ = run(states);
  return cache_.out;
}

Vec ActorNet::forward_single(const Vec& state) const {
  return run(state.transpose()).out.row(0).transpose();
}

void ActorNet::backward(const Mat& states, const Mat& upstream_actions) {
  const Cache& c = cache_;
  // d tanh(z) = 1 - tanh(z)^2
  Mat d3_up =
      ((1.0 - c.out.array().square()) * upstream_actions.array()).matrix();
  Mat d2_up = relu_grad(c.z2, d3_.backward(relu(c.z2), d3_up));
  Mat d1_up = relu_grad(c.z1, d2_.backward(relu(c.z1), d2_up));
  d1_.backward(states, d1_up);
}

ParamSet ActorNet::params() {
  return {{&d1_.W, &d1_.b, &d2_.W, &d2_.b, &d3_.W, &d3_.b},
          {&d1_.gW, &d1_.gb, &d2_.gW, &d2_.gb, &d3_.gW, &d3_.gb}};
}

CriticNet::CriticNet(int state_dim, int action_dim, int h1, int h2,
                     std::mt19937_64& rng) {
  ds_.init(state_dim, h1, rng);
  tau1_.init(h1, h2, rng, /*bias=*/false);
  tau2_.init(action_dim, h2, rng);
  out_.init(h2, 1, rng);
}

CriticNet::Cache CriticNet::run(const Mat& states, const Mat& actions) const {
  Cache c;
  c.zs = ds_.forward(states);
  c.ls = relu(c.zs);
  c.lc = tau1_.forward(c.ls) + tau2_.forward(actions);
  return c;
}

Vec CriticNet::forward(const Mat& states, const Mat& actions) const {
  cache_ = run(states, actions);
  return out_.forward(relu(cache_.lc)).col(0);
}

Mat CriticNet::backward(const Mat& states, const Mat& actions,
                        const Vec& upstream_q) {
  const Cache& c = cache_;
  Mat lc_up = relu_grad(c.lc, out_.backward(relu(c.lc), upstream_q));
  Mat action_grad = tau2_.backward(actions, lc_up);
  Mat ls_up = tau1_.backward(c.ls, lc_up);
  ds_.backward(states, relu_grad(c.zs, ls_up));
  return action_grad;
}

Mat CriticNet::action_gradient(const Mat& states, const Mat& actions) const {
  const Cache c = run(states, actions);
  const double scale = 1.0 / static_cast<double>(states.rows());
  Mat q_up = Mat::Constant(states.rows(), 1, scale);
  Mat lc_up = relu_grad(c.lc, q_up * out_.W.transpose());
  return lc_up * tau2_.W.transpose();
}

ParamSet CriticNet::params() {
  return {{&ds_.W, &ds_.b, &tau1_.W, &tau2_.W, &tau2_.b, &out_.W, &out_.b},
          {&ds_.gW, &ds_.gb, &tau1_.gW, &tau2_.gW, &tau2_.gb, &out_.gW,
           &out_.gb}};
}

void soft_update(ParamSet target, ParamSet source, double rho) {
  for (std::size_t i = 0; i < target.values.size(); ++i)
    *target.values[i] = (1.0 - rho) * *source.values[i] + rho * *target.values[i];
}

void hard_copy(ParamSet target, ParamSet source) {
  for (std::size_t i = 0; i < target.values.size(); ++i)
    *target.values[i] = *source.values[i];
}

}  // namespace gdex::nn
