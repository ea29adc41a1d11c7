#ifndef LANDER_NETWORKS_HPP_
#define LANDER_NETWORKS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lander/environment.hpp"  // Rng

namespace lander {

// Four-layer recurrent architecture: dense tanh, GRU, dense tanh, linear.
// h1 = 10 * obs_dim, h3 = 10 * act_dim (policy) or 5 (value),
// h2 = round(sqrt(h1 * h3)).
struct NetworkSpec {
  int obs_dim = 0;
  int act_dim = 0;  // 0 for value networks
  int h1 = 0;
  int h2 = 0;
  int h3 = 0;
  int out_dim = 0;

  static NetworkSpec policy(int obs_dim, int act_dim);
  static NetworkSpec value(int obs_dim);
  bool operator==(const NetworkSpec&) const = default;
};

struct NetParams {
  Eigen::MatrixXd w1;               // h1 x obs
  Eigen::VectorXd b1;               // h1
  Eigen::MatrixXd wz, wr, wn;       // h2 x h1
  Eigen::MatrixXd uz, ur, un;       // h2 x h2
  Eigen::VectorXd bz, br, bn;       // h2
  Eigen::MatrixXd w3;               // h3 x h2
  Eigen::VectorXd b3;               // h3
  Eigen::MatrixXd wo;               // out x h3
  Eigen::VectorXd bo;               // out

  static NetParams zeros(const NetworkSpec& spec);
};

// Applies f(name, tensor) to every parameter tensor in a fixed order.
template <class P, class F>
void for_each_tensor(P& p, F&& f) {
  f("w1", p.w1); f("b1", p.b1);
  f("wz", p.wz); f("uz", p.uz); f("bz", p.bz);
  f("wr", p.wr); f("ur", p.ur); f("br", p.br);
  f("wn", p.wn); f("un", p.un); f("bn", p.bn);
  f("w3", p.w3); f("b3", p.b3);
  f("wo", p.wo); f("bo", p.bo);
}

// Per-sequence activations cached for backpropagation through time.
struct ForwardCache {
  std::vector<Eigen::VectorXd> x, y1, z, r, hr, n, h_prev, h, y3;
};

class RecurrentNetwork {
 public:
  explicit RecurrentNetwork(NetworkSpec spec);

  // Fan-in scaled uniform init, biases zero. Deterministic under the rng.
  void init_parameters(Rng& rng);

  Eigen::VectorXd initial_hidden() const {
    return Eigen::VectorXd::Zero(spec_.h2);
  }

  // Single-step forward; updates the hidden state in place.
  Eigen::VectorXd forward(const Eigen::VectorXd& obs,
                          Eigen::VectorXd& hidden) const;

  // Full-sequence forward from h(0) = 0. xs is T x obs_dim; returns
  // T x out_dim. Cache is optional and only needed before backward_seq.
  Eigen::MatrixXd forward_seq(const Eigen::MatrixXd& xs,
                              ForwardCache* cache = nullptr) const;

  // Exact BPTT gradients of sum_t out_grads.row(t) . out_t w.r.t. every
  // parameter.
  NetParams backward_seq(const ForwardCache& cache,
                         const Eigen::MatrixXd& out_grads) const;

  const NetworkSpec& spec() const { return spec_; }
  NetParams& params() { return params_; }
  const NetParams& params() const { return params_; }

 private:
  NetworkSpec spec_;
  NetParams params_;
};

// Diagonal Gaussian over actions with a state-independent learnable
// log-std, clamped to [-20, 2].
class GaussianPolicy {
 public:
  explicit GaussianPolicy(NetworkSpec spec);

  void init_parameters(Rng& rng);

  Eigen::VectorXd sample(const Eigen::VectorXd& mean, Rng& rng) const;
  double log_prob(const Eigen::VectorXd& mean,
                  const Eigen::VectorXd& action) const;
  Eigen::VectorXd dlogp_dmean(const Eigen::VectorXd& mean,
                              const Eigen::VectorXd& action) const;
  Eigen::VectorXd dlogp_dlogstd(const Eigen::VectorXd& mean,
                                const Eigen::VectorXd& action) const;
  // KL(old || new) for two diagonal Gaussians sharing this policy's
  // dimension.
  static double kl(const Eigen::VectorXd& mean_old,
                   const Eigen::VectorXd& logstd_old,
                   const Eigen::VectorXd& mean_new,
                   const Eigen::VectorXd& logstd_new);

  Eigen::VectorXd std() const;
  Eigen::VectorXd& log_std() { return log_std_; }
  const Eigen::VectorXd& log_std() const { return log_std_; }
  void clamp_log_std();

  RecurrentNetwork& net() { return net_; }
  const RecurrentNetwork& net() const { return net_; }

 private:
  RecurrentNetwork net_;
  Eigen::VectorXd log_std_;
};

// Running per-dimension mean/variance used to scale observations; applied
// identically at collection and update time (frozen within a batch).
class ObsNormalizer {
 public:
  explicit ObsNormalizer(int dim = 0);
  void update(const std::vector<Eigen::VectorXd>& observations);
  Eigen::VectorXd normalize(const Eigen::VectorXd& obs) const;
  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& var() const { return var_; }
  double count() const { return count_; }
  void restore(const Eigen::VectorXd& mean, const Eigen::VectorXd& var,
               double count);

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd var_;
  double count_ = 0.0;
};

// Versioned checkpoint container: policy + value networks with their
// observation normalizers.
struct Checkpoint {
  int version = 1;
  std::string phase;  // "guidance" or "landing"
  NetworkSpec policy_spec;
  NetParams policy_params;
  Eigen::VectorXd log_std;
  Eigen::VectorXd policy_norm_mean, policy_norm_var;
  double policy_norm_count = 0.0;
  NetworkSpec value_spec;
  NetParams value_params;
  Eigen::VectorXd value_norm_mean, value_norm_var;
  double value_norm_count = 0.0;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

}  // namespace lander

#endif  // LANDER_NETWORKS_HPP_
