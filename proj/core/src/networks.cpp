#include "lander/networks.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace lander {

namespace {

int geometric_mean_width(int h1, int h3) {
  return static_cast<int>(std::lround(std::sqrt(static_cast<double>(h1) * h3)));
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
  return 1.0 / (1.0 + (-x.array()).exp());
}

constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)

}  // namespace

NetworkSpec NetworkSpec::policy(int obs_dim, int act_dim) {
  NetworkSpec s;
  s.obs_dim = obs_dim;
  s.act_dim = act_dim;
  s.h1 = 10 * obs_dim;
  s.h3 = 10 * act_dim;
  s.h2 = geometric_mean_width(s.h1, s.h3);
  s.out_dim = act_dim;
  return s;
}

NetworkSpec NetworkSpec::value(int obs_dim) {
  NetworkSpec s;
  s.obs_dim = obs_dim;
  s.act_dim = 0;
  s.h1 = 10 * obs_dim;
  s.h3 = 5;
  s.h2 = geometric_mean_width(s.h1, s.h3);
  s.out_dim = 1;
  return s;
}

NetParams NetParams::zeros(const NetworkSpec& s) {
  NetParams p;
  p.w1 = Eigen::MatrixXd::Zero(s.h1, s.obs_dim);
  p.b1 = Eigen::VectorXd::Zero(s.h1);
  p.wz = Eigen::MatrixXd::Zero(s.h2, s.h1);
  p.wr = Eigen::MatrixXd::Zero(s.h2, s.h1);
  p.wn = Eigen::MatrixXd::Zero(s.h2, s.h1);
  p.uz = Eigen::MatrixXd::Zero(s.h2, s.h2);
  p.ur = Eigen::MatrixXd::Zero(s.h2, s.h2);
  p.un = Eigen::MatrixXd::Zero(s.h2, s.h2);
  p.bz = Eigen::VectorXd::Zero(s.h2);
  p.br = Eigen::VectorXd::Zero(s.h2);
  p.bn = Eigen::VectorXd::Zero(s.h2);
  p.w3 = Eigen::MatrixXd::Zero(s.h3, s.h2);
  p.b3 = Eigen::VectorXd::Zero(s.h3);
  p.wo = Eigen::MatrixXd::Zero(s.out_dim, s.h3);
  p.bo = Eigen::VectorXd::Zero(s.out_dim);
  return p;
}

RecurrentNetwork::RecurrentNetwork(NetworkSpec spec)
    : spec_(spec), params_(NetParams::zeros(spec)) {
  if (spec_.obs_dim <= 0 || spec_.h1 <= 0 || spec_.h2 <= 0 || spec_.h3 <= 0 ||
      spec_.out_dim <= 0) {
    throw std::runtime_error("RecurrentNetwork: invalid spec");
  }
}

void RecurrentNetwork::init_parameters(Rng& rng) {
  for_each_tensor(params_, [&](const char*, auto& t) {
    using T = std::decay_t<decltype(t)>;
    if constexpr (std::is_same_v<T, Eigen::VectorXd>) {
      t.setZero();
    } else {
      const double bound = 1.0 / std::sqrt(static_cast<double>(t.cols()));
      for (Eigen::Index i = 0; i < t.rows(); ++i) {
        for (Eigen::Index j = 0; j < t.cols(); ++j) {
          t(i, j) = rng.uniform(-bound, bound);
        }
      }
    }
  });
}

Eigen::VectorXd RecurrentNetwork::forward(const Eigen::VectorXd& obs,
                                          Eigen::VectorXd& hidden) const {
  if (obs.size() != spec_.obs_dim) {
    throw std::runtime_error("RecurrentNetwork::forward: obs dim mismatch");
  }
  const NetParams& p = params_;
  const Eigen::VectorXd y1 = (p.w1 * obs + p.b1).array().tanh();
  const Eigen::VectorXd z = sigmoid(p.wz * y1 + p.uz * hidden + p.bz);
  const Eigen::VectorXd r = sigmoid(p.wr * y1 + p.ur * hidden + p.br);
  const Eigen::VectorXd hr = r.cwiseProduct(hidden);
  const Eigen::VectorXd n =
      (p.wn * y1 + p.un * hr + p.bn).array().tanh();
  hidden = (1.0 - z.array()) * n.array() + z.array() * hidden.array();
  const Eigen::VectorXd y3 = (p.w3 * hidden + p.b3).array().tanh();
  return p.wo * y3 + p.bo;
}

Eigen::MatrixXd RecurrentNetwork::forward_seq(const Eigen::MatrixXd& xs,
                                              ForwardCache* cache) const {
  const int steps = static_cast<int>(xs.rows());
  const NetParams& p = params_;
  Eigen::MatrixXd out(steps, spec_.out_dim);
  Eigen::VectorXd hidden = initial_hidden();
  if (cache) {
    cache->x.resize(steps);
    cache->y1.resize(steps);
    cache->z.resize(steps);
    cache->r.resize(steps);
    cache->hr.resize(steps);
    cache->n.resize(steps);
    cache->h_prev.resize(steps);
    cache->h.resize(steps);
    cache->y3.resize(steps);
  }
  for (int t = 0; t < steps; ++t) {
    const Eigen::VectorXd x = xs.row(t).transpose();
    const Eigen::VectorXd y1 = (p.w1 * x + p.b1).array().tanh();
    const Eigen::VectorXd z = sigmoid(p.wz * y1 + p.uz * hidden + p.bz);
    const Eigen::VectorXd r = sigmoid(p.wr * y1 + p.ur * hidden + p.br);
    const Eigen::VectorXd hr = r.cwiseProduct(hidden);
    const Eigen::VectorXd n = (p.wn * y1 + p.un * hr + p.bn).array().tanh();
    const Eigen::VectorXd h_prev = hidden;
    hidden = (1.0 - z.array()) * n.array() + z.array() * hidden.array();
    const Eigen::VectorXd y3 = (p.w3 * hidden + p.b3).array().tanh();
    out.row(t) = (p.wo * y3 + p.bo).transpose();
    if (cache) {
      cache->x[t] = x;
      cache->y1[t] = y1;
      cache->z[t] = z;
      cache->r[t] = r;
      cache->hr[t] = hr;
      cache->n[t] = n;
      cache->h_prev[t] = h_prev;
      cache->h[t] = hidden;
      cache->y3[t] = y3;
    }
  }
  return out;
}

NetParams RecurrentNetwork::backward_seq(const ForwardCache& cache,
                                         const Eigen::MatrixXd& out_grads) const {
  const int steps = static_cast<int>(out_grads.rows());
  const NetParams& p = params_;
  NetParams g = NetParams::zeros(spec_);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(spec_.h2);

  for (int t = steps - 1; t >= 0; --t) {
    const Eigen::VectorXd dout = out_grads.row(t).transpose();
    const Eigen::VectorXd& y3 = cache.y3[t];
    const Eigen::VectorXd& h = cache.h[t];
    const Eigen::VectorXd& h_prev = cache.h_prev[t];
    const Eigen::VectorXd& z = cache.z[t];
    const Eigen::VectorXd& r = cache.r[t];
    const Eigen::VectorXd& hr = cache.hr[t];
    const Eigen::VectorXd& n = cache.n[t];
    const Eigen::VectorXd& y1 = cache.y1[t];
    const Eigen::VectorXd& x = cache.x[t];

    g.wo += dout * y3.transpose();
    g.bo += dout;
    const Eigen::VectorXd dy3 = p.wo.transpose() * dout;
    const Eigen::VectorXd da3 =
        dy3.array() * (1.0 - y3.array().square());
    g.w3 += da3 * h.transpose();
    g.b3 += da3;

    const Eigen::VectorXd dh = p.w3.transpose() * da3 + dh_next;

    const Eigen::VectorXd dz = dh.array() * (h_prev.array() - n.array());
    const Eigen::VectorXd dn = dh.array() * (1.0 - z.array());
    Eigen::VectorXd dh_prev = dh.cwiseProduct(z);

    const Eigen::VectorXd dan = dn.array() * (1.0 - n.array().square());
    g.wn += dan * y1.transpose();
    g.un += dan * hr.transpose();
    g.bn += dan;
    const Eigen::VectorXd dhr = p.un.transpose() * dan;
    const Eigen::VectorXd dr = dhr.cwiseProduct(h_prev);
    dh_prev += dhr.cwiseProduct(r);

    const Eigen::VectorXd daz =
        dz.array() * z.array() * (1.0 - z.array());
    g.wz += daz * y1.transpose();
    g.uz += daz * h_prev.transpose();
    g.bz += daz;
    const Eigen::VectorXd dar =
        dr.array() * r.array() * (1.0 - r.array());
    g.wr += dar * y1.transpose();
    g.ur += dar * h_prev.transpose();
    g.br += dar;

    dh_prev += p.uz.transpose() * daz + p.ur.transpose() * dar;

    const Eigen::VectorXd dy1 = p.wz.transpose() * daz +
                                p.wr.transpose() * dar +
                                p.wn.transpose() * dan;
    const Eigen::VectorXd da1 =
        dy1.array() * (1.0 - y1.array().square());
    g.w1 += da1 * x.transpose();
    g.b1 += da1;

    dh_next = dh_prev;
  }
  return g;
}

GaussianPolicy::GaussianPolicy(NetworkSpec spec)
    : net_(spec), log_std_(Eigen::VectorXd::Zero(spec.act_dim)) {
  if (spec.act_dim <= 0) {
    throw std::runtime_error("GaussianPolicy: act_dim must be positive");
  }
}

void GaussianPolicy::init_parameters(Rng& rng) {
  net_.init_parameters(rng);
  log_std_.setZero();  // std = 1 in action units
}

Eigen::VectorXd GaussianPolicy::std() const {
  return log_std_.array().exp();
}

void GaussianPolicy::clamp_log_std() {
  log_std_ = log_std_.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

Eigen::VectorXd GaussianPolicy::sample(const Eigen::VectorXd& mean,
                                       Rng& rng) const {
  const Eigen::VectorXd sigma = std();
  Eigen::VectorXd a(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    // Box-Muller from the deterministic uniform stream.
    const double u1 = std::max(rng.canonical(), 1e-300);
    const double u2 = rng.canonical();
    const double gauss =
        std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    a[i] = mean[i] + sigma[i] * gauss;
  }
  return a;
}

double GaussianPolicy::log_prob(const Eigen::VectorXd& mean,
                                const Eigen::VectorXd& action) const {
  const Eigen::ArrayXd sigma = std().array();
  const Eigen::ArrayXd zscore = (action - mean).array() / sigma;
  return (-0.5 * zscore.square() - log_std_.array() - kHalfLog2Pi).sum();
}

Eigen::VectorXd GaussianPolicy::dlogp_dmean(const Eigen::VectorXd& mean,
                                            const Eigen::VectorXd& action) const {
  const Eigen::ArrayXd var = std().array().square();
  return ((action - mean).array() / var).matrix();
}

Eigen::VectorXd GaussianPolicy::dlogp_dlogstd(
    const Eigen::VectorXd& mean, const Eigen::VectorXd& action) const {
  const Eigen::ArrayXd zscore =
      (action - mean).array() / std().array();
  return (zscore.square() - 1.0).matrix();
}

double GaussianPolicy::kl(const Eigen::VectorXd& mean_old,
                          const Eigen::VectorXd& logstd_old,
                          const Eigen::VectorXd& mean_new,
                          const Eigen::VectorXd& logstd_new) {
  const Eigen::ArrayXd var_old = (2.0 * logstd_old.array()).exp();
  const Eigen::ArrayXd var_new = (2.0 * logstd_new.array()).exp();
  const Eigen::ArrayXd dmean = (mean_new - mean_old).array();
  return ((logstd_new - logstd_old).array() +
          (var_old + dmean.square()) / (2.0 * var_new) - 0.5)
      .sum();
}

ObsNormalizer::ObsNormalizer(int dim)
    : mean_(Eigen::VectorXd::Zero(dim)), var_(Eigen::VectorXd::Ones(dim)) {}

void ObsNormalizer::update(const std::vector<Eigen::VectorXd>& observations) {
  if (observations.empty()) return;
  const double batch_n = static_cast<double>(observations.size());
  Eigen::VectorXd batch_mean = Eigen::VectorXd::Zero(mean_.size());
  for (const auto& o : observations) batch_mean += o;
  batch_mean /= batch_n;
  Eigen::VectorXd batch_var = Eigen::VectorXd::Zero(mean_.size());
  for (const auto& o : observations) {
    batch_var += (o - batch_mean).cwiseAbs2();
  }
  batch_var /= batch_n;

  if (count_ == 0.0) {
    mean_ = batch_mean;
    var_ = batch_var;
    count_ = batch_n;
    return;
  }
  const double total = count_ + batch_n;
  const Eigen::VectorXd delta = batch_mean - mean_;
  const Eigen::VectorXd new_mean = mean_ + delta * (batch_n / total);
  var_ = (var_ * count_ + batch_var * batch_n +
          delta.cwiseAbs2() * (count_ * batch_n / total)) /
         total;
  mean_ = new_mean;
  count_ = total;
}

Eigen::VectorXd ObsNormalizer::normalize(const Eigen::VectorXd& obs) const {
  const Eigen::ArrayXd sd = var_.array().max(1e-6).sqrt();
  return ((obs - mean_).array() / sd).matrix();
}

void ObsNormalizer::restore(const Eigen::VectorXd& mean,
                            const Eigen::VectorXd& var, double count) {
  mean_ = mean;
  var_ = var;
  count_ = count;
}

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  }
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) return {};
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.row(i) = Eigen::Map<const Eigen::VectorXd>(rows[i].data(),
                                                 rows[i].size());
  }
  return m;
}

json spec_to_json(const NetworkSpec& s) {
  return {{"obs_dim", s.obs_dim}, {"act_dim", s.act_dim}, {"h1", s.h1},
          {"h2", s.h2},           {"h3", s.h3},           {"out_dim", s.out_dim}};
}

NetworkSpec spec_from_json(const json& j) {
  NetworkSpec s;
  s.obs_dim = j.at("obs_dim");
  s.act_dim = j.at("act_dim");
  s.h1 = j.at("h1");
  s.h2 = j.at("h2");
  s.h3 = j.at("h3");
  s.out_dim = j.at("out_dim");
  return s;
}

json params_to_json(const NetParams& p) {
  json j;
  for_each_tensor(const_cast<NetParams&>(p), [&](const char* name, auto& t) {
    if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Eigen::VectorXd>) {
      j[name] = vec_to_json(t);
    } else {
      j[name] = mat_to_json(t);
    }
  });
  return j;
}

NetParams params_from_json(const json& j, const NetworkSpec& spec) {
  NetParams p = NetParams::zeros(spec);
  for_each_tensor(p, [&](const char* name, auto& t) {
    if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Eigen::VectorXd>) {
      t = vec_from_json(j.at(name));
    } else {
      t = mat_from_json(j.at(name));
    }
  });
  return p;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
  json j;
  j["version"] = version;
  j["phase"] = phase;
  j["policy"] = {{"spec", spec_to_json(policy_spec)},
                 {"params", params_to_json(policy_params)},
                 {"log_std", vec_to_json(log_std)},
                 {"norm_mean", vec_to_json(policy_norm_mean)},
                 {"norm_var", vec_to_json(policy_norm_var)},
                 {"norm_count", policy_norm_count}};
  j["value"] = {{"spec", spec_to_json(value_spec)},
                {"params", params_to_json(value_params)},
                {"norm_mean", vec_to_json(value_norm_mean)},
                {"norm_var", vec_to_json(value_norm_var)},
                {"norm_count", value_norm_count}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("Checkpoint::save: cannot open " + path);
  out << j.dump();
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("Checkpoint::load: cannot open " + path);
  json j;
  in >> j;
  Checkpoint c;
  c.version = j.at("version");
  c.phase = j.at("phase");
  const json& jp = j.at("policy");
  c.policy_spec = spec_from_json(jp.at("spec"));
  c.policy_params = params_from_json(jp.at("params"), c.policy_spec);
  c.log_std = vec_from_json(jp.at("log_std"));
  c.policy_norm_mean = vec_from_json(jp.at("norm_mean"));
  c.policy_norm_var = vec_from_json(jp.at("norm_var"));
  c.policy_norm_count = jp.at("norm_count");
  const json& jv = j.at("value");
  c.value_spec = spec_from_json(jv.at("spec"));
  c.value_params = params_from_json(jv.at("params"), c.value_spec);
  c.value_norm_mean = vec_from_json(jv.at("norm_mean"));
  c.value_norm_var = vec_from_json(jv.at("norm_var"));
  c.value_norm_count = jv.at("norm_count");
  return c;
}

}  // namespace lander
