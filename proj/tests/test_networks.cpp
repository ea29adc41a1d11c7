#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "lander/networks.hpp"

using namespace lander;

namespace {

std::vector<double*> flatten(NetParams& p) {
  std::vector<double*> out;
  for_each_tensor(p, [&](const char*, auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) out.push_back(t.data() + i);
  });
  return out;
}

Eigen::MatrixXd random_sequence(int steps, int dim, Rng& rng) {
  Eigen::MatrixXd xs(steps, dim);
  for (int t = 0; t < steps; ++t) {
    for (int i = 0; i < dim; ++i) xs(t, i) = rng.uniform(-1.5, 1.5);
  }
  return xs;
}

}  // namespace

TEST_CASE("network widths follow the architecture formulas") {
  const NetworkSpec gp = NetworkSpec::policy(18, 4);
  CHECK(gp.h1 == 180);
  CHECK(gp.h2 == 85);  // round(sqrt(180 * 40))
  CHECK(gp.h3 == 40);
  CHECK(gp.out_dim == 4);

  const NetworkSpec gv = NetworkSpec::value(18);
  CHECK(gv.h1 == 180);
  CHECK(gv.h2 == 30);  // round(sqrt(180 * 5))
  CHECK(gv.h3 == 5);
  CHECK(gv.out_dim == 1);

  const NetworkSpec lp = NetworkSpec::policy(9, 4);
  CHECK(lp.h1 == 90);
  CHECK(lp.h2 == 60);  // round(sqrt(90 * 40))
  CHECK(lp.h3 == 40);

  const NetworkSpec lv = NetworkSpec::value(11);
  CHECK(lv.h1 == 110);
  CHECK(lv.h2 == 23);  // round(sqrt(110 * 5))
  CHECK(lv.h3 == 5);
}

TEST_CASE("zero parameters give zero output for any input") {
  RecurrentNetwork net(NetworkSpec::policy(5, 3));
  // Parameters default to zeros before initialization.
  Eigen::VectorXd h = net.initial_hidden();
  const Eigen::VectorXd y =
      net.forward(Eigen::VectorXd::Constant(5, 2.7), h);
  CHECK(y.norm() == 0.0);
}

TEST_CASE("forward pass is deterministic and init is seed-stable") {
  RecurrentNetwork a(NetworkSpec::policy(6, 2));
  RecurrentNetwork b(NetworkSpec::policy(6, 2));
  Rng ra(99), rb(99);
  a.init_parameters(ra);
  b.init_parameters(rb);
  Rng rx(1);
  const Eigen::MatrixXd xs = random_sequence(20, 6, rx);
  CHECK((a.forward_seq(xs) - b.forward_seq(xs)).norm() == 0.0);

  Rng rc(100);
  RecurrentNetwork c(NetworkSpec::policy(6, 2));
  c.init_parameters(rc);
  CHECK((a.forward_seq(xs) - c.forward_seq(xs)).norm() > 0.0);
}

TEST_CASE("single-step and sequence forward agree") {
  RecurrentNetwork net(NetworkSpec::policy(4, 2));
  Rng rng(5);
  net.init_parameters(rng);
  const Eigen::MatrixXd xs = random_sequence(15, 4, rng);
  const Eigen::MatrixXd ys = net.forward_seq(xs);
  Eigen::VectorXd h = net.initial_hidden();
  for (int t = 0; t < xs.rows(); ++t) {
    const Eigen::VectorXd y = net.forward(xs.row(t).transpose(), h);
    CHECK((y - ys.row(t).transpose()).norm() < 1e-14);
  }
}

TEST_CASE("hidden state stays inside the unit box") {
  RecurrentNetwork net(NetworkSpec::policy(3, 2));
  Rng rng(7);
  net.init_parameters(rng);
  Eigen::VectorXd h = net.initial_hidden();
  for (int t = 0; t < 500; ++t) {
    Eigen::VectorXd obs(3);
    for (int i = 0; i < 3; ++i) obs[i] = rng.uniform(-100.0, 100.0);
    net.forward(obs, h);
    CHECK(h.maxCoeff() < 1.0);
    CHECK(h.minCoeff() > -1.0);
  }
}

TEST_CASE("recurrence distinguishes observation histories") {
  RecurrentNetwork net(NetworkSpec::policy(3, 2));
  Rng rng(11);
  net.init_parameters(rng);
  Eigen::MatrixXd xs1 = Eigen::MatrixXd::Zero(4, 3);
  Eigen::MatrixXd xs2 = Eigen::MatrixXd::Zero(4, 3);
  xs1(0, 0) = 1.0;
  xs2(0, 0) = -1.0;  // histories differ only in the first step
  const Eigen::MatrixXd y1 = net.forward_seq(xs1);
  const Eigen::MatrixXd y2 = net.forward_seq(xs2);
  CHECK((y1.row(3) - y2.row(3)).norm() > 1e-9);
}

TEST_CASE("BPTT gradients match central finite differences") {
  for (const NetworkSpec& spec :
       {NetworkSpec::policy(3, 2), NetworkSpec::value(3)}) {
    RecurrentNetwork net(spec);
    Rng rng(13);
    net.init_parameters(rng);
    const int steps = 5;
    const Eigen::MatrixXd xs = random_sequence(steps, spec.obs_dim, rng);
    Eigen::MatrixXd gs(steps, spec.out_dim);
    for (int t = 0; t < steps; ++t) {
      for (int i = 0; i < spec.out_dim; ++i) gs(t, i) = rng.uniform(-1.0, 1.0);
    }
    auto loss = [&]() {
      const Eigen::MatrixXd ys = net.forward_seq(xs);
      return (ys.array() * gs.array()).sum();
    };

    ForwardCache cache;
    net.forward_seq(xs, &cache);
    NetParams analytic = net.backward_seq(cache, gs);

    std::vector<double*> params = flatten(net.params());
    std::vector<double*> grads = flatten(analytic);
    REQUIRE(params.size() == grads.size());

    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = *params[i];
      *params[i] = saved + h;
      const double lp = loss();
      *params[i] = saved - h;
      const double lm = loss();
      *params[i] = saved;
      const double fd = (lp - lm) / (2.0 * h);
      const double denom = std::max({std::abs(fd), std::abs(*grads[i]), 1e-4});
      worst = std::max(worst, std::abs(fd - *grads[i]) / denom);
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
  RecurrentNetwork net(NetworkSpec::policy(3, 2));
  Rng rng(17);
  net.init_parameters(rng);
  const Eigen::MatrixXd xs = random_sequence(6, 3, rng);
  ForwardCache cache;
  net.forward_seq(xs, &cache);
  NetParams g = net.backward_seq(cache, Eigen::MatrixXd::Zero(6, 2));
  for (double* p : flatten(g)) CHECK(*p == 0.0);
}

TEST_CASE("Gaussian policy: log-probability consistency and gradients") {
  GaussianPolicy policy(NetworkSpec::policy(4, 3));
  Rng rng(19);
  policy.init_parameters(rng);
  policy.log_std() = Eigen::Vector3d(-0.2, 0.3, 0.0);

  const Eigen::VectorXd mean = Eigen::Vector3d(0.5, -1.0, 0.2);
  const Eigen::VectorXd action = Eigen::Vector3d(0.7, -0.6, -0.4);

  // Direct product of per-dimension densities.
  double direct = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double sd = std::exp(policy.log_std()[i]);
    const double z = (action[i] - mean[i]) / sd;
    direct *= std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
  }
  CHECK(std::exp(policy.log_prob(mean, action)) ==
        doctest::Approx(direct).epsilon(1e-12));

  // Gradients against central differences.
  const double h = 1e-6;
  const Eigen::VectorXd dmean = policy.dlogp_dmean(mean, action);
  const Eigen::VectorXd dls = policy.dlogp_dlogstd(mean, action);
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd mp = mean, mm = mean;
    mp[i] += h;
    mm[i] -= h;
    const double fd =
        (policy.log_prob(mp, action) - policy.log_prob(mm, action)) / (2 * h);
    CHECK(dmean[i] == doctest::Approx(fd).epsilon(1e-5));

    const double saved = policy.log_std()[i];
    policy.log_std()[i] = saved + h;
    const double lp = policy.log_prob(mean, action);
    policy.log_std()[i] = saved - h;
    const double lm = policy.log_prob(mean, action);
    policy.log_std()[i] = saved;
    const double fd2 = (lp - lm) / (2 * h);
    CHECK(dls[i] == doctest::Approx(fd2).epsilon(1e-5));
  }
}

TEST_CASE("Gaussian policy: initial std is 1 and sampling matches") {
  GaussianPolicy policy(NetworkSpec::policy(4, 2));
  Rng rng(23);
  policy.init_parameters(rng);
  CHECK((policy.std() - Eigen::VectorXd::Ones(2)).norm() < 1e-12);

  const Eigen::VectorXd mean = Eigen::Vector2d(1.0, -2.0);
  const int n = 100000;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  Eigen::Vector2d sum2 = Eigen::Vector2d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd a = policy.sample(mean, rng);
    sum += a;
    sum2 += (a - mean).cwiseAbs2();
  }
  const Eigen::Vector2d mu = sum / n;
  const Eigen::Vector2d sd = (sum2 / n).cwiseSqrt();
  CHECK(std::abs(mu[0] - 1.0) < 0.02);
  CHECK(std::abs(mu[1] + 2.0) < 0.02);
  CHECK(std::abs(sd[0] - 1.0) < 0.02);
  CHECK(std::abs(sd[1] - 1.0) < 0.02);
}

TEST_CASE("log-std clamp bounds") {
  GaussianPolicy policy(NetworkSpec::policy(4, 2));
  policy.log_std() = Eigen::Vector2d(50.0, -50.0);
  policy.clamp_log_std();
  CHECK(policy.log_std()[0] == 2.0);
  CHECK(policy.log_std()[1] == -20.0);
}

TEST_CASE("Gaussian KL: zero at equality, analytic fixture") {
  const Eigen::Vector2d m0(0.3, -0.1), ls0(0.0, 0.2);
  CHECK(GaussianPolicy::kl(m0, ls0, m0, ls0) == doctest::Approx(0.0));

  // One dimension, sigma_old = 1, sigma_new = 2, means 0 and 1:
  // KL = log(2) + (1 + 1)/(2*4) - 1/2.
  Eigen::VectorXd m_old(1), m_new(1), l_old(1), l_new(1);
  m_old << 0.0;
  m_new << 1.0;
  l_old << 0.0;
  l_new << std::log(2.0);
  const double expected = std::log(2.0) + 2.0 / 8.0 - 0.5;
  CHECK(GaussianPolicy::kl(m_old, l_old, m_new, l_new) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("observation normalizer: running statistics and floor") {
  ObsNormalizer norm(2);
  // Before any update, normalization is the identity.
  const Eigen::Vector2d x(3.0, -4.0);
  CHECK((norm.normalize(x) - x).norm() == 0.0);

  std::vector<Eigen::VectorXd> batch1, batch2, all;
  Rng rng(29);
  for (int i = 0; i < 500; ++i) {
    Eigen::VectorXd v(2);
    v << rng.uniform(0.0, 10.0), rng.uniform(-5.0, 5.0);
    (i < 250 ? batch1 : batch2).push_back(v);
    all.push_back(v);
  }
  norm.update(batch1);
  norm.update(batch2);

  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  for (const auto& v : all) mu += v;
  mu /= all.size();
  Eigen::Vector2d var = Eigen::Vector2d::Zero();
  for (const auto& v : all) var += (Eigen::Vector2d(v) - mu).cwiseAbs2();
  var /= all.size();
  CHECK((norm.mean() - mu).norm() < 1e-9);
  CHECK((norm.var() - var).norm() < 1e-9);

  // Constant dimension: the variance floor keeps normalization finite.
  ObsNormalizer flat(1);
  std::vector<Eigen::VectorXd> constant(10, Eigen::VectorXd::Constant(1, 4.0));
  flat.update(constant);
  CHECK(std::isfinite(flat.normalize(Eigen::VectorXd::Constant(1, 9.0))[0]));
}

TEST_CASE("checkpoint round trip preserves every tensor") {
  GaussianPolicy policy(NetworkSpec::policy(6, 4));
  RecurrentNetwork value(NetworkSpec::value(6));
  Rng rng(31);
  policy.init_parameters(rng);
  value.init_parameters(rng);

  Checkpoint c;
  c.phase = "guidance";
  c.policy_spec = policy.net().spec();
  c.policy_params = policy.net().params();
  c.log_std = policy.log_std();
  c.policy_norm_mean = Eigen::VectorXd::Constant(6, 0.5);
  c.policy_norm_var = Eigen::VectorXd::Constant(6, 2.0);
  c.policy_norm_count = 123.0;
  c.value_spec = value.spec();
  c.value_params = value.params();
  c.value_norm_mean = Eigen::VectorXd::Zero(6);
  c.value_norm_var = Eigen::VectorXd::Ones(6);
  c.value_norm_count = 7.0;

  const std::string path = "/tmp/lander_test_checkpoint.json";
  c.save(path);
  const Checkpoint r = Checkpoint::load(path);
  CHECK(r.phase == c.phase);
  CHECK(r.policy_spec == c.policy_spec);
  CHECK(r.value_spec == c.value_spec);
  CHECK((r.log_std - c.log_std).norm() == 0.0);
  CHECK(r.policy_norm_count == 123.0);

  NetParams a = c.policy_params;
  NetParams b = r.policy_params;
  const auto fa = flatten(a);
  const auto fb = flatten(b);
  REQUIRE(fa.size() == fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) CHECK(*fa[i] == *fb[i]);
  std::remove(path.c_str());
}
