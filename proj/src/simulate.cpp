#include "zeroeff/simulate.hpp"

#include "zeroeff/error.hpp"
#include "zeroeff/io.hpp"
#include "zeroeff/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>

namespace zeroeff {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidConfig, what);
}

bool is_prob(double p) { return p >= 0.0 && p <= 1.0; }

void validate_law(const DiscreteLaw& law, const char* arm) {
  const std::string a(arm);
  require(!law.support.empty() && law.support.size() == law.probs.size(), a + " law needs matching support/probs");
  double total = 0.0;
  for (std::size_t i = 0; i < law.support.size(); ++i) {
    require(law.support[i] >= 0.0 && std::isfinite(law.support[i]), a + " support must be non-negative");
    require(is_prob(law.probs[i]), a + " probabilities must lie in [0,1]");
    total += law.probs[i];
  }
  require(std::abs(total - 1.0) < 1e-12, a + " probabilities must sum to 1");
}

double draw_law(const DiscreteLaw& law, Philox& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < law.support.size(); ++i) {
    acc += law.probs[i];
    if (u < acc) return law.support[i];
  }
  return law.support.back();
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void add_clusters(DatasetColumns& c, std::size_t cluster_size) {
  if (cluster_size == 0) return;
  c.cluster.resize(c.outcome.size());
  for (std::size_t i = 0; i < c.outcome.size(); ++i) c.cluster[i] = static_cast<int>(i / cluster_size);
}

nlohmann::ordered_json law_json(const DiscreteLaw& l) { return {{"support", l.support}, {"probs", l.probs}}; }

}  // namespace

double DiscreteLaw::mean() const { return std::inner_product(support.begin(), support.end(), probs.begin(), 0.0); }

double DiscreteLaw::prob_positive() const {
  double p = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] > 0.0) p += probs[i];
  }
  return p;
}

double DiscreteLaw::expect(const Transform& m) const {
  double e = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) e += probs[i] * m.apply(support[i]);
  return e;
}

DiscreteDgp DiscreteDgp::two_point() {
  DiscreteDgp g;
  g.control = {{0.0, 1.0}, {0.5, 0.5}};
  g.treated = {{0.0, 2.0}, {0.25, 0.75}};
  return g;
}

void DiscreteDgp::validate() const {
  validate_law(control, "control");
  validate_law(treated, "treated");
  require(p_treat > 0.0 && p_treat < 1.0, "p_treat must lie in (0,1)");
  require(n >= 2, "n must be at least 2");
}

double DiscreteDgp::theta(const Transform& m, double a) const {
  const Transform s = m.with_scale(m.scale() * a);
  return treated.expect(s) - control.expect(s);
}

Dataset simulate(const DiscreteDgp& g, std::uint64_t seed) {
  g.validate();
  DatasetColumns c;
  c.outcome.resize(g.n);
  c.treatment.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    Philox rng(seed, i);
    const bool d = rng.bernoulli(g.p_treat);
    c.treatment[i] = d ? 1.0 : 0.0;
    c.outcome[i] = draw_law(d ? g.treated : g.control, rng);
  }
  add_clusters(c, g.cluster_size);
  return Dataset(std::move(c));
}

void LognormalZerosDgp::validate() const {
  require(is_prob(p_pos0) && is_prob(p_pos1), "positive shares must lie in [0,1]");
  require(p_pos0 > 0.0, "control arm needs positive outcomes");
  require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be non-negative");
  require(p_treat > 0.0 && p_treat < 1.0, "p_treat must lie in (0,1)");
  require(n >= 2, "n must be at least 2");
}

double LognormalZerosDgp::ate_pct() const { return p_pos1 * std::exp(mu1) / (p_pos0 * std::exp(mu0)) - 1.0; }

Dataset simulate(const LognormalZerosDgp& g, std::uint64_t seed) {
  g.validate();
  DatasetColumns c;
  c.outcome.resize(g.n);
  c.treatment.resize(g.n);
  c.covariates.resize(static_cast<Eigen::Index>(g.n), 1);
  c.covariate_names = {"x"};
  for (std::size_t i = 0; i < g.n; ++i) {
    Philox rng(seed, i);
    const bool d = rng.bernoulli(g.p_treat);
    const double x = rng.normal();
    const bool pos = rng.bernoulli(d ? g.p_pos1 : g.p_pos0);
    const double z = rng.normal();
    c.treatment[i] = d ? 1.0 : 0.0;
    c.covariates(static_cast<Eigen::Index>(i), 0) = x;
    c.outcome[i] = pos ? std::exp((d ? g.mu1 : g.mu0) + g.beta_x * x + g.sigma * z) : 0.0;
  }
  add_clusters(c, g.cluster_size);
  return Dataset(std::move(c));
}

NoncomplianceDgp NoncomplianceDgp::with_effect(double effect) {
  require(effect > -1.0, "complier effect must exceed -1");
  NoncomplianceDgp g;
  g.mu1 = g.mu0 + std::log((1.0 + effect) * g.p_pos0 / g.p_pos1);
  return g;
}

void NoncomplianceDgp::validate() const {
  require(p_complier > 0.0 && p_complier <= 1.0, "p_complier must lie in (0,1]");
  require(is_prob(p_pos0) && is_prob(p_pos1) && is_prob(p_pos_nt), "positive shares must lie in [0,1]");
  require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be non-negative");
  require(p_instrument > 0.0 && p_instrument < 1.0, "p_instrument must lie in (0,1)");
  require(n >= 2, "n must be at least 2");
}

double NoncomplianceDgp::complier_cdf(int d, double y) const {
  if (y < 0.0) return 0.0;
  const double p = d ? p_pos1 : p_pos0;
  const double mu = d ? mu1 : mu0;
  if (y == 0.0) return 1.0 - p;
  const double tail = sigma > 0.0 ? normal_cdf((std::log(y) - mu) / sigma) : (std::log(y) >= mu ? 1.0 : 0.0);
  return 1.0 - p + p * tail;
}

double NoncomplianceDgp::complier_effect_pct() const {
  const double half_var = 0.5 * sigma * sigma;
  return p_pos1 * std::exp(mu1 + half_var) / (p_pos0 * std::exp(mu0 + half_var)) - 1.0;
}

Dataset simulate(const NoncomplianceDgp& g, std::uint64_t seed) {
  g.validate();
  DatasetColumns c;
  c.outcome.resize(g.n);
  c.treatment.resize(g.n);
  c.instrument.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    Philox rng(seed, i);
    const bool z = rng.bernoulli(g.p_instrument);
    const bool complier = rng.bernoulli(g.p_complier);
    const bool d = z && complier;
    const double e = rng.normal();
    double y = 0.0;
    if (complier) {
      const bool pos = rng.bernoulli(d ? g.p_pos1 : g.p_pos0);
      if (pos) y = std::exp((d ? g.mu1 : g.mu0) + g.sigma * e);
    } else if (rng.bernoulli(g.p_pos_nt)) {
      y = std::exp(g.mu_nt + g.sigma * e);
    }
    c.instrument[i] = z ? 1.0 : 0.0;
    c.treatment[i] = d ? 1.0 : 0.0;
    c.outcome[i] = y;
  }
  add_clusters(c, g.cluster_size);
  return Dataset(std::move(c));
}

std::string dataset_csv(const Dataset& d) {
  std::vector<std::string> header{"y", "d"};
  if (d.has_instrument()) header.push_back("z");
  if (d.has_post()) header.push_back("post");
  if (d.has_group()) header.push_back("group");
  if (d.has_relative_time()) header.push_back("rel_time");
  for (const auto& n : d.covariate_names()) header.push_back(n);
  if (d.has_cluster()) header.push_back("cluster");
  CsvTable t(header);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    std::vector<std::string> row{format_double(d.outcome()[i]), format_double(d.treatment()[i])};
    if (d.has_instrument()) row.push_back(format_double(d.instrument()[i]));
    if (d.has_post()) row.push_back(format_double(d.post()[i]));
    if (d.has_group()) row.push_back(format_double(d.group()[i]));
    if (d.has_relative_time()) row.push_back(std::to_string(d.relative_time()[i]));
    for (std::size_t k = 0; k < d.covariate_count(); ++k) {
      row.push_back(format_double(d.covariates()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))));
    }
    if (d.has_cluster()) row.push_back(std::to_string(d.cluster()[i]));
    t.add_row(std::move(row));
  }
  return t.str();
}

ColumnSpec simulated_spec(const Dataset& d) {
  ColumnSpec s("y", "d");
  if (d.has_instrument()) s.instrument("z");
  if (d.has_post()) s.post("post");
  if (d.has_group()) s.group("group");
  if (d.has_relative_time()) s.relative_time("rel_time");
  for (const auto& n : d.covariate_names()) s.covariate(n);
  if (d.has_cluster()) s.cluster("cluster");
  return s;
}

std::string manifest_json(const DiscreteDgp& g) {
  g.validate();
  nlohmann::ordered_json j;
  j["dgp"] = "discrete";
  j["n"] = g.n;
  j["p_treat"] = g.p_treat;
  j["control"] = law_json(g.control);
  j["treated"] = law_json(g.treated);
  j["extensive_margin"] = g.extensive_margin();
  j["ate_pct"] = g.ate_pct();
  j["theta_1"] = {{"log1p", g.theta(Transform::log1p())}, {"arcsinh", g.theta(Transform::arcsinh())}};
  j["find_scale_applicable"] = g.extensive_margin() != 0.0;
  return j.dump(2) + "\n";
}

std::string manifest_json(const LognormalZerosDgp& g) {
  g.validate();
  nlohmann::ordered_json j;
  j["dgp"] = "lognormal_zeros";
  j["n"] = g.n;
  j["p_treat"] = g.p_treat;
  j["p_pos"] = {g.p_pos0, g.p_pos1};
  j["mu"] = {g.mu0, g.mu1};
  j["sigma"] = g.sigma;
  j["beta_x"] = g.beta_x;
  j["extensive_margin"] = g.extensive_margin();
  j["ate_pct"] = g.ate_pct();
  j["intensive_log_effect"] = g.intensive_log_effect();
  j["find_scale_applicable"] = g.extensive_margin() != 0.0;
  return j.dump(2) + "\n";
}

std::string manifest_json(const NoncomplianceDgp& g) {
  g.validate();
  nlohmann::ordered_json j;
  j["dgp"] = "one_sided_noncompliance";
  j["n"] = g.n;
  j["p_instrument"] = g.p_instrument;
  j["p_complier"] = g.p_complier;
  j["complier_p_pos"] = {g.p_pos0, g.p_pos1};
  j["complier_mu"] = {g.mu0, g.mu1};
  j["sigma"] = g.sigma;
  j["never_taker"] = {{"p_pos", g.p_pos_nt}, {"mu", g.mu_nt}};
  j["complier_ate_pct"] = g.complier_effect_pct();
  j["complier_shares"] = {{"always", g.share_always()},
                          {"complier", 1.0 - g.share_always() - g.share_never()},
                          {"never", g.share_never()}};
  return j.dump(2) + "\n";
}

}  // namespace zeroeff
