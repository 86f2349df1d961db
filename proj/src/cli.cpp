#include "zeroeff/cli.hpp"

#include "zeroeff/bounds.hpp"
#include "zeroeff/error.hpp"
#include "zeroeff/identification_lab.hpp"
#include "zeroeff/io.hpp"
#include "zeroeff/poisson.hpp"
#include "zeroeff/scale_sensitivity.hpp"
#include "zeroeff/simulate.hpp"
#include "zeroeff/target_params.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace zeroeff {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

constexpr std::uint64_t kDefaultSeed = 20240101;

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::InvalidConfig, "config field '" + path + "': " + what);
}

// Typed access to one config section with dotted-path diagnostics.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_null() && !j_.is_object()) bad_field(path_, "expected an object");
  }

  bool has(const std::string& k) const { return j_.is_object() && j_.contains(k) && !j_.at(k).is_null(); }
  std::string path(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  const json& raw(const std::string& k) const { return j_.at(k); }
  Section section(const std::string& k) const { return Section(has(k) ? j_.at(k) : null_, path(k)); }

  double number(const std::string& k, double def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_number()) bad_field(path(k), "expected a number");
    return j_.at(k).get<double>();
  }
  std::size_t count(const std::string& k, std::size_t def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_number_unsigned()) bad_field(path(k), "expected a non-negative integer");
    return j_.at(k).get<std::size_t>();
  }
  bool flag(const std::string& k, bool def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_boolean()) bad_field(path(k), "expected true or false");
    return j_.at(k).get<bool>();
  }
  std::string str(const std::string& k, const std::string& def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_string()) bad_field(path(k), "expected a string");
    return j_.at(k).get<std::string>();
  }
  std::vector<double> numbers(const std::string& k, std::vector<double> def) const {
    if (!has(k)) return def;
    const auto& a = j_.at(k);
    if (!a.is_array()) bad_field(path(k), "expected an array of numbers");
    std::vector<double> v;
    for (const auto& e : a) {
      if (!e.is_number()) bad_field(path(k), "expected an array of numbers");
      v.push_back(e.get<double>());
    }
    return v;
  }
  std::vector<std::string> strings(const std::string& k, std::vector<std::string> def) const {
    if (!has(k)) return def;
    const auto& a = j_.at(k);
    if (!a.is_array()) bad_field(path(k), "expected an array of strings");
    std::vector<std::string> v;
    for (const auto& e : a) {
      if (!e.is_string()) bad_field(path(k), "expected an array of strings");
      v.push_back(e.get<std::string>());
    }
    return v;
  }

 private:
  inline static const json null_ = nullptr;
  const json& j_;
  std::string path_;
};

ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

struct Context {
  std::string verb;
  json config;  // effective config
  Section root{config, ""};
  fs::path base;  // relative input paths resolve here
  fs::path out;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  ordered_json provenance;
  std::string csv_comment;
  std::vector<std::string> written;

  Context() = default;
  Context(const Context&) = delete;

  fs::path resolve(const std::string& p) const {
    const fs::path q(p);
    return q.is_absolute() ? q : base / q;
  }

  void write_json(const std::string& name, ordered_json j) {
    j["provenance"] = provenance;
    write_text(out / name, j.dump(2) + "\n");
    written.push_back(name);
  }
  void write_csv(const std::string& name, const std::string& body) {
    write_text(out / name, csv_comment + body);
    written.push_back(name);
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset load_input(const Context& ctx) {
  const Section in = ctx.root.section("input");
  if (!in.has("path")) bad_field("input.path", "an input dataset is required");
  ColumnSpec spec(in.str("outcome", "y"), in.str("treatment", "d"));
  if (in.has("cluster")) spec.cluster(in.str("cluster", ""));
  if (in.has("instrument")) spec.instrument(in.str("instrument", ""));
  if (in.has("post")) spec.post(in.str("post", ""));
  if (in.has("group")) spec.group(in.str("group", ""));
  if (in.has("relative_time")) spec.relative_time(in.str("relative_time", ""));
  for (const auto& c : in.strings("covariates", {})) spec.covariate(c);
  return load_csv(ctx.resolve(in.str("path", "")), spec);
}

ordered_json result_json(const EstimateResult& r) {
  ordered_json j;
  j["estimator"] = r.estimator;
  j["transform"] = r.transform;
  j["value"] = num(r.value);
  j["se"] = num(r.se);
  j["tstat"] = num(r.tstat);
  j["n"] = r.n;
  ordered_json meta = ordered_json::object();
  for (const auto& [k, v] : r.meta) meta[k] = num(v);
  j["meta"] = meta;
  return j;
}

std::string result_csv(const std::vector<EstimateResult>& rs) {
  CsvTable t({"estimator", "transform", "value", "se", "tstat", "n"});
  for (const auto& r : rs) {
    t.add_row({r.estimator, r.transform, format_double(r.value), format_double(r.se), format_double(r.tstat),
               std::to_string(r.n)});
  }
  return t.str();
}

ordered_json prop_json(const PropEffect& p, const std::string& name) {
  return {{"estimator", name}, {"value", num(p.value)}, {"se", num(p.se)},
          {"beta", num(p.beta)}, {"beta_se", num(p.beta_se)}};
}

ordered_json bounds_json(const BoundsResult& b) {
  return {{"lower", num(b.lower)},
          {"upper", num(b.upper)},
          {"se_lower", num(b.se_lower)},
          {"se_upper", num(b.se_upper)},
          {"trim_fraction", num(b.trim_fraction)},
          {"direction", to_string(b.direction)},
          {"scale", to_string(b.scale)},
          {"n", b.n},
          {"bootstrap_draws", b.bootstrap_draws},
          {"mc_se_lower", num(b.mc_se_lower)},
          {"mc_se_upper", num(b.mc_se_upper)}};
}

std::string bounds_csv(const std::vector<BoundsResult>& bs) {
  CsvTable t({"scale", "lower", "upper", "se_lower", "se_upper", "trim_fraction", "direction"});
  for (const auto& b : bs) {
    t.add_row({to_string(b.scale), format_double(b.lower), format_double(b.upper), format_double(b.se_lower),
               format_double(b.se_upper), format_double(b.trim_fraction), to_string(b.direction)});
  }
  return t.str();
}

std::string fmt_label(const std::string& prefix, double v) { return prefix + format_double(v); }

// ---- simulate

DiscreteLaw law_from(const Section& s) {
  DiscreteLaw l{s.numbers("support", {}), s.numbers("probs", {})};
  if (l.support.empty()) bad_field(s.path("support"), "required");
  return l;
}

int cmd_simulate(Context& ctx) {
  const Section s = ctx.root.section("simulate");
  const std::string dgp = s.str("dgp", "two_point");
  Dataset d = [&]() -> Dataset {
    if (dgp == "two_point" || dgp == "discrete") {
      DiscreteDgp g = DiscreteDgp::two_point();
      if (dgp == "discrete") {
        g.control = law_from(s.section("control"));
        g.treated = law_from(s.section("treated"));
      }
      g.p_treat = s.number("p_treat", g.p_treat);
      g.n = s.count("n", g.n);
      g.cluster_size = s.count("cluster_size", g.cluster_size);
      g.validate();
      ctx.write_json("manifest.json", ordered_json::parse(manifest_json(g)));
      return simulate(g, ctx.seed);
    }
    if (dgp == "lognormal") {
      LognormalZerosDgp g;
      g.p_pos0 = s.number("p_pos0", g.p_pos0);
      g.p_pos1 = s.number("p_pos1", g.p_pos1);
      g.mu0 = s.number("mu0", g.mu0);
      g.mu1 = s.number("mu1", g.mu1);
      g.sigma = s.number("sigma", g.sigma);
      g.beta_x = s.number("beta_x", g.beta_x);
      g.p_treat = s.number("p_treat", g.p_treat);
      g.n = s.count("n", g.n);
      g.cluster_size = s.count("cluster_size", g.cluster_size);
      g.validate();
      ctx.write_json("manifest.json", ordered_json::parse(manifest_json(g)));
      return simulate(g, ctx.seed);
    }
    if (dgp == "noncompliance") {
      NoncomplianceDgp g;
      g.p_complier = s.number("p_complier", g.p_complier);
      g.p_pos0 = s.number("p_pos0", g.p_pos0);
      g.p_pos1 = s.number("p_pos1", g.p_pos1);
      g.mu0 = s.number("mu0", g.mu0);
      g.mu1 = s.number("mu1", g.mu1);
      g.sigma = s.number("sigma", g.sigma);
      g.p_pos_nt = s.number("p_pos_nt", g.p_pos_nt);
      g.mu_nt = s.number("mu_nt", g.mu_nt);
      g.p_instrument = s.number("p_instrument", g.p_instrument);
      g.n = s.count("n", g.n);
      g.cluster_size = s.count("cluster_size", g.cluster_size);
      if (s.has("effect")) {
        const double e = s.number("effect", 0.0);
        if (!(e > -1.0)) bad_field(s.path("effect"), "must exceed -1");
        g.mu1 = g.mu0 + std::log((1.0 + e) * g.p_pos0 / g.p_pos1);
      }
      g.validate();
      ctx.write_json("manifest.json", ordered_json::parse(manifest_json(g)));
      return simulate(g, ctx.seed);
    }
    bad_field(s.path("dgp"), "unknown DGP '" + dgp + "' (two_point, discrete, lognormal, noncompliance)");
  }();
  ctx.write_csv("dataset.csv", dataset_csv(d));
  return 0;
}

// ---- sensitivity

SensitivityOptions sensitivity_options(const Context& ctx, const Section& s) {
  SensitivityOptions o;
  o.engine = parse_engine(s.str("engine", to_string(Engine::DiffMeans)));
  o.inference.cluster = s.flag("cluster", true);
  o.inference.small_sample = s.flag("small_sample", false);
  o.threads = ctx.threads;
  return o;
}

std::vector<double> grid_from(const Section& s, const std::string& key) {
  if (!s.has(key)) return default_grid();
  if (s.raw(key).is_object()) {
    const Section g = s.section(key);
    return log_grid(g.number("lo", 1e-4), g.number("hi", 1e8), g.count("points", 25));
  }
  return s.numbers(key, {});
}

int cmd_sensitivity(Context& ctx) {
  const Section s = ctx.root.section("sensitivity");
  const Dataset d = load_input(ctx);
  const Transform t = parse_transform(s.str("transform", "log1p"), d.outcome());
  const auto opts = sensitivity_options(ctx, s);
  const auto grid = grid_from(s, "grid");

  const auto curve = sensitivity_curve(d, t, grid, opts);
  ctx.write_csv("curve.csv", curve_csv(curve));
  ctx.write_json("curve.json", ordered_json::parse(curve_json(curve)));

  const auto tt = tstat_table(d, t, grid, opts);
  CsvTable tcsv({"a", "t_theta", "t_gamma"});
  for (const auto& r : tt.rows) tcsv.add_row(std::vector<double>{r.a, r.t_theta, r.t_gamma});
  ctx.write_csv("tstat.csv", tcsv.str());

  const auto rs = rescale_summary(d, t, opts);
  CsvTable rcsv({"transform", "theta_1", "theta_100", "ext_margin", "raw_change", "pct_change", "predicted_change"});
  rcsv.add_row({t.name(), format_double(rs.theta_1), format_double(rs.theta_100), format_double(rs.gamma),
                format_double(rs.raw_change), format_double(rs.pct_change), format_double(rs.predicted_change)});
  ctx.write_csv("rescale_summary.csv", rcsv.str());
  ctx.write_json("rescale_summary.json", {{"transform", t.name()},
                                          {"theta_1", num(rs.theta_1)},
                                          {"theta_100", num(rs.theta_100)},
                                          {"ext_margin", num(rs.gamma)},
                                          {"raw_change", num(rs.raw_change)},
                                          {"pct_change", num(rs.pct_change)},
                                          {"predicted_change", num(rs.predicted_change)},
                                          {"t_gamma", num(tt.t_gamma)},
                                          {"convergence_expected", tt.convergence_expected}});

  CsvTable plot({"abs_actual_change", "abs_predicted_change"});
  plot.add_row(std::vector<double>{std::abs(rs.raw_change), std::abs(rs.gamma) * std::log(100.0)});
  ctx.write_csv("plot_actual_vs_predicted.csv", plot.str());

  const auto targets = s.numbers("targets", {});
  if (!targets.empty()) {
    CsvTable sc({"target", "a", "theta", "bracket_steps", "bisection_steps", "status"});
    for (double target : targets) {
      try {
        const auto f = find_scale_for_target(d, t, target, opts);
        sc.add_row({format_double(target), format_double(f.a), format_double(f.theta), std::to_string(f.bracket_steps),
                    std::to_string(f.bisection_steps), "ok"});
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoExtensiveMargin && e.kind() != ErrorKind::BracketNotFound) throw;
        sc.add_row({format_double(target), "nan", "nan", "0", "0", std::string(to_string(e.kind()))});
      }
    }
    ctx.write_csv("scale_search.csv", sc.str());
  }
  return 0;
}

// ---- estimate

BootstrapSpec bootstrap_from(const Context& ctx, const Section& s) {
  BootstrapSpec b;
  b.draws = s.count("draws", b.draws);
  b.seed = static_cast<std::uint64_t>(s.count("seed", ctx.seed));
  b.cluster = s.flag("cluster", b.cluster);
  b.max_failure_rate = s.number("max_failure_rate", b.max_failure_rate);
  b.threads = ctx.threads;
  b.validate();
  return b;
}

int cmd_estimate(Context& ctx) {
  const Section s = ctx.root.section("estimate");
  const auto names = s.strings("estimators", {});
  if (names.empty()) bad_field(s.path("estimators"), "at least one estimator is required");
  static const std::set<std::string> known{"ate_pct_means", "ate_pct_poisson", "att_pct_did", "median_pct",
                                           "normalized_outcome", "rank", "thresholds", "calibrated",
                                           "lee", "selection", "iv_lee", "iv_complier_ate_pct"};
  for (const auto& n : names) {
    if (!known.count(n)) bad_field(s.path("estimators"), "unknown estimator '" + n + "'");
  }
  const Dataset d = load_input(ctx);
  InferenceOptions inf;
  inf.cluster = s.flag("cluster", true);
  inf.small_sample = s.flag("small_sample", false);
  const Engine engine = parse_engine(s.str("engine", to_string(Engine::DiffMeans)));
  const bool covariates = s.flag("covariates", false);
  const BootstrapSpec boot = bootstrap_from(ctx, s.section("bootstrap"));
  const bool bootstrap_bounds = s.has("bootstrap");

  struct Row {
    std::string parameter;
    double value, se;
    std::string note;
  };
  std::vector<Row> summary;
  auto add = [&](const std::string& p, double v, double se, const std::string& note = "") {
    summary.push_back({p, v, se, note});
  };

  std::vector<BoundsResult> lee;
  std::vector<EstimateResult> selection;

  for (const auto& name : names) {
    if (name == "ate_pct_means" || name == "median_pct" || name == "rank" || name == "iv_complier_ate_pct") {
      EstimateResult r;
      if (name == "ate_pct_means") r = ate_pct_means(d, inf);
      if (name == "median_pct") r = median_pct(d, boot);
      if (name == "rank") r = rank_ate(d, std::nullopt, engine, inf);
      if (name == "iv_complier_ate_pct") r = iv_complier_ate_pct(d, boot, inf);
      ctx.write_json(name + ".json", result_json(r));
      ctx.write_csv(name + ".csv", result_csv({r}));
      add(name, r.value, r.se);
    } else if (name == "ate_pct_poisson" || name == "att_pct_did") {
      const PropEffect p = name == "ate_pct_poisson" ? ate_pct_poisson(d, covariates, inf) : att_pct_did(d, covariates, inf);
      ctx.write_json(name + ".json", prop_json(p, name));
      CsvTable t({"estimator", "value", "se", "beta", "beta_se"});
      t.add_row({name, format_double(p.value), format_double(p.se), format_double(p.beta), format_double(p.beta_se)});
      ctx.write_csv(name + ".csv", t.str());
      add(name, p.value, p.se);
    } else if (name == "normalized_outcome") {
      const std::string by = s.str("normalize_by", "");
      const auto& cov = d.covariate_names();
      const auto it = std::find(cov.begin(), cov.end(), by);
      if (it == cov.end()) bad_field(s.path("normalize_by"), "must name one of the input covariates");
      const auto r = normalized_outcome_ate(d, static_cast<std::size_t>(it - cov.begin()), engine, inf);
      ctx.write_json(name + ".json", result_json(r));
      ctx.write_csv(name + ".csv", result_csv({r}));
      add(name + ":" + by, r.value, r.se);
    } else if (name == "thresholds") {
      const auto th = s.numbers("thresholds", {});
      if (th.empty()) bad_field(s.path("thresholds"), "required by the thresholds estimator");
      const auto prof = threshold_profile(d, th, engine, inf);
      ordered_json j = ordered_json::array();
      for (const auto& e : prof.effects) j.push_back(result_json(e));
      ctx.write_json(name + ".json", {{"thresholds", th}, {"effects", j}});
      ctx.write_csv(name + ".csv", result_csv(prof.effects));
      for (std::size_t k = 0; k < th.size(); ++k) {
        add(fmt_label("P(Y>=", th[k]) + ")", prof.effects[k].value, prof.effects[k].se);
      }
    } else if (name == "calibrated") {
      const auto xs = s.numbers("x_list", {0.0, 0.1, 1.0, 3.0});
      const bool did = s.flag("did", false);
      std::vector<EstimateResult> rs;
      for (double x : xs) rs.push_back(calibrated_ate(d, x, did, engine, inf));
      std::vector<std::string> header{"row"};
      for (double x : xs) header.push_back(fmt_label("x=", x));
      CsvTable t(header);
      std::vector<std::string> est{"estimate"}, se{"se"};
      for (const auto& r : rs) {
        est.push_back(format_double(r.value));
        se.push_back(format_double(r.se));
      }
      t.add_row(est);
      t.add_row(se);
      ordered_json j = ordered_json::array();
      for (const auto& r : rs) j.push_back(result_json(r));
      ctx.write_json(name + ".json", {{"x_list", xs}, {"effects", j}});
      ctx.write_csv(name + ".csv", t.str());
      for (std::size_t k = 0; k < xs.size(); ++k) add(fmt_label("calibrated x=", xs[k]), rs[k].value, rs[k].se);
    } else if (name == "lee") {
      const auto opt = bootstrap_bounds ? std::optional<BootstrapSpec>(boot) : std::nullopt;
      lee = {lee_bounds(d, OutcomeScale::Log, opt), lee_bounds(d, OutcomeScale::Levels, opt)};
      ctx.write_json(name + ".json", {{"log", bounds_json(lee[0])}, {"levels", bounds_json(lee[1])}});
      ctx.write_csv(name + ".csv", bounds_csv(lee));
      add("lee log lower", lee[0].lower, lee[0].se_lower);
      add("lee log upper", lee[0].upper, lee[0].se_upper);
      add("lee levels lower", lee[1].lower, lee[1].se_lower);
      add("lee levels upper", lee[1].upper, lee[1].se_upper);
    } else if (name == "selection") {
      const auto cs = s.numbers("c_list", {0.0, 0.25, 0.5});
      const auto opt = bootstrap_bounds ? std::optional<BootstrapSpec>(boot) : std::nullopt;
      for (double c : cs) selection.push_back(selection_point_estimate(d, c, opt));
      ordered_json j = ordered_json::array();
      for (const auto& r : selection) j.push_back(result_json(r));
      ctx.write_json(name + ".json", {{"c_list", cs}, {"effects", j}});
      ctx.write_csv(name + ".csv", result_csv(selection));
      for (std::size_t k = 0; k < cs.size(); ++k) add(fmt_label("selection c=", cs[k]), selection[k].value, selection[k].se);
    } else if (name == "iv_lee") {
      IvBoundsOptions o;
      o.mode = s.str("iv_mode", "quadrature") == "monte_carlo" ? IntegrationMode::MonteCarlo : IntegrationMode::Quadrature;
      o.draws = s.count("iv_draws", o.draws);
      o.seed = ctx.seed;
      o.threads = ctx.threads;
      o.scale = parse_scale(s.str("iv_scale", "log"));
      ComplierOptions co;
      co.inference = inf;
      const auto opt = bootstrap_bounds ? std::optional<BootstrapSpec>(boot) : std::nullopt;
      const auto b = iv_lee_bounds(d, o, co, opt);
      ctx.write_json(name + ".json", bounds_json(b));
      ctx.write_csv(name + ".csv", bounds_csv({b}));
      add("iv lee lower", b.lower, b.se_lower);
      add("iv lee upper", b.upper, b.se_upper);
    }
  }

  if (!lee.empty() && !selection.empty()) {
    // bounds in log and levels, then one column per c
    std::vector<std::string> header{"row", "lee_log", "lee_levels"};
    for (const auto& r : selection) header.push_back(fmt_label("c=", r.meta.at("c")));
    CsvTable t(header);
    auto interval = [](double a, double b) { return "[" + format_double(a) + ", " + format_double(b) + "]"; };
    std::vector<std::string> est{"estimate", interval(lee[0].lower, lee[0].upper), interval(lee[1].lower, lee[1].upper)};
    std::vector<std::string> se{"se", interval(lee[0].se_lower, lee[0].se_upper), interval(lee[1].se_lower, lee[1].se_upper)};
    for (const auto& r : selection) {
      est.push_back(format_double(r.value));
      se.push_back(format_double(r.se));
    }
    t.add_row(est);
    t.add_row(se);
    ctx.write_csv("lee_selection_table.csv", t.str());
  }

  CsvTable t({"parameter", "estimate", "se"});
  ordered_json rows = ordered_json::array();
  for (const auto& r : summary) {
    t.add_row({r.parameter, format_double(r.value), format_double(r.se)});
    rows.push_back({{"parameter", r.parameter}, {"estimate", num(r.value)}, {"se", num(r.se)}});
  }
  ctx.write_csv("summary.csv", t.str());
  ctx.write_json("summary.json", {{"rows", rows}, {"n", d.rows()}});
  return 0;
}

// ---- lab

DiscreteMarginals marginals_from(const Context& ctx, const Section& s) {
  if (!s.has("marginals")) bad_field(s.path("marginals"), "required (CSV path or object)");
  if (s.raw("marginals").is_string()) return parse_marginals_csv(read_file(ctx.resolve(s.str("marginals", ""))));
  const Section m = s.section("marginals");
  DiscreteMarginals out{m.numbers("support1", {}), m.numbers("probs1", {}), m.numbers("support0", {}),
                        m.numbers("probs0", {})};
  out.validate();
  return out;
}

ordered_json test_json(const IdentityTest& t) {
  return {{"holds", t.holds}, {"worst_violation", num(t.worst_violation)}, {"witness", t.witness}};
}

int cmd_lab(Context& ctx) {
  const Section s = ctx.root.section("lab");
  ordered_json report;
  std::vector<GFunction> gs;
  for (const auto& name : s.strings("g", {"pct_change", "log_ratio"})) gs.push_back(parse_gfunction(name));
  if (s.has("g_table")) gs.push_back(parse_gtable_csv(read_file(ctx.resolve(s.str("g_table", "")))));

  if (s.has("marginals")) {
    const auto m = marginals_from(ctx, s);
    std::set<double> pos;
    for (double v : m.support1) {
      if (v > 0.0) pos.insert(v);
    }
    for (double v : m.support0) {
      if (v > 0.0) pos.insert(v);
    }
    const auto grid = s.numbers("grid", std::vector<double>(pos.begin(), pos.end()));
    for (double v : grid) {
      if (!(v > 0.0)) bad_field(s.path("grid"), "grid points must be positive");
    }
    const auto scales = s.numbers("scales", {0.01, 0.1, 10.0, 100.0});
    report["marginals"] = {{"support1", m.support1}, {"probs1", m.probs1}, {"support0", m.support0}, {"probs0", m.probs0}};
    ordered_json results = ordered_json::array();
    for (const auto& g : gs) {
      const auto tr = trilemma_report(m, g);
      ordered_json j;
      j["g"] = g.name();
      if (tr.range_computed) {
        j["coupling_range"] = {{"min", num(tr.range.min)},
                               {"max", num(tr.range.max)},
                               {"verdict", tr.range.point_identified ? "point identified" : "partially identified"}};
      } else {
        j["coupling_range"] = {{"min", nullptr}, {"max", nullptr}, {"verdict", "undefined on the support"}};
      }
      j["separability"] = test_json(separability_test(g, grid));
      j["scale_invariance"] = test_json(scale_invariance_test(g, grid, scales));
      j["trilemma"] = ordered_json::parse(trilemma_json(tr));
      results.push_back(j);
    }
    report["g"] = results;
  }
  if (s.has("joint")) {
    const Section js = s.section("joint");
    DiscreteJoint jt;
    jt.support1 = js.numbers("support1", {});
    jt.support0 = js.numbers("support0", {});
    const auto& pi = js.raw("pi");
    if (!pi.is_array() || pi.size() != jt.support1.size()) bad_field(js.path("pi"), "expected one row per support1 value");
    jt.pi.resize(static_cast<Eigen::Index>(jt.support1.size()), static_cast<Eigen::Index>(jt.support0.size()));
    for (std::size_t i = 0; i < pi.size(); ++i) {
      if (!pi[i].is_array() || pi[i].size() != jt.support0.size()) bad_field(js.path("pi"), "row " + std::to_string(i) + " has the wrong length");
      for (std::size_t k = 0; k < pi[i].size(); ++k) {
        if (!pi[i][k].is_number()) bad_field(js.path("pi"), "expected numbers");
        jt.pi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = pi[i][k].get<double>();
      }
    }
    const auto t = two_part_decomposition(jt);
    report["two_part"] = {{"tau_a", num(t.tau_a)},         {"tau_b", num(t.tau_b)},
                          {"intensive", num(t.intensive)}, {"alpha", num(t.alpha)},
                          {"selection", num(t.selection)}, {"identity_residual", num(t.identity_residual)}};
  }
  if (report.empty()) bad_field("lab", "nothing to do: give marginals and/or joint");
  ctx.write_json("lab_report.json", report);
  return 0;
}

bool is_validation(ErrorKind k) {
  switch (k) {
    case ErrorKind::MissingColumn:
    case ErrorKind::NonNumericCell:
    case ErrorKind::NegativeOutcome:
    case ErrorKind::EmptyDataset:
    case ErrorKind::FileNotFound:
    case ErrorKind::NonPositiveScale:
    case ErrorKind::DuplicateRole:
    case ErrorKind::NonBinaryColumn:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::InvalidC:
    case ErrorKind::MissingInstrument:
    case ErrorKind::InvalidBootstrapSpec:
    case ErrorKind::InfeasibleMarginals:
    case ErrorKind::UnboundedG:
    case ErrorKind::LpSizeExceeded:
    case ErrorKind::InvalidConfig:
      return true;
    default:
      return false;
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

unsigned env_threads() {
  if (const char* e = std::getenv("ZEROEFF_THREADS")) {
    const int v = std::atoi(e);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Treatment effects with zero-valued outcomes", "zeroeff"};
  app.set_version_flag("--version", kVersion);
  app.fallthrough();
  std::string config_path, out_dir, input;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  auto* o_seed = app.add_option("--seed", seed, "RNG seed (overrides config)");
  auto* o_threads = app.add_option("--threads", threads, "worker threads; results do not depend on it")
                        ->check(CLI::PositiveNumber);
  auto* o_out = app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--config", config_path, "JSON config file");
  auto* o_input = app.add_option("--input", input, "input CSV (overrides input.path)");
  app.add_subcommand("simulate", "write a synthetic dataset and its population manifest");
  app.add_subcommand("sensitivity", "scale-sensitivity curve, t-stat table and rescale summary");
  app.add_subcommand("estimate", "run the configured estimators");
  app.add_subcommand("lab", "coupling ranges, identity tests and two-part decomposition");
  app.require_subcommand(1);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  Context ctx;
  ctx.verb = app.get_subcommands().front()->get_name();
  try {
    if (!config_path.empty()) {
      const std::string text = read_file(config_path);
      try {
        ctx.config = json::parse(text);
      } catch (const json::parse_error& e) {
        throw Error(ErrorKind::InvalidConfig, config_path + ": " + e.what());
      }
      if (!ctx.config.is_object()) throw Error(ErrorKind::InvalidConfig, config_path + ": top level must be an object");
      ctx.base = fs::path(config_path).parent_path();
    } else {
      ctx.config = json::object();
    }
    const Section top(ctx.config, "");
    ctx.seed = o_seed->count() ? seed : static_cast<std::uint64_t>(top.count("seed", kDefaultSeed));
    ctx.threads = o_threads->count() ? threads : static_cast<unsigned>(top.count("threads", env_threads()));
    if (ctx.threads == 0) ctx.threads = 1;
    ctx.out = o_out->count() ? fs::path(out_dir) : fs::path(top.str("out", "out"));
    if (o_input->count()) {
      ctx.config["input"]["path"] = fs::absolute(input).string();
    }
    ctx.config["seed"] = ctx.seed;

    // run location and thread count never enter the hash
    json hashed = ctx.config;
    hashed.erase("out");
    hashed.erase("threads");
    if (hashed.contains("input") && hashed["input"].is_object()) hashed["input"].erase("path");
    const std::string hash = hex64(fnv1a(ctx.verb + "\n" + hashed.dump()));
    ctx.provenance = {{"seed", ctx.seed}, {"config_hash", hash}, {"version", kVersion}, {"command", ctx.verb}};
    ctx.csv_comment = "# zeroeff " + std::string(kVersion) + " " + ctx.verb + " seed=" + std::to_string(ctx.seed) +
                      " config_hash=" + hash + "\n";

    int rc = 0;
    if (ctx.verb == "simulate") rc = cmd_simulate(ctx);
    if (ctx.verb == "sensitivity") rc = cmd_sensitivity(ctx);
    if (ctx.verb == "estimate") rc = cmd_estimate(ctx);
    if (ctx.verb == "lab") rc = cmd_lab(ctx);
    for (const auto& f : ctx.written) out << (ctx.out / f).string() << "\n";
    return rc;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_validation(e.kind()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace zeroeff
