#include "zeroeff/identification_lab.hpp"

#include "zeroeff/error.hpp"
#include "zeroeff/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace zeroeff {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_arm(const std::vector<double>& s, const std::vector<double>& p, const char* arm) {
  const std::string tag = std::string("arm ") + arm + ": ";
  if (s.empty() || s.size() != p.size()) throw Error(ErrorKind::InfeasibleMarginals, tag + "support and probabilities differ in length");
  double total = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!std::isfinite(s[k]) || s[k] < 0.0) throw Error(ErrorKind::InfeasibleMarginals, tag + "support must be non-negative");
    if (k > 0 && !(s[k] > s[k - 1])) throw Error(ErrorKind::InfeasibleMarginals, tag + "support must be sorted and distinct");
    if (!(p[k] >= 0.0)) throw Error(ErrorKind::InfeasibleMarginals, tag + "negative probability");
    total += p[k];
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorKind::InfeasibleMarginals, tag + "probabilities sum to " + std::to_string(total));
}

double mass_at_zero(const std::vector<double>& s, const std::vector<double>& p) {
  return !s.empty() && s.front() == 0.0 ? p.front() : 0.0;
}

}  // namespace

void DiscreteMarginals::validate() const {
  check_arm(support1, probs1, "1");
  check_arm(support0, probs0, "0");
}

bool DiscreteMarginals::has_zero() const { return support1.front() == 0.0 || support0.front() == 0.0; }

DiscreteMarginals empirical_marginals(const Dataset& d) {
  d.require_binary_treatment();
  std::map<double, double> c1, c0;
  double n1 = 0.0, n0 = 0.0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (d.treatment()[i] == 1.0) {
      c1[d.outcome()[i]] += 1.0;
      n1 += 1.0;
    } else {
      c0[d.outcome()[i]] += 1.0;
      n0 += 1.0;
    }
  }
  if (n1 == 0.0 || n0 == 0.0) throw Error(ErrorKind::EmptyCell, "both treatment arms must be non-empty");
  DiscreteMarginals m;
  for (const auto& [v, c] : c1) {
    m.support1.push_back(v);
    m.probs1.push_back(c / n1);
  }
  for (const auto& [v, c] : c0) {
    m.support0.push_back(v);
    m.probs0.push_back(c / n0);
  }
  return m;
}

DiscreteMarginals DiscreteJoint::marginals() const {
  DiscreteMarginals m{support1, {}, support0, {}};
  for (Eigen::Index i = 0; i < pi.rows(); ++i) m.probs1.push_back(pi.row(i).sum());
  for (Eigen::Index j = 0; j < pi.cols(); ++j) m.probs0.push_back(pi.col(j).sum());
  return m;
}

GFunction GFunction::log_ratio() { return GFunction(GKind::LogRatio); }
GFunction GFunction::pct_change() { return GFunction(GKind::PctChange); }
GFunction GFunction::indicator_both_positive() { return GFunction(GKind::IndicatorBothPositive); }

GFunction GFunction::transform_difference(Transform m) {
  GFunction g(GKind::TransformDifference);
  g.m_ = std::move(m);
  return g;
}

GFunction GFunction::custom(std::map<std::pair<double, double>, double> table, std::string name) {
  GFunction g(GKind::Custom);
  g.table_ = std::move(table);
  g.name_ = std::move(name);
  return g;
}

double GFunction::operator()(double y1, double y0) const {
  switch (kind_) {
    case GKind::LogRatio:
      return y1 > 0.0 && y0 > 0.0 ? std::log(y1) - std::log(y0) : kNaN;
    case GKind::PctChange:
      return y0 > 0.0 ? (y1 - y0) / y0 : kNaN;
    case GKind::IndicatorBothPositive:
      return y1 > 0.0 && y0 > 0.0 ? 1.0 : 0.0;
    case GKind::TransformDifference:
      try {
        return m_->apply(y1) - m_->apply(y0);
      } catch (const Error&) {
        return kNaN;
      }
    case GKind::Custom: {
      const auto it = table_.find({y1, y0});
      return it == table_.end() ? kNaN : it->second;
    }
  }
  return kNaN;
}

std::string GFunction::name() const {
  switch (kind_) {
    case GKind::LogRatio: return "log_ratio";
    case GKind::PctChange: return "pct_change";
    case GKind::IndicatorBothPositive: return "both_positive";
    case GKind::TransformDifference: return "diff:" + m_->name();
    case GKind::Custom: return name_;
  }
  return "";
}

GFunction parse_gfunction(const std::string& s) {
  if (s == "log_ratio") return GFunction::log_ratio();
  if (s == "pct_change") return GFunction::pct_change();
  if (s == "both_positive" || s == "indicator_both_positive") return GFunction::indicator_both_positive();
  if (s.rfind("diff:", 0) == 0) return GFunction::transform_difference(parse_transform(s.substr(5)));
  throw Error(ErrorKind::InvalidConfig, "unknown g function '" + s + "'");
}

// Transportation simplex on the bipartite support graph. Entering cell has the
// most negative reduced cost (lowest index on ties); after a long run of
// degenerate pivots the rule switches to first-negative to rule out cycling.
TransportSolution solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                                  const Eigen::MatrixXd& cost) {
  const std::size_t m = supply.size(), n = demand.size();
  if (m == 0 || n == 0 || cost.rows() != static_cast<Eigen::Index>(m) || cost.cols() != static_cast<Eigen::Index>(n)) {
    throw Error(ErrorKind::DimensionMismatch, "transport cost must be supply x demand");
  }
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, n);
  std::vector<char> basic(m * n, 0);
  std::vector<std::pair<std::size_t, std::size_t>> cells;

  // north-west corner
  {
    std::size_t i = 0, j = 0;
    double ra = supply[0], rb = demand[0];
    while (true) {
      const double f = std::max(0.0, std::min(ra, rb));
      x(i, j) = f;
      basic[i * n + j] = 1;
      cells.emplace_back(i, j);
      ra -= f;
      rb -= f;
      if (i + 1 == m && j + 1 == n) break;
      if (i + 1 == m || (j + 1 < n && rb < ra)) {
        rb = demand[++j];
      } else {
        ra = supply[++i];
      }
    }
  }
  // the corner walk leaves any imbalance in the last cell
  if (x(m - 1, n - 1) < 0.0) x(m - 1, n - 1) = 0.0;

  const double tol = 1e-12 * (1.0 + cost.cwiseAbs().maxCoeff());
  const std::size_t nodes = m + n;
  std::vector<double> pot(nodes);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(nodes);  // (neighbour, cell index)
  std::vector<std::ptrdiff_t> parent(nodes), parent_cell(nodes);
  std::vector<std::size_t> queue;
  queue.reserve(nodes);

  auto build_tree = [&](std::size_t root) {
    for (auto& a : adj) a.clear();
    for (std::size_t k = 0; k < cells.size(); ++k) {
      adj[cells[k].first].emplace_back(m + cells[k].second, k);
      adj[m + cells[k].second].emplace_back(cells[k].first, k);
    }
    std::fill(parent.begin(), parent.end(), -1);
    queue.clear();
    queue.push_back(root);
    parent[root] = static_cast<std::ptrdiff_t>(root);
    pot[root] = 0.0;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const std::size_t v = queue[h];
      for (const auto& [w, k] : adj[v]) {
        if (parent[w] != -1) continue;
        parent[w] = static_cast<std::ptrdiff_t>(v);
        parent_cell[w] = static_cast<std::ptrdiff_t>(k);
        const double c = cost(cells[k].first, cells[k].second);
        pot[w] = c - pot[v];  // u_i + v_j = c_ij
        queue.push_back(w);
      }
    }
  };

  TransportSolution sol;
  std::size_t degenerate_run = 0;
  const std::size_t max_pivots = 50 * m * n + 1000;
  while (true) {
    build_tree(0);
    const bool bland = degenerate_run > m + n;
    double best = -tol;
    std::ptrdiff_t ei = -1, ej = -1;
    for (std::size_t i = 0; i < m && !(bland && ei >= 0); ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (basic[i * n + j]) continue;
        const double d = cost(i, j) - pot[i] - pot[m + j];
        if (d < best) {
          best = d;
          ei = static_cast<std::ptrdiff_t>(i);
          ej = static_cast<std::ptrdiff_t>(j);
          if (bland) break;
        }
      }
    }
    if (ei < 0) break;
    if (++sol.pivots > max_pivots) throw Error(ErrorKind::NoConvergence, "transport simplex pivot limit reached");

    // tree path from column ej up to row ei (root is row 0, so walk both to the root)
    build_tree(static_cast<std::size_t>(ei));
    std::vector<std::size_t> path;  // cell indices from column ej back to row ei
    for (std::size_t v = m + static_cast<std::size_t>(ej); v != static_cast<std::size_t>(ei);
         v = static_cast<std::size_t>(parent[v])) {
      path.push_back(static_cast<std::size_t>(parent_cell[v]));
    }
    // from row ei the first edge is a donor (-), alternating; path is stored reversed
    std::reverse(path.begin(), path.end());
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = 0;
    std::size_t leave_id = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const auto [i, j] = cells[path[k]];
      const double f = x(i, j);
      const std::size_t id = i * n + j;
      if (f < theta || (f == theta && id < leave_id)) {
        theta = f;
        leave = path[k];
        leave_id = id;
      }
    }
    degenerate_run = theta == 0.0 ? degenerate_run + 1 : 0;
    for (std::size_t k = 0; k < path.size(); ++k) {
      const auto [i, j] = cells[path[k]];
      x(i, j) += k % 2 == 0 ? -theta : theta;
    }
    const auto [li, lj] = cells[leave];
    x(li, lj) = 0.0;
    basic[leave_id] = 0;
    x(ei, ej) = theta;
    basic[static_cast<std::size_t>(ei) * n + static_cast<std::size_t>(ej)] = 1;
    cells[leave] = {static_cast<std::size_t>(ei), static_cast<std::size_t>(ej)};
  }
  x = x.cwiseMax(0.0);
  sol.value = x.cwiseProduct(cost).sum();
  sol.flow = std::move(x);
  return sol;
}

CouplingRange coupling_range(const DiscreteMarginals& m, const GFunction& g) {
  m.validate();
  if (m.support1.size() > kMaxSupport || m.support0.size() > kMaxSupport) {
    throw Error(ErrorKind::LpSizeExceeded, "supports are limited to " + std::to_string(kMaxSupport) + " points");
  }
  Eigen::MatrixXd c(m.support1.size(), m.support0.size());
  for (std::size_t i = 0; i < m.support1.size(); ++i) {
    for (std::size_t j = 0; j < m.support0.size(); ++j) {
      c(i, j) = g(m.support1[i], m.support0[j]);
      if (!std::isfinite(c(i, j))) {
        std::ostringstream os;
        os << g.name() << " is not finite at (" << m.support1[i] << ", " << m.support0[j] << ")";
        throw Error(ErrorKind::UnboundedG, os.str());
      }
    }
  }
  const auto lo = solve_transport(m.probs1, m.probs0, c);
  const auto hi = solve_transport(m.probs1, m.probs0, -c);
  CouplingRange r;
  r.min = lo.value;
  r.max = -hi.value;
  r.argmin = {m.support1, m.support0, lo.flow};
  r.argmax = {m.support1, m.support0, hi.flow};
  r.point_identified = r.max - r.min < 1e-9 * (std::abs(r.min) + std::abs(r.max) + 1.0);
  return r;
}

namespace {

void record(IdentityTest& t, double violation, std::vector<double> witness) {
  if (violation > t.worst_violation) {
    t.worst_violation = violation;
    t.witness = std::move(witness);
  }
}

}  // namespace

IdentityTest separability_test(const GFunction& g, const std::vector<double>& grid) {
  IdentityTest t;
  for (double y1 : grid) {
    for (double y0 : grid) {
      const double base = g(y1, y0);
      for (double a : grid) {
        const double right = g(y1 + a, y0);
        for (double b : grid) {
          const double lhs = base + g(y1 + a, y0 + b);
          const double rhs = right + g(y1, y0 + b);
          if (!std::isfinite(lhs) || !std::isfinite(rhs)) continue;
          record(t, std::abs(lhs - rhs), {y1, y0, a, b});
        }
      }
    }
  }
  t.holds = t.worst_violation < 1e-9;
  return t;
}

IdentityTest scale_invariance_test(const GFunction& g, const std::vector<double>& grid,
                                   const std::vector<double>& scales) {
  IdentityTest t;
  for (double y1 : grid) {
    for (double y0 : grid) {
      const double base = g(y1, y0);
      for (double a : scales) {
        const double scaled = g(a * y1, a * y0);
        if (!std::isfinite(base) || !std::isfinite(scaled)) continue;
        record(t, std::abs(scaled - base), {y1, y0, a});
      }
    }
  }
  t.holds = t.worst_violation < 1e-9;
  return t;
}

TrilemmaReport trilemma_report(const DiscreteMarginals& m, const GFunction& g) {
  m.validate();
  TrilemmaReport r;
  r.g_name = g.name();
  r.zeros_in_support = m.has_zero();

  std::set<double> pts(m.support1.begin(), m.support1.end());
  pts.insert(m.support0.begin(), m.support0.end());
  const std::vector<double> grid(pts.begin(), pts.end());

  bool finite = true;
  for (double y1 : m.support1) {
    for (double y0 : m.support0) finite = finite && std::isfinite(g(y1, y0));
  }
  bool increasing = true;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double y0 : grid) {
    double prev = -std::numeric_limits<double>::infinity();
    for (double y1 : grid) {
      const double v = g(y1, y0);
      if (!std::isfinite(v)) continue;
      increasing = increasing && v >= prev - 1e-12;
      prev = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  r.averaged_form = finite && increasing && hi > lo;
  r.scale = scale_invariance_test(g, grid, {1e-3, 0.5, 2.0, 10.0, 100.0, 1e4});
  if (finite) {
    r.range = coupling_range(m, g);
    r.range_computed = true;
  }
  r.all_three = r.averaged_form && r.scale.holds && r.range_computed && r.range.point_identified;
  r.contradiction = r.all_three && r.zeros_in_support;

  if (r.all_three && !r.zeros_in_support) {
    const auto rows = static_cast<Eigen::Index>(m.support1.size() * m.support0.size());
    Eigen::MatrixXd x(rows, 2);
    Eigen::VectorXd y(rows);
    Eigen::Index k = 0;
    for (double y1 : m.support1) {
      for (double y0 : m.support0) {
        x(k, 0) = std::log(y1) - std::log(y0);
        x(k, 1) = 1.0;
        y(k++) = g(y1, y0);
      }
    }
    const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
    r.log_c = beta(0);
    r.log_d = beta(1);
    r.log_residual = (y - x * beta).cwiseAbs().maxCoeff();
  }
  return r;
}

std::string trilemma_json(const TrilemmaReport& r) {
  using nlohmann::ordered_json;
  auto num = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
  ordered_json j;
  j["g"] = r.g_name;
  j["zeros_in_support"] = r.zeros_in_support;
  j["a_averaged_form"] = r.averaged_form;
  j["b_scale_invariant"] = {{"holds", r.scale.holds},
                            {"worst_violation", num(r.scale.worst_violation)},
                            {"witness", r.scale.witness}};
  if (r.range_computed) {
    j["c_point_identified"] = {{"holds", r.range.point_identified}, {"min", r.range.min}, {"max", r.range.max}};
  } else {
    j["c_point_identified"] = {{"holds", false}, {"min", nullptr}, {"max", nullptr}};
  }
  j["all_three"] = r.all_three;
  j["contradiction"] = r.contradiction;
  if (r.log_c) j["log_form"] = {{"c", *r.log_c}, {"d", *r.log_d}, {"max_residual", *r.log_residual}};
  return j.dump(2) + "\n";
}

TwoPart two_part_decomposition(const DiscreteJoint& jt) {
  const auto& s1 = jt.support1;
  const auto& s0 = jt.support0;
  if (jt.pi.rows() != static_cast<Eigen::Index>(s1.size()) || jt.pi.cols() != static_cast<Eigen::Index>(s0.size())) {
    throw Error(ErrorKind::DimensionMismatch, "joint must be support1 x support0");
  }
  double forbidden = 0.0, p1 = 0.0, p0 = 0.0, both = 0.0, comp = 0.0;
  double sum1 = 0.0, sum0 = 0.0, sum_both1 = 0.0, sum_both0 = 0.0, sum_comp1 = 0.0;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    for (std::size_t j = 0; j < s0.size(); ++j) {
      const double p = jt.pi(i, j);
      if (p < 0.0) throw Error(ErrorKind::InfeasibleMarginals, "negative joint mass");
      const bool y1 = s1[i] > 0.0, y0 = s0[j] > 0.0;
      if (!y1 && y0) forbidden += p;
      if (y1) {
        p1 += p;
        sum1 += p * s1[i];
      }
      if (y0) {
        p0 += p;
        sum0 += p * s0[j];
      }
      if (y1 && y0) {
        both += p;
        sum_both1 += p * s1[i];
        sum_both0 += p * s0[j];
      }
      if (y1 && !y0) {
        comp += p;
        sum_comp1 += p * s1[i];
      }
    }
  }
  if (forbidden > 0.0) throw Error(ErrorKind::MonotonicityCellViolated, "P(Y1 = 0, Y0 > 0) = " + std::to_string(forbidden));
  if (!(p1 > 0.0) || !(both > 0.0)) throw Error(ErrorKind::DegenerateShares, "need P(Y1 > 0) > 0 and P(Y0 > 0) > 0");
  TwoPart t;
  t.tau_a = p1 - p0;
  t.tau_b = sum1 / p1 - sum0 / p0;
  t.intensive = sum_both1 / both - sum_both0 / both;
  t.alpha = comp / p1;
  t.selection = comp > 0.0 ? sum_comp1 / comp - sum_both1 / both : 0.0;
  t.identity_residual = t.tau_b - (t.intensive + t.alpha * t.selection);
  return t;
}

DiscreteJoint sinkhorn_coupling(const DiscreteMarginals& m, std::uint64_t seed, std::uint64_t stream) {
  m.validate();
  Philox rng(seed, stream);
  const auto r = static_cast<Eigen::Index>(m.support1.size());
  const auto c = static_cast<Eigen::Index>(m.support0.size());
  Eigen::MatrixXd k(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) k(i, j) = std::exp(3.0 * (rng.uniform() - 0.5));
  }
  const Eigen::Map<const Eigen::VectorXd> a(m.probs1.data(), r);
  const Eigen::Map<const Eigen::VectorXd> b(m.probs0.data(), c);
  for (int it = 0; it < 10000; ++it) {
    for (Eigen::Index i = 0; i < r; ++i) {
      const double s = k.row(i).sum();
      k.row(i) *= s > 0.0 ? a(i) / s : 0.0;
    }
    for (Eigen::Index j = 0; j < c; ++j) {
      const double s = k.col(j).sum();
      k.col(j) *= s > 0.0 ? b(j) / s : 0.0;
    }
    if ((k.rowwise().sum() - a).cwiseAbs().maxCoeff() < 1e-14) break;
  }
  return {m.support1, m.support0, k};
}

std::pair<double, double> lee_bounds_lp(const DiscreteMarginals& m, OutcomeScale scale) {
  m.validate();
  const double z1 = mass_at_zero(m.support1, m.probs1);
  const double z0 = mass_at_zero(m.support0, m.probs0);
  const double q1 = 1.0 - z1, q0 = 1.0 - z0;
  if (!(q1 > 0.0) || !(q0 > 0.0)) throw Error(ErrorKind::NoPositiveOutcomes, "an arm has no positive mass");
  auto val = [scale](double y) { return scale == OutcomeScale::Log ? std::log(y) : y; };

  // The arm with more positive mass supplies the rows; the other arm's
  // positives plus the units it sends to zero form the columns.
  const bool treated_rows = q1 >= q0;
  const auto& rs = treated_rows ? m.support1 : m.support0;
  const auto& rp = treated_rows ? m.probs1 : m.probs0;
  const auto& cs = treated_rows ? m.support0 : m.support1;
  const auto& cp = treated_rows ? m.probs0 : m.probs1;
  const double both = std::min(q1, q0);

  std::vector<double> supply, demand;
  std::vector<double> rv, cv;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (rs[i] > 0.0) {
      supply.push_back(rp[i]);
      rv.push_back(val(rs[i]));
    }
  }
  for (std::size_t j = 0; j < cs.size(); ++j) {
    if (cs[j] > 0.0) {
      demand.push_back(cp[j]);
      cv.push_back(val(cs[j]));
    }
  }
  demand.push_back(std::max(0.0, std::abs(z0 - z1)));
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(supply.size()), static_cast<Eigen::Index>(demand.size()));
  for (std::size_t i = 0; i < rv.size(); ++i) {
    for (std::size_t j = 0; j < cv.size(); ++j) {
      cost(i, j) = (treated_rows ? rv[i] - cv[j] : cv[j] - rv[i]) / both;
    }
  }
  const double lo = solve_transport(supply, demand, cost).value;
  const double hi = -solve_transport(supply, demand, -cost).value;
  return {lo, hi};
}

namespace {

std::vector<std::vector<std::string>> split_csv(const std::string& text, std::size_t width, const char* what) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != width) {
      throw Error(ErrorKind::InvalidConfig, std::string(what) + " line " + std::to_string(line_no) + ": expected " +
                                                std::to_string(width) + " columns");
    }
    if (header) {
      header = false;
      continue;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

double cell_number(const std::string& s, const char* what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw Error(ErrorKind::NonNumericCell, std::string(what) + ": '" + s + "' is not a number");
  return v;
}

}  // namespace

DiscreteMarginals parse_marginals_csv(const std::string& text) {
  std::map<double, double> arm1, arm0;
  for (const auto& row : split_csv(text, 3, "marginals")) {
    const double arm = cell_number(row[0], "marginals");
    const double value = cell_number(row[1], "marginals");
    const double prob = cell_number(row[2], "marginals");
    if (arm == 1.0) {
      arm1[value] += prob;
    } else if (arm == 0.0) {
      arm0[value] += prob;
    } else {
      throw Error(ErrorKind::NonBinaryColumn, "marginals: arm must be 0 or 1");
    }
  }
  DiscreteMarginals m;
  for (const auto& [v, p] : arm1) {
    m.support1.push_back(v);
    m.probs1.push_back(p);
  }
  for (const auto& [v, p] : arm0) {
    m.support0.push_back(v);
    m.probs0.push_back(p);
  }
  m.validate();
  return m;
}

GFunction parse_gtable_csv(const std::string& text) {
  std::map<std::pair<double, double>, double> table;
  for (const auto& row : split_csv(text, 3, "g table")) {
    table[{cell_number(row[0], "g table"), cell_number(row[1], "g table")}] = cell_number(row[2], "g table");
  }
  if (table.empty()) throw Error(ErrorKind::EmptyDataset, "g table has no rows");
  return GFunction::custom(std::move(table), "table");
}

}  // namespace zeroeff
