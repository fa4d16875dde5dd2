// Copyright 2026 The pairshap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pairshap/shapley.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <map>

#include "pairshap/random.hpp"
#include "parallel.hpp"

namespace pairshap {

namespace {

constexpr std::size_t kMaxExactPlayers = 24;

// C(n, k) as a double; exact while it fits in 53 bits.
double Binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return c < 0x1.0p53 ? std::round(c) : c;
}

Coalition MaskCoalition(std::uint64_t mask, std::size_t n) {
  return Coalition::FromMask(mask, n);
}

// The game restricted to `active` players; every other player is held
// present. Only used for pairwise games, where the held players are dummies
// and so their membership does not matter.
class ReducedGame final : public CoalitionGame {
 public:
  ReducedGame(const CoalitionGame& base, std::vector<std::size_t> active)
      : base_(base), active_(std::move(active)) {}

  std::size_t n_players() const override { return active_.size(); }

  std::vector<double> Values(std::span<const Coalition> coalitions) const override {
    std::vector<Coalition> full;
    full.reserve(coalitions.size());
    for (const auto& s : coalitions) {
      Coalition c = Coalition::Full(base_.n_players());
      for (std::size_t j = 0; j < active_.size(); ++j) c.set(active_[j], s.contains(j));
      full.push_back(std::move(c));
    }
    return base_.Values(full);
  }

 private:
  const CoalitionGame& base_;
  std::vector<std::size_t> active_;
};

struct WeightedCoalitions {
  std::vector<Coalition> coalitions;
  std::vector<double> weights;
  std::string solver;
};

void AddAllOfSize(std::size_t m, std::size_t s, double weight, WeightedCoalitions& out) {
  // Lexicographic combinations of s out of m.
  std::vector<std::size_t> idx(s);
  for (std::size_t i = 0; i < s; ++i) idx[i] = i;
  for (;;) {
    Coalition c(m);
    for (std::size_t i : idx) c.set(i);
    out.coalitions.push_back(std::move(c));
    out.weights.push_back(weight);
    std::size_t i = s;
    while (i > 0 && idx[i - 1] == m - s + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < s; ++j) idx[j] = idx[j - 1] + 1;
  }
}

WeightedCoalitions ChooseCoalitions(std::size_t m, const SolverConfig& config) {
  WeightedCoalitions out;
  const std::size_t budget = config.n_coalitions;
  if (m < 63 && (std::uint64_t{1} << m) - 2 <= budget) {
    const std::uint64_t full = (std::uint64_t{1} << m) - 1;
    for (std::uint64_t mask = 1; mask < full; ++mask) {
      out.coalitions.push_back(MaskCoalition(mask, m));
      out.weights.push_back(ShapleyKernelWeight(m, static_cast<std::size_t>(std::popcount(mask))));
    }
    out.solver = "kernel_full";
    return out;
  }
  if (budget < 2 * m) {
    ThrowConfig("sampled kernel solver needs n_coalitions >= 2*features (" +
                std::to_string(2 * m) + "), got " + std::to_string(budget));
  }
  out.solver = "kernel_sampled";

  // Sizes s and m-s share a stratum; strata are visited in order of
  // decreasing kernel mass and enumerated while they fit.
  std::size_t remaining = budget;
  std::size_t s = 1;
  const std::size_t half = m / 2;
  for (; s <= half; ++s) {
    const bool self_paired = 2 * s == m;
    const double count = Binomial(m, s) * (self_paired ? 1.0 : 2.0);
    if (count > static_cast<double>(remaining)) break;
    AddAllOfSize(m, s, ShapleyKernelWeight(m, s), out);
    if (!self_paired) AddAllOfSize(m, m - s, ShapleyKernelWeight(m, m - s), out);
    remaining -= static_cast<std::size_t>(count);
  }
  if (s > half || remaining < 2) return out;

  std::vector<std::size_t> sizes;
  std::vector<double> mass;
  double total_mass = 0.0;
  for (std::size_t t = s; t <= half; ++t) {
    const bool self_paired = 2 * t == m;
    const double stratum = static_cast<double>(m - 1) /
                           (static_cast<double>(t) * static_cast<double>(m - t)) *
                           (self_paired ? 1.0 : 2.0);
    sizes.push_back(t);
    mass.push_back(stratum);
    total_mass += stratum;
  }
  Rng rng(config.seed);
  std::map<Coalition, double> draws;
  std::size_t n_draws = 0;
  const std::size_t max_attempts = 50 * budget + 1000;
  for (std::size_t attempt = 0; attempt < max_attempts && draws.size() + 2 <= remaining;
       ++attempt) {
    double u = rng.Uniform() * total_mass;
    std::size_t pick = sizes.size() - 1;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (u < mass[i]) {
        pick = i;
        break;
      }
      u -= mass[i];
    }
    Coalition c(m);
    for (std::size_t k : rng.Sample(m, sizes[pick])) c.set(k);
    Coalition comp = c.Complement();
    draws[std::move(c)] += 1.0;
    draws[std::move(comp)] += 1.0;
    n_draws += 2;
  }
  for (const auto& [c, count] : draws) {
    out.coalitions.push_back(c);
    out.weights.push_back(total_mass * count / static_cast<double>(n_draws));
  }
  return out;
}

// Groups of players whose indicator columns coincide over `coalitions`.
std::vector<std::vector<std::size_t>> IndistinguishableGroups(
    const std::vector<Coalition>& coalitions, std::size_t m) {
  std::vector<std::vector<std::uint8_t>> columns(m);
  for (std::size_t j = 0; j < m; ++j) {
    for (const auto& c : coalitions) columns[j].push_back(c.contains(j) ? 1 : 0);
  }
  std::vector<bool> seen(m, false);
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < m; ++j) {
    if (seen[j]) continue;
    std::vector<std::size_t> group{j};
    for (std::size_t k = j + 1; k < m; ++k) {
      if (!seen[k] && columns[k] == columns[j]) {
        group.push_back(k);
        seen[k] = true;
      }
    }
    if (group.size() > 1) groups.push_back(std::move(group));
  }
  return groups;
}

std::string JoinIndices(const std::vector<std::size_t>& idx) {
  std::string out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(idx[i]);
  }
  return out;
}

std::string IndistinguishableWarning(const std::vector<std::size_t>& features) {
  return "features {" + JoinIndices(features) +
         "} are indistinguishable under the evaluated coalitions";
}

double ElapsedMs(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

template <typename Fn>
std::vector<Explanation> RunBatch(std::size_t n, std::size_t jobs, Fn&& fn,
                                  const std::vector<std::size_t>& row_ids) {
  std::vector<Explanation> out(n);
  std::vector<std::exception_ptr> errors;
  internal::ParallelFor(n, jobs, [&](std::size_t i) { out[i] = fn(i); }, errors);
  std::vector<std::pair<std::size_t, std::string>> failures;
  std::optional<ErrorKind> kind;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    ErrorKind k = ErrorKind::kRuntime;
    std::string message;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      k = e.kind();
      message = e.what();
    } catch (const std::exception& e) {
      message = e.what();
    }
    if (!kind) kind = k;
    failures.emplace_back(row_ids[i], message);
  }
  if (!failures.empty()) {
    std::string message = std::to_string(failures.size()) + " of " + std::to_string(n) +
                          " explanations failed; first: row " +
                          std::to_string(failures.front().first) + ": " +
                          failures.front().second;
    throw BatchError(*kind, message, std::move(failures));
  }
  return out;
}

}  // namespace

const char* ToString(SolverMode mode) {
  switch (mode) {
    case SolverMode::kAuto: return "auto";
    case SolverMode::kExact: return "exact";
    case SolverMode::kKernel: return "kernel";
  }
  return "?";
}

SolverMode ParseSolverMode(const std::string& text) {
  if (text == "auto") return SolverMode::kAuto;
  if (text == "exact") return SolverMode::kExact;
  if (text == "kernel") return SolverMode::kKernel;
  ThrowConfig("unknown solver mode '" + text + "' (expected auto, exact or kernel)");
}

void ValidateSolver(const SolverConfig& config) {
  if (config.n_coalitions == 0) ThrowConfig("n_coalitions must be >= 1");
  if (config.exact_threshold > kMaxExactPlayers) {
    ThrowConfig("exact_threshold may not exceed " + std::to_string(kMaxExactPlayers));
  }
}

double ShapleyKernelWeight(std::size_t n, std::size_t s) {
  if (s == 0 || s >= n) return 0.0;
  return static_cast<double>(n - 1) /
         (Binomial(n, s) * static_cast<double>(s) * static_cast<double>(n - s));
}

Attribution ExactShapley(const CoalitionGame& game, std::size_t exact_threshold) {
  const std::size_t n = game.n_players();
  if (n > exact_threshold || n > kMaxExactPlayers) {
    ThrowConfig("exact solve over " + std::to_string(n) + " features exceeds exact_threshold " +
                std::to_string(std::min(exact_threshold, kMaxExactPlayers)));
  }
  const std::uint64_t count = std::uint64_t{1} << n;
  std::vector<Coalition> all;
  all.reserve(count);
  for (std::uint64_t mask = 0; mask < count; ++mask) all.push_back(MaskCoalition(mask, n));
  const std::vector<double> v = game.Values(all);

  Attribution out;
  out.phi0 = v.front();
  out.prediction = v.back();
  out.n_coalitions = static_cast<std::size_t>(count);
  out.solver = "exact";
  out.phi.assign(n, 0.0);
  if (n == 0) return out;

  // w[s] = s!(n-s-1)!/n! = 1 / (n * C(n-1, s)); symmetric in s <-> n-1-s.
  std::vector<double> w(n);
  for (std::size_t s = 0; s < n; ++s) {
    w[s] = 1.0 / (static_cast<double>(n) * Binomial(n - 1, s));
  }
  const std::uint64_t full = count - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    auto term = [&](std::uint64_t s) {
      return w[static_cast<std::size_t>(std::popcount(s))] * (v[s | bit] - v[s]);
    };
    // S and its mirror (N \ S \ {i}) are summed together so that swapping
    // target and reference negates every partial sum exactly.
    double acc = 0.0;
    for (std::uint64_t s = 0; s < count; ++s) {
      if (s & bit) continue;
      const std::uint64_t mirror = full & ~s & ~bit;
      if (s > mirror) continue;
      acc += s == mirror ? term(s) : term(s) + term(mirror);
    }
    out.phi[i] = acc;
  }
  return out;
}

Attribution KernelShap(const CoalitionGame& game, const SolverConfig& config) {
  ValidateSolver(config);
  const std::size_t m = game.n_players();
  Attribution out;
  if (m <= 1) {
    std::vector<Coalition> ends{Coalition(m)};
    if (m == 1) ends.push_back(Coalition::Full(1));
    const auto v = game.Values(ends);
    out.phi0 = v.front();
    out.prediction = v.back();
    out.phi.assign(m, 0.0);
    if (m == 1) out.phi[0] = v.back() - v.front();
    out.n_coalitions = ends.size();
    out.solver = "kernel_full";
    return out;
  }

  WeightedCoalitions wc = ChooseCoalitions(m, config);
  std::vector<Coalition> query;
  query.reserve(wc.coalitions.size() + 2);
  query.push_back(Coalition(m));
  query.push_back(Coalition::Full(m));
  query.insert(query.end(), wc.coalitions.begin(), wc.coalitions.end());
  const auto v = game.Values(query);
  out.phi0 = v[0];
  out.prediction = v[1];
  out.n_coalitions = query.size();
  out.solver = wc.solver;
  const double delta = out.prediction - out.phi0;

  const std::size_t p = m - 1;  // unknowns left after eliminating the last player
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                                 static_cast<Eigen::Index>(p));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  Eigen::VectorXd a(static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < wc.coalitions.size(); ++r) {
    const Coalition& c = wc.coalitions[r];
    const double zl = c.contains(p) ? 1.0 : 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      a[static_cast<Eigen::Index>(j)] = (c.contains(j) ? 1.0 : 0.0) - zl;
    }
    const double b = v[r + 2] - out.phi0 - zl * delta;
    normal.noalias() += wc.weights[r] * a * a.transpose();
    rhs.noalias() += wc.weights[r] * b * a;
  }

  Eigen::VectorXd x;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  const bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-12;
  if (ok) {
    x = ldlt.solve(rhs);
  } else {
    x = normal.completeOrthogonalDecomposition().solve(rhs);
    out.warnings.push_back("singular kernel system; minimum-norm solution used");
    out.indistinguishable = IndistinguishableGroups(wc.coalitions, m);
  }
  out.phi.resize(m);
  double sum = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    out.phi[j] = x[static_cast<Eigen::Index>(j)];
    sum += out.phi[j];
  }
  out.phi[p] = delta - sum;
  return out;
}

Attribution Solve(const CoalitionGame& game, const SolverConfig& config) {
  ValidateSolver(config);
  switch (config.mode) {
    case SolverMode::kExact:
      return ExactShapley(game, config.exact_threshold);
    case SolverMode::kKernel:
      return KernelShap(game, config);
    case SolverMode::kAuto:
      if (game.n_players() <= config.exact_threshold) {
        return ExactShapley(game, config.exact_threshold);
      }
      return KernelShap(game, config);
  }
  return KernelShap(game, config);
}

double Explanation::EfficiencyResidual() const {
  double total = phi0;
  for (double p : phi) total += p;
  return total - prediction;
}

Explanation PruneAndSolve(const ExplicandPair& pair, const Predictor& predictor,
                          const SolverConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ValueFunction vf(pair, predictor);
  const std::size_t n = pair.target.size();
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < n; ++k) {
    if (!config.prune_dummies || !pair.dummy_mask[k]) active.push_back(k);
  }
  Attribution a;
  if (active.size() == n) {
    a = Solve(vf, config);
  } else {
    ReducedGame reduced(vf, active);
    a = Solve(reduced, config);
  }
  Explanation e;
  e.phi0 = a.phi0;
  e.prediction = a.prediction;
  e.phi.assign(n, 0.0);
  for (std::size_t j = 0; j < active.size(); ++j) e.phi[active[j]] = a.phi[j];
  e.method = MethodKind::kPairwise;
  e.target = pair.target;
  e.reference = pair.reference;
  e.target_row = pair.target_row;
  e.reference_row = pair.reference_row;
  e.dummy_mask = pair.dummy_mask;
  e.similarity = pair.similarity;
  e.fallback = pair.fallback;
  e.n_evaluations = vf.evaluations();
  e.n_coalitions = a.n_coalitions;
  e.solver = a.solver;
  e.warnings = std::move(a.warnings);
  for (const auto& group : a.indistinguishable) {
    std::vector<std::size_t> features;
    for (std::size_t j : group) features.push_back(active[j]);
    e.warnings.push_back(IndistinguishableWarning(features));
  }
  if (pair.fallback) e.warnings.push_back("comparable filter empty; similarity fallback used");
  e.wall_time_ms = ElapsedMs(start);
  return e;
}

Explanation ExplainWithMethod(std::shared_ptr<const PreparedMethod> method,
                              const Predictor& predictor, std::span<const double> target,
                              const SolverConfig& config,
                              std::optional<std::size_t> target_row) {
  const auto start = std::chrono::steady_clock::now();
  const MethodKind kind = method->kind();
  ValueFunction vf(std::move(method), predictor,
                   std::vector<double>(target.begin(), target.end()));
  Attribution a = Solve(vf, config);
  Explanation e;
  e.phi0 = a.phi0;
  e.phi = std::move(a.phi);
  e.prediction = a.prediction;
  e.method = kind;
  e.target.assign(target.begin(), target.end());
  e.target_row = target_row;
  e.n_evaluations = vf.evaluations();
  e.n_coalitions = a.n_coalitions;
  e.solver = a.solver;
  e.warnings = std::move(a.warnings);
  for (const auto& group : a.indistinguishable) {
    e.warnings.push_back(IndistinguishableWarning(group));
  }
  e.wall_time_ms = ElapsedMs(start);
  return e;
}

std::vector<Explanation> ExplainPairs(std::span<const ExplicandPair> pairs,
                                      const Predictor& predictor,
                                      const SolverConfig& config, std::size_t jobs) {
  ValidateSolver(config);
  std::vector<std::size_t> ids(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) ids[i] = pairs[i].target_row.value_or(i);
  return RunBatch(
      pairs.size(), jobs, [&](std::size_t i) { return PruneAndSolve(pairs[i], predictor, config); },
      ids);
}

std::vector<Explanation> ExplainRows(const Dataset& targets,
                                     std::shared_ptr<const PreparedMethod> method,
                                     const Predictor& predictor,
                                     const SolverConfig& config, std::size_t jobs) {
  ValidateSolver(config);
  std::vector<std::size_t> ids(targets.n_rows());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return RunBatch(
      targets.n_rows(), jobs,
      [&](std::size_t i) {
        return ExplainWithMethod(method, predictor, targets.row(i), config, i);
      },
      ids);
}

std::vector<Explanation> ExplainBatch(const Dataset& targets, const Dataset& background,
                                      const Predictor& predictor,
                                      const PairStrategy& strategy,
                                      const MethodConfig& method,
                                      const SolverConfig& solver,
                                      const BatchOptions& options) {
  ValidateSolver(solver);
  if (IsPairwise(method.kind)) {
    PairBatchOptions po;
    po.jobs = options.jobs;
    po.targets_are_background = options.targets_are_background;
    const auto pairs = SelectPairsBatch(targets, background, strategy, po);
    return ExplainPairs(pairs, predictor, solver, options.jobs);
  }
  auto prepared = PreparedMethod::Prepare(method, background);
  return ExplainRows(targets, prepared, predictor, solver, options.jobs);
}

}  // namespace pairshap
