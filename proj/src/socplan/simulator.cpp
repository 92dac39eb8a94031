// Copyright 2026 The socplan Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "socplan/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <thread>

#include "socplan/design_math.hpp"

namespace socplan {

namespace {

constexpr std::int64_t kChunk = 512;
constexpr double kBoundTol = 1e-12;

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::vector<double> raw_texture(Texture texture, std::size_t cells, Xoshiro256& rng) {
  std::vector<double> t(cells);
  switch (texture) {
    case Texture::kGaussian: {
      std::normal_distribution<double> dist(0.0, 1.0);
      for (double& v : t) v = dist(rng);
      break;
    }
    case Texture::kUniform: {
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      for (double& v : t) v = dist(rng);
      break;
    }
    case Texture::kTwoPoint: {
      // Exactly half the cells high; odd grids leave one cell at the centre.
      for (std::size_t i = 0; i < cells; ++i) t[i] = i < cells / 2 ? 1.0 : -1.0;
      if (cells % 2 == 1) t[cells - 1] = 0.0;
      for (std::size_t i = cells; i > 1; --i) std::swap(t[i - 1], t[rng.below(i)]);
      break;
    }
    case Texture::kAuto:
      break;
  }
  return t;
}

// Rescales to mean mu and population SD sigma_p. Returns false if any value
// leaves [0, 100].
bool standardize(std::vector<double>& t, double mu, double sigma_p) {
  long double sum = 0.0L;
  for (double v : t) sum += v;
  const long double mean = sum / static_cast<long double>(t.size());
  long double ss = 0.0L;
  for (double v : t) ss += (v - mean) * (v - mean);
  const long double sd = std::sqrt(ss / static_cast<long double>(t.size()));
  if (sd == 0.0L) return false;
  for (double& v : t) {
    double c = static_cast<double>(mu + sigma_p * ((v - mean) / sd));
    if (c < -kBoundTol || c > kMaxPercent + kBoundTol) return false;
    v = std::clamp(c, 0.0, kMaxPercent);
  }
  return true;
}

void realize_moments(PlotField& f) {
  long double sum = 0.0L;
  for (double v : f.values) sum += v;
  const long double mean = sum / static_cast<long double>(f.size());
  long double ss = 0.0L;
  for (double v : f.values) ss += (v - mean) * (v - mean);
  f.realized_mean = static_cast<double>(mean);
  f.realized_sd = static_cast<double>(std::sqrt(ss / static_cast<long double>(f.size())));
}

double sample_variance(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

struct RepOutcome {
  double mu_hat = 0.0;
  double sigma_p_sq_hat = 0.0;
  bool covered = false;
};

Claim make_claim(std::string name, double observed, double expected, double mc_se) {
  Claim c{std::move(name), observed, expected, mc_se, false};
  c.pass = std::fabs(observed - expected) <= kClaimSigmas * mc_se;
  return c;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& word : s_) {
    x += 0x9e3779b97f4a7c15ULL;
    word = splitmix64(x - 0x9e3779b97f4a7c15ULL);
  }
}

Xoshiro256::result_type Xoshiro256::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Xoshiro256::below(std::uint64_t bound) {
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t x;
  do {
    x = (*this)();
  } while (x >= limit);
  return x % bound;
}

std::string to_string(SpatialCorrelation v) {
  return v == SpatialCorrelation::kNone ? "none" : "smooth_gradient";
}

std::string to_string(Texture v) {
  switch (v) {
    case Texture::kAuto:
      return "auto";
    case Texture::kGaussian:
      return "gaussian";
    case Texture::kUniform:
      return "uniform";
    case Texture::kTwoPoint:
      return "two_point";
  }
  return "auto";
}

std::string to_string(CompositingStrategy v) {
  return v == CompositingStrategy::kRandom ? "random" : "adjacent";
}

std::string to_string(ErrorDistribution v) {
  return v == ErrorDistribution::kGamma ? "gamma" : "lognormal";
}

std::size_t PlotField::transect_rank(std::size_t cell) const {
  const auto r = static_cast<std::int64_t>(cell) / cols;
  const auto c = static_cast<std::int64_t>(cell) % cols;
  return static_cast<std::size_t>(c * rows + r);
}

PlotField generate_plot(double mu, double sigma_p, std::int64_t rows, std::int64_t cols,
                        std::uint64_t texture_seed, SpatialCorrelation correlation,
                        Texture texture) {
  validate_plot(PlotParameters{mu, sigma_p, {}});
  if (rows < 1 || cols < 1 || rows * cols < 2) {
    throw ValidationError("grid", "grid needs at least 2 cells");
  }
  if (rows * cols > 25'000'000) throw ValidationError("grid", "grid exceeds 25M cells");

  PlotField f;
  f.rows = rows;
  f.cols = cols;
  f.correlation = correlation;
  const auto cells = static_cast<std::size_t>(rows * cols);

  if (sigma_p == 0.0) {
    f.values.assign(cells, mu);
    f.texture = texture == Texture::kAuto ? Texture::kGaussian : texture;
  } else {
    std::vector<Texture> candidates;
    if (texture == Texture::kAuto) {
      candidates = {Texture::kGaussian, Texture::kUniform, Texture::kTwoPoint};
    } else {
      candidates = {texture};
    }
    bool ok = false;
    for (Texture t : candidates) {
      Xoshiro256 rng(texture_seed);
      std::vector<double> v = raw_texture(t, cells, rng);
      if (standardize(v, mu, sigma_p)) {
        f.values = std::move(v);
        f.texture = t;
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ValidationError("plot.sigma_p", "no " + to_string(texture) +
                                                " texture keeps every cell in [0, 100] for mu=" +
                                                std::to_string(mu) +
                                                ", sigma_p=" + std::to_string(sigma_p));
    }
  }

  if (correlation == SpatialCorrelation::kSmoothGradient) {
    std::vector<double> sorted = f.values;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t cell = 0; cell < cells; ++cell) f.values[cell] = sorted[f.transect_rank(cell)];
  }
  realize_moments(f);
  return f;
}

std::vector<Core> draw_uirs_cores(const PlotField& field, std::int64_t n, Xoshiro256& rng) {
  if (n < 1) throw ValidationError("n", "n must be at least 1");
  std::vector<Core> cores(static_cast<std::size_t>(n));
  for (auto& c : cores) {
    c.cell = static_cast<std::size_t>(rng.below(field.size()));
    c.value = field.values[c.cell];
  }
  return cores;
}

std::vector<double> draw_uirs(const PlotField& field, std::int64_t n, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  const auto cores = draw_uirs_cores(field, n, rng);
  std::vector<double> out(cores.size());
  std::transform(cores.begin(), cores.end(), out.begin(), [](const Core& c) { return c.value; });
  return out;
}

std::vector<double> composite(std::span<const double> cores, std::int64_t k,
                              CompositingStrategy strategy, Xoshiro256& rng) {
  const auto n = static_cast<std::int64_t>(cores.size());
  validate_design(Design{n, k});
  if (n % k != 0) {
    throw ValidationError("design.k", "simulation requires n divisible by k (n=" +
                                          std::to_string(n) + ", k=" + std::to_string(k) + ")");
  }
  std::vector<std::size_t> order(cores.size());
  std::iota(order.begin(), order.end(), 0);
  if (strategy == CompositingStrategy::kRandom) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  }
  const std::int64_t size = n / k;
  std::vector<double> out(static_cast<std::size_t>(k));
  for (std::int64_t g = 0; g < k; ++g) {
    double sum = 0.0;
    for (std::int64_t j = 0; j < size; ++j) sum += cores[order[g * size + j]];
    out[g] = sum / static_cast<double>(size);
  }
  return out;
}

std::vector<double> composite(std::span<const double> cores, std::int64_t k,
                              CompositingStrategy strategy, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  return composite(cores, k, strategy, rng);
}

std::vector<double> apply_assay_error(std::span<const double> samples,
                                      const AssayErrorModel& model, Xoshiro256& rng) {
  const double sd = model.sigma_delta;
  require_finite(sd, "sigma_delta");
  if (sd < 0.0) throw ValidationError("sigma_delta", "sigma_delta must be nonnegative");
  std::vector<double> out(samples.begin(), samples.end());
  if (sd == 0.0) return out;
  const double var = sd * sd;
  if (model.distribution == ErrorDistribution::kGamma) {
    std::gamma_distribution<double> dist(1.0 / var, var);
    for (double& v : out) v *= dist(rng);
  } else {
    const double s2 = std::log1p(var);
    std::lognormal_distribution<double> dist(-0.5 * s2, std::sqrt(s2));
    for (double& v : out) v *= dist(rng);
  }
  return out;
}

std::vector<double> apply_assay_error(std::span<const double> samples,
                                      const AssayErrorModel& model, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  return apply_assay_error(samples, model, rng);
}

ReplicateAssays simulate_replicates(std::span<const double> true_values, std::int64_t r,
                                    const AssayErrorModel& model, std::uint64_t seed) {
  if (r < 2) throw ValidationError("r", "replicates need r >= 2");
  ReplicateAssays out;
  for (std::size_t i = 0; i < true_values.size(); ++i) {
    Xoshiro256 rng(derive_seed(seed, i));
    const std::vector<double> truth(static_cast<std::size_t>(r), true_values[i]);
    out.sample_ids.push_back(std::to_string(i + 1));
    out.groups.push_back(apply_assay_error(truth, model, rng));
  }
  return out;
}

unsigned resolve_threads(unsigned requested) {
  unsigned threads = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("SOC_PLANNER_THREADS")) {
    const long v = std::strtol(cap, nullptr, 10);
    if (v >= 1) threads = std::min(threads, static_cast<unsigned>(v));
  }
  return std::max(1u, threads);
}

SimulationResult run_survey_experiment(const ExperimentConfig& config) {
  validate_plot(config.plot);
  const Design design = validate_design(config.design);
  if (!design.divisible()) {
    throw ValidationError("design.k", "simulation requires n divisible by k (n=" +
                                          std::to_string(design.n) +
                                          ", k=" + std::to_string(design.k) + ")");
  }
  if (config.reps < 1) throw ValidationError("reps", "reps must be at least 1");
  require_finite(config.error.sigma_delta, "sigma_delta");
  if (config.error.sigma_delta < 0.0) {
    throw ValidationError("sigma_delta", "sigma_delta must be nonnegative");
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw ValidationError("alpha", "alpha must lie in (0, 1)");
  }

  const PlotField field =
      generate_plot(config.plot.mu, config.plot.sigma_p, config.grid_rows, config.grid_cols,
                    config.texture_seed, config.correlation, config.texture);

  const double sd = config.error.sigma_delta;
  const double sd2 = sd * sd;
  const double n = static_cast<double>(design.n);
  const double k = static_cast<double>(design.k);
  const bool estimable = design.k >= 2;
  const double t_crit = t_quantile(1.0 - config.alpha / 2.0, n - 1.0);

  const auto reps = static_cast<std::size_t>(config.reps);
  std::vector<RepOutcome> outcomes(reps);

  auto run_one = [&](std::size_t rep) {
    Xoshiro256 rng(derive_seed(config.seed, rep));
    std::vector<Core> cores = draw_uirs_cores(field, design.n, rng);
    if (config.compositing == CompositingStrategy::kAdjacent) {
      std::sort(cores.begin(), cores.end(), [&](const Core& x, const Core& y) {
        return field.transect_rank(x.cell) < field.transect_rank(y.cell);
      });
    }
    std::vector<double> values(cores.size());
    std::transform(cores.begin(), cores.end(), values.begin(),
                   [](const Core& c) { return c.value; });
    const std::vector<double> samples = composite(values, design.k, config.compositing, rng);
    const std::vector<double> measured = apply_assay_error(samples, config.error, rng);

    RepOutcome& out = outcomes[rep];
    out.mu_hat = std::accumulate(measured.begin(), measured.end(), 0.0) / k;
    if (estimable) {
      out.sigma_p_sq_hat = n / k * sample_variance(measured, out.mu_hat);
      const double se = std::sqrt(out.sigma_p_sq_hat * (1.0 + sd2) / n +
                                  out.mu_hat * out.mu_hat * sd2 / k);
      out.covered = std::fabs(out.mu_hat - field.realized_mean) <= t_crit * se;
    }
  };

  const unsigned threads = resolve_threads(config.threads);
  std::atomic<std::size_t> next_chunk{0};
  std::atomic<bool> timed_out{false};
  auto worker = [&] {
    while (!timed_out.load(std::memory_order_relaxed)) {
      const std::size_t begin = next_chunk.fetch_add(kChunk);
      if (begin >= reps) return;
      if (config.deadline && std::chrono::steady_clock::now() > *config.deadline) {
        timed_out = true;
        return;
      }
      const std::size_t end = std::min(reps, begin + kChunk);
      for (std::size_t rep = begin; rep < end; ++rep) run_one(rep);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (timed_out) throw LimitExceededError("simulation exceeded its wall-clock budget");

  // Reduction in replication order.
  const long double R = static_cast<long double>(reps);
  long double sum = 0.0L, sum_sp = 0.0L, covered = 0.0L;
  for (const auto& o : outcomes) {
    sum += o.mu_hat;
    sum_sp += o.sigma_p_sq_hat;
    covered += o.covered ? 1.0L : 0.0L;
  }
  const long double mean = sum / R;
  const long double mean_sp = sum_sp / R;
  long double m2 = 0.0L, m4 = 0.0L, sp_ss = 0.0L;
  for (const auto& o : outcomes) {
    const long double d = o.mu_hat - mean;
    m2 += d * d;
    m4 += d * d * d * d;
    const long double e = o.sigma_p_sq_hat - mean_sp;
    sp_ss += e * e;
  }

  SimulationResult res;
  res.reps = config.reps;
  res.n = design.n;
  res.k = design.k;
  res.sigma_delta = sd;
  res.distribution = config.error.distribution;
  res.compositing = config.compositing;
  res.texture = field.texture;
  res.mu = field.realized_mean;
  res.sigma_p = field.realized_sd;
  res.theoretical_variance =
      estimator_variance(PlotParameters{field.realized_mean, field.realized_sd, {}},
                         AssayMethod{{}, sd, 0.0, 0.0}, design);
  res.mean_mu_hat = static_cast<double>(mean);
  if (reps > 1) {
    const long double var = m2 / (R - 1.0L);
    res.var_mu_hat = static_cast<double>(var);
    res.mc_se_mean = static_cast<double>(std::sqrt(var / R));
    const long double pop_var = m2 / R;
    const long double fourth = m4 / R;
    res.mc_se_var = static_cast<double>(std::sqrt(std::max(0.0L, fourth - pop_var * pop_var) / R));
  }
  res.claims.push_back(make_claim("mean_unbiased", res.mean_mu_hat, res.mu, res.mc_se_mean));
  res.claims.push_back(
      make_claim("variance_matches_formula", res.var_mu_hat, res.theoretical_variance, res.mc_se_var));
  if (estimable) {
    res.mean_sigma_p_sq_hat = static_cast<double>(mean_sp);
    res.mc_se_sigma_p_sq =
        reps > 1 ? static_cast<double>(std::sqrt(sp_ss / (R - 1.0L) / R)) : 0.0;
    res.ci_coverage = static_cast<double>(covered / R);
    // E[(n/k) s^2] = sigma_p^2 (1 + sd^2) + (n/k) mu^2 sd^2; sigma_p^2 when sd = 0.
    res.expected_sigma_p_sq_hat =
        res.sigma_p * res.sigma_p * (1.0 + sd2) + n / k * res.mu * res.mu * sd2;
    res.claims.push_back(make_claim("sigma_p_sq_expectation", *res.mean_sigma_p_sq_hat,
                                    *res.expected_sigma_p_sq_hat, *res.mc_se_sigma_p_sq));
  }
  return res;
}

}  // namespace socplan
