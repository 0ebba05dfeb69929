#include "tailcomb/experiments.hpp"

#include "tailcomb/error.hpp"
#include "tailcomb/io.hpp"

#include <json.hpp>

#include <cmath>

namespace tailcomb {
namespace {

constexpr double kInitialStep = 0.1;
constexpr double kMinStep = 1e-4;

void normalize_atom(std::span<double> atom) {
  double total = 0.0;
  for (double v : atom) total += v;
  for (double& v : atom) v /= total;
}

struct Candidate {
  std::vector<double> atoms;
  std::optional<DiscreteAngularMeasure> measure;
  double ratio = 1.0;
  double deviation = -1.0;
};

}  // namespace

FalsifierReport run_falsifier(const Combiner& combiner, std::size_t d, double beta,
                              std::size_t n_atoms, std::uint64_t budget, std::uint64_t seed) {
  if (d < 1) throw ConfigError("falsifier needs d >= 1");
  if (n_atoms < 1) throw ConfigError("falsifier needs at least one atom");
  if (budget < 1) throw ConfigError("falsifier budget must be positive");
  if (combiner.dimension() != d) throw ConfigError("combiner dimension does not match d");
  if (!(beta > 0.0)) throw ConfigError("falsifier needs beta > 0");

  RngStream rng(seed, 0);
  FalsifierReport report;
  report.combiner = combiner.describe();
  report.d = d;
  report.beta = beta;
  report.seed = seed;
  report.deviation = -1.0;

  auto evaluate = [&](std::vector<double> atoms) {
    Candidate c;
    c.atoms = std::move(atoms);
    ++report.evaluations;
    auto standardized = standardize_weights(c.atoms, d, beta, false);
    if (!standardized.measure) return c;
    c.ratio = asymptotic_ratio(combiner, *standardized.measure);
    c.deviation = std::fabs(c.ratio - 1.0);
    c.measure = std::move(standardized.measure);
    return c;
  };
  auto keep_best = [&](const Candidate& c) {
    if (c.measure && c.deviation > report.deviation) {
      report.deviation = c.deviation;
      report.best_ratio = c.ratio;
      report.best_measure = c.measure;
    }
  };

  while (report.evaluations < budget) {
    // Restart from uniform Dirichlet proposals.
    std::vector<double> atoms(n_atoms * d);
    for (std::size_t k = 0; k < n_atoms; ++k) {
      std::span<double> atom(atoms.data() + k * d, d);
      for (double& v : atom) v = rng.exponential();
      normalize_atom(atom);
    }
    Candidate current = evaluate(std::move(atoms));
    keep_best(current);

    double step = kInitialStep;
    std::size_t stale = 0;
    const std::size_t patience = 4 * n_atoms * d;
    while (report.evaluations < budget && step >= kMinStep) {
      std::vector<double> trial = current.atoms;
      const auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n_atoms));
      const auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(d));
      std::span<double> atom(trial.data() + std::min(k, n_atoms - 1) * d, d);
      double& coord = atom[std::min(i, d - 1)];
      coord = std::max(0.0, coord + (rng.uniform() < 0.5 ? -step : step));
      double total = 0.0;
      for (double v : atom) total += v;
      if (!(total > 0.0)) continue;
      normalize_atom(atom);
      Candidate next = evaluate(std::move(trial));
      if (next.measure && next.deviation > current.deviation) {
        current = std::move(next);
        keep_best(current);
        stale = 0;
      } else if (++stale >= patience) {
        step *= 0.5;
        stale = 0;
      }
    }
  }
  if (report.deviation < 0.0) report.deviation = 0.0;
  return report;
}

std::string falsifier_report_json(const FalsifierReport& report) {
  nlohmann::ordered_json j;
  j["combiner"] = report.combiner;
  j["d"] = report.d;
  j["beta"] = report.beta;
  j["best_ratio"] = report.best_ratio;
  j["deviation"] = report.deviation;
  j["evaluations"] = report.evaluations;
  j["seed"] = report.seed;
  j["best_measure"] = report.best_measure
                          ? nlohmann::json::parse(measure_to_json(*report.best_measure))
                          : nlohmann::json();
  return j.dump(2) + "\n";
}

}  // namespace tailcomb
