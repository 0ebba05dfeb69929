// tailcomb command line front end. Talks to the library only through the C
// interface in tailcomb/tailcomb.h.
#include "tailcomb/tailcomb.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Failure {
  int code;
  std::string message;
};

void check(tc_status status) {
  if (status == TC_OK) return;
  const int code = status == TC_ERR_NUMERICAL || status == TC_ERR_INTERNAL ? kExitNumerical
                                                                            : kExitConfig;
  throw Failure{code, tc_last_error()};
}

void config_error(const std::string& message) { throw Failure{kExitConfig, message}; }

struct StringDeleter {
  void operator()(char* s) const { tc_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

template <class T, void (*Free)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { Free(p); }
};
using Combiner = std::unique_ptr<tc_combiner, HandleDeleter<tc_combiner, tc_combiner_free>>;
using Test = std::unique_ptr<tc_test, HandleDeleter<tc_test, tc_test_free>>;
using Measure = std::unique_ptr<tc_measure, HandleDeleter<tc_measure, tc_measure_free>>;
using Model = std::unique_ptr<tc_model, HandleDeleter<tc_model, tc_model_free>>;

std::string read_all(const std::string& path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) config_error("cannot write '" + path + "'");
  out << text;
  if (!out) config_error("write to '" + path + "' failed");
}

std::vector<double> parse_reals(const std::string& line) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) config_error("not a number: '" + token + "'");
    out.push_back(v);
    token.clear();
  };
  for (char c : line) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// combine ------------------------------------------------------------------

struct CombineArgs {
  std::string test;
  double gamma = 0.0;
  std::string weights_file;
  std::string blocks_file;
  std::string pvalues = "-";
};

int run_combine(const CombineArgs& a) {
  std::vector<double> weights;
  if (!a.weights_file.empty()) weights = parse_reals(read_all(a.weights_file));
  std::vector<std::size_t> block_indices;
  std::vector<std::size_t> block_sizes;
  if (!a.blocks_file.empty()) {
    std::istringstream lines(read_all(a.blocks_file));
    std::string line;
    while (std::getline(lines, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos || line.front() == '#') continue;
      const auto values = parse_reals(line);
      for (double v : values) {
        if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
          config_error("block indices must be positive integers (1-based)");
        }
        block_indices.push_back(static_cast<std::size_t>(v));
      }
      block_sizes.push_back(values.size());
    }
  }

  std::istringstream lines(read_all(a.pvalues));
  std::string line;
  Test test;
  std::size_t d = 0;
  std::string out;
  while (std::getline(lines, line)) {
    const auto p = parse_reals(line);
    if (p.empty()) continue;
    if (!test) {
      d = p.size();
      tc_test_options options{};
      options.weights = weights.data();
      options.n_weights = weights.size();
      options.gamma = a.gamma;
      options.block_indices = block_indices.data();
      options.block_sizes = block_sizes.data();
      options.n_blocks = block_sizes.size();
      tc_test* raw = nullptr;
      check(tc_test_create(a.test.c_str(), d, &options, &raw));
      test.reset(raw);
    }
    if (p.size() != d) config_error("every p-value line must have " + std::to_string(d) + " entries");
    double value = 0.0;
    check(tc_combined_pvalue(test.get(), p.data(), p.size(), &value));
    out += format_real(value) + "\n";
  }
  write_output("-", out);
  return kExitOk;
}

// ratio / lambda -------------------------------------------------------------

struct RatioArgs {
  std::string combiner;
  std::string measure;
  double beta = 0.0;
  double tol = 1e-9;
};

int run_ratio(const RatioArgs& a) {
  tc_measure* raw_measure = nullptr;
  check(tc_measure_load(a.measure.c_str(), &raw_measure));
  Measure measure(raw_measure);
  tc_combiner* raw_combiner = nullptr;
  check(tc_combiner_parse(a.combiner.c_str(), tc_measure_dimension(measure.get()), &raw_combiner));
  Combiner combiner(raw_combiner);
  double ratio = 0.0;
  check(tc_asymptotic_ratio(combiner.get(), measure.get(), a.beta, &ratio));
  tc_honesty honesty = TC_CALIBRATED;
  check(tc_classify(combiner.get(), measure.get(), a.beta, a.tol, &honesty));
  static const char* const kNames[] = {"calibrated", "strictly_honest", "liberal"};
  std::printf("ratio %s\nclassification %s\n", format_real(ratio).c_str(), kNames[honesty]);
  return kExitOk;
}

int run_lambda(double nu, double rho) {
  double value = 0.0;
  check(tc_t_copula_lambda(nu, rho, &value));
  std::printf("%s\n", format_real(value).c_str());
  return kExitOk;
}

// calibrate / tailscale ------------------------------------------------------

struct CalibrateArgs {
  std::vector<std::string> models;
  std::string tests = "pct,cct,tippett";
  std::string alphas = "1e-2,1e-3,1e-4";
  std::uint64_t n = 1000000;
  std::uint64_t seed = 42;
  unsigned workers = 0;
  std::string out;
};

Model load_model(const std::string& spec) {
  tc_model* raw = nullptr;
  check(tc_model_load(spec.c_str(), &raw));
  return Model(raw);
}

int run_calibrate(const CalibrateArgs& a) {
  const auto tests = split_list(a.tests);
  const auto test_ptrs = c_strings(tests);
  const auto alphas = parse_reals(a.alphas);
  char* warnings = nullptr;
  check(tc_calibration_warnings(a.n, alphas.data(), alphas.size(), &warnings));
  OwnedString warnings_owned(warnings);
  if (*warnings) std::fprintf(stderr, "warning: %s", warnings);
  std::vector<OwnedString> parts;
  std::vector<const char*> part_ptrs;
  for (const auto& spec : a.models) {
    Model model = load_model(spec);
    char* csv = nullptr;
    check(tc_calibrate(model.get(), test_ptrs.data(), test_ptrs.size(), alphas.data(),
                       alphas.size(), a.n, a.seed, a.workers, &csv));
    parts.emplace_back(csv);
    part_ptrs.push_back(csv);
  }
  char* merged = nullptr;
  check(tc_calibration_csv_merge(part_ptrs.data(), part_ptrs.size(), &merged));
  OwnedString merged_owned(merged);
  write_output(a.out, merged);
  return kExitOk;
}

struct TailScaleArgs {
  std::string model;
  std::string combiner = "linear";
  std::string thresholds = "1e2,1e3,1e4";
  std::uint64_t n = 1000000;
  std::uint64_t seed = 42;
  unsigned workers = 0;
  std::string out;
};

int run_tailscale(const TailScaleArgs& a) {
  Model model = load_model(a.model);
  tc_combiner* raw = nullptr;
  check(tc_combiner_parse(a.combiner.c_str(), tc_model_dimension(model.get()), &raw));
  Combiner combiner(raw);
  const auto thresholds = parse_reals(a.thresholds);
  char* csv = nullptr;
  check(tc_tailscale(model.get(), combiner.get(), thresholds.data(), thresholds.size(), a.n,
                     a.seed, a.workers, &csv));
  OwnedString csv_owned(csv);
  write_output(a.out, csv);
  return kExitOk;
}

// power ----------------------------------------------------------------------

struct PowerArgs {
  std::string preset = "t";
  double nu = 10.0;
  std::size_t d = 10;
  std::string sigma = "ar:0.5";
  std::string direction = "bottom";
  std::string effects = "0:40:21";
  double alpha = 0.05;
  std::uint64_t n = 100000;
  std::uint64_t seed = 42;
  std::string tests = "pct,cct";
  unsigned workers = 0;
  std::string out;
};

int run_power(const PowerArgs& a) {
  if (a.preset != "t") config_error("power supports only the t preset");
  std::size_t count = 0;
  tc_status status = tc_parse_effect_grid(a.effects.c_str(), nullptr, 0, &count);
  if (status != TC_OK && count == 0) check(status);
  std::vector<double> effects(count);
  check(tc_parse_effect_grid(a.effects.c_str(), effects.data(), effects.size(), &count));
  const auto tests = split_list(a.tests);
  const auto test_ptrs = c_strings(tests);
  tc_power_config config{};
  config.nu = a.nu;
  config.d = a.d;
  config.sigma = a.sigma.c_str();
  config.direction = a.direction == "top" ? TC_TOP_EIGEN : TC_BOTTOM_EIGEN;
  config.effects = effects.data();
  config.n_effects = effects.size();
  config.alpha = a.alpha;
  config.n = a.n;
  config.seed = a.seed;
  config.tests = test_ptrs.data();
  config.n_tests = test_ptrs.size();
  config.workers = a.workers;
  std::fprintf(stderr,
               "baseline np_lr: Neyman-Pearson likelihood ratio of the t density at the true "
               "mu against mu = 0; threshold is the empirical (1 - alpha) quantile of a null "
               "run on a seed-offset stream. It is an upper envelope, not a generalized LRT.\n");
  char* csv = nullptr;
  check(tc_power(&config, &csv));
  OwnedString csv_owned(csv);
  write_output(a.out, csv);
  return kExitOk;
}

// falsify --------------------------------------------------------------------

struct FalsifyArgs {
  std::string combiner = "tippett";
  std::size_t d = 2;
  double beta = 1.0;
  std::size_t atoms = 8;
  std::uint64_t budget = 10000;
  std::uint64_t seed = 42;
  std::string out;
};

int run_falsify(const FalsifyArgs& a) {
  tc_combiner* raw = nullptr;
  check(tc_combiner_parse(a.combiner.c_str(), a.d, &raw));
  Combiner combiner(raw);
  char* json = nullptr;
  check(tc_falsify(combiner.get(), a.d, a.beta, a.atoms, a.budget, a.seed, &json));
  OwnedString json_owned(json);
  write_output(a.out, json);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tailed p-value combination tests"};
  app.set_config("--config", "", "TOML/INI file with option defaults (flags take precedence)");
  // Lets --config follow the subcommand name.
  app.fallthrough();
  app.require_subcommand(1);

  CombineArgs combine;
  auto* c = app.add_subcommand("combine", "Combined p-value for each line of p-values");
  c->add_option("--test", combine.test, "pct, cct, tippett, fct or powermean")->required();
  c->add_option("--gamma", combine.gamma, "Power-mean exponent");
  c->add_option("--weights", combine.weights_file, "File with weights");
  c->add_option("--blocks", combine.blocks_file, "File with one 1-based block per line (fct)");
  c->add_option("--pvalues", combine.pvalues, "File of p-value vectors, '-' for stdin");

  RatioArgs ratio;
  auto* r = app.add_subcommand("ratio", "Asymptotic calibration ratio for an angular measure");
  r->add_option("--combiner", ratio.combiner, "linear, tippett, powermean:gamma=G, maxlinear:...")
      ->required();
  r->add_option("--measure", ratio.measure, "Angular measure JSON file")->required();
  r->add_option("--beta", ratio.beta, "Override the measure's tail index");
  r->add_option("--tol", ratio.tol, "Classification tolerance");

  double nu = 1.0;
  double rho = 0.0;
  auto* l = app.add_subcommand("lambda", "Tail-dependence coefficient of the t copula");
  l->add_option("--nu", nu)->required();
  l->add_option("--rho", rho)->required();

  CalibrateArgs calibrate;
  auto* cal = app.add_subcommand("calibrate", "Monte Carlo size of combination tests");
  cal->add_option("--model", calibrate.models, "Model files or presets (repeatable)")->required();
  cal->add_option("--tests", calibrate.tests);
  cal->add_option("--alphas", calibrate.alphas);
  cal->add_option("--n", calibrate.n);
  cal->add_option("--seed", calibrate.seed);
  cal->add_option("--workers", calibrate.workers);
  cal->add_option("--out", calibrate.out, "CSV path (stdout when omitted)");

  PowerArgs power;
  auto* pw = app.add_subcommand("power", "Power against shifted multivariate t alternatives");
  pw->add_option("--preset", power.preset);
  pw->add_option("--nu", power.nu);
  pw->add_option("--d", power.d);
  pw->add_option("--sigma", power.sigma);
  pw->add_option("--direction", power.direction)->check(CLI::IsMember({"top", "bottom"}));
  pw->add_option("--effects", power.effects, "start:stop:count or a comma list");
  pw->add_option("--alpha", power.alpha);
  pw->add_option("--n", power.n);
  pw->add_option("--seed", power.seed);
  pw->add_option("--tests", power.tests);
  pw->add_option("--workers", power.workers);
  pw->add_option("--out", power.out);

  FalsifyArgs falsify;
  auto* f = app.add_subcommand("falsify", "Search for measures that break calibration");
  f->add_option("--combiner", falsify.combiner);
  f->add_option("--d", falsify.d);
  f->add_option("--beta", falsify.beta);
  f->add_option("--atoms", falsify.atoms);
  f->add_option("--budget", falsify.budget);
  f->add_option("--seed", falsify.seed);
  f->add_option("--out", falsify.out);

  TailScaleArgs tailscale;
  auto* ts = app.add_subcommand("tailscale", "Monte Carlo t P[h(X) > t] on raw model draws");
  ts->add_option("--model", tailscale.model)->required();
  ts->add_option("--combiner", tailscale.combiner);
  ts->add_option("--thresholds", tailscale.thresholds);
  ts->add_option("--n", tailscale.n);
  ts->add_option("--seed", tailscale.seed);
  ts->add_option("--workers", tailscale.workers);
  ts->add_option("--out", tailscale.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (c->parsed()) return run_combine(combine);
    if (r->parsed()) return run_ratio(ratio);
    if (l->parsed()) return run_lambda(nu, rho);
    if (cal->parsed()) return run_calibrate(calibrate);
    if (pw->parsed()) return run_power(power);
    if (f->parsed()) return run_falsify(falsify);
    if (ts->parsed()) return run_tailscale(tailscale);
  } catch (const Failure& failure) {
    std::fprintf(stderr, "error: %s\n", failure.message.c_str());
    return failure.code;
  }
  return kExitOk;
}
