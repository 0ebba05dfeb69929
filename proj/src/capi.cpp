#include "tailcomb/tailcomb.h"

#include "tailcomb/angular.hpp"
#include "tailcomb/combiners.hpp"
#include "tailcomb/error.hpp"
#include "tailcomb/experiments.hpp"
#include "tailcomb/io.hpp"
#include "tailcomb/samplers.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <new>
#include <stdexcept>
#include <string>

struct tc_combiner {
  tailcomb::Combiner value;
};
struct tc_test {
  tailcomb::CombinationTest value;
};
struct tc_measure {
  tailcomb::DiscreteAngularMeasure value;
};
struct tc_model {
  tailcomb::ModelSpec value;
};

namespace {

thread_local std::string last_error;

struct NullArgument : std::invalid_argument {
  NullArgument() : std::invalid_argument("null argument") {}
};

tc_status fail(tc_status status, const char* message) {
  last_error = message;
  return status;
}

template <class Fn>
tc_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return TC_OK;
  } catch (const NullArgument& e) {
    return fail(TC_ERR_NULL_ARG, e.what());
  } catch (const tailcomb::DomainError& e) {
    return fail(TC_ERR_DOMAIN, e.what());
  } catch (const tailcomb::ConfigError& e) {
    return fail(TC_ERR_CONFIG, e.what());
  } catch (const tailcomb::NumericalError& e) {
    return fail(TC_ERR_NUMERICAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TC_ERR_INTERNAL, "unknown error");
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p) {
  if (!p) throw NullArgument();
}

tailcomb::TailScale to_scale(tc_tail_scale s) {
  switch (s) {
    case TC_PARETO1: return tailcomb::TailScale::Pareto1;
    case TC_CAUCHY: return tailcomb::TailScale::Cauchy;
    case TC_FRECHET1: return tailcomb::TailScale::Frechet1;
  }
  throw tailcomb::ConfigError("unknown tail scale");
}

std::vector<tailcomb::CombinationTest> parse_tests(const char* const* tests, size_t n,
                                                   size_t d) {
  if (n > 0) require(tests);
  std::vector<tailcomb::CombinationTest> out;
  for (size_t i = 0; i < n; ++i) {
    require(tests[i]);
    out.push_back(tailcomb::parse_test(tests[i], d));
  }
  return out;
}

tailcomb::DiscreteAngularMeasure measure_at(const tc_measure* m, double beta) {
  return beta > 0.0 ? m->value.with_beta(beta) : m->value;
}

}  // namespace

extern "C" {

const char* tc_version(void) { return "1.0.0"; }

const char* tc_last_error(void) { return last_error.c_str(); }

void tc_string_free(char* s) { std::free(s); }

tc_status tc_transform(tc_tail_scale scale, double p, double* out) {
  return guarded([&] {
    require(out);
    *out = tailcomb::tail_scale_inverse_survival(to_scale(scale), p);
  });
}

tc_status tc_survival(tc_tail_scale scale, double x, double* out) {
  return guarded([&] {
    require(out);
    *out = tailcomb::tail_scale_survival(to_scale(scale), x);
  });
}

tc_status tc_student_t_cdf(double x, double nu, double* out) {
  return guarded([&] {
    require(out);
    *out = tailcomb::student_t_cdf(x, nu);
  });
}

tc_status tc_sidak_screen(double p_min, size_t m, double* out) {
  return guarded([&] {
    require(out);
    *out = tailcomb::sidak_screen(p_min, m);
  });
}

tc_status tc_t_copula_lambda(double nu, double rho, double* out) {
  return guarded([&] {
    require(out);
    *out = tailcomb::t_copula_lambda(nu, rho);
  });
}

tc_status tc_combiner_parse(const char* spec, size_t d, tc_combiner** out) {
  return guarded([&] {
    require(spec);
    require(out);
    *out = new tc_combiner{tailcomb::parse_combiner(spec, d)};
  });
}

void tc_combiner_free(tc_combiner* c) { delete c; }

size_t tc_combiner_dimension(const tc_combiner* c) { return c ? c->value.dimension() : 0; }

tc_status tc_combiner_evaluate(const tc_combiner* c, const double* x, size_t n, double* out) {
  return guarded([&] {
    require(c);
    require(x);
    require(out);
    *out = c->value.evaluate({x, n});
  });
}

tc_status tc_combiner_describe(const tc_combiner* c, char** out) {
  return guarded([&] {
    require(c);
    require(out);
    *out = duplicate(c->value.describe());
  });
}

tc_status tc_test_create(const char* name, size_t d, const tc_test_options* options,
                         tc_test** out) {
  return guarded([&] {
    require(name);
    require(out);
    const std::string kind = name;
    std::vector<double> weights;
    if (options && options->n_weights > 0) {
      require(options->weights);
      weights.assign(options->weights, options->weights + options->n_weights);
    }
    if (weights.empty() && kind != "fct") weights.assign(d, d ? 1.0 / static_cast<double>(d) : 0.0);
    if (kind == "pct") {
      *out = new tc_test{tailcomb::CombinationTest::pct(std::move(weights))};
    } else if (kind == "cct") {
      *out = new tc_test{tailcomb::CombinationTest::cct(std::move(weights))};
    } else if (kind == "tippett") {
      *out = new tc_test{tailcomb::CombinationTest::tippett(d)};
    } else if (kind == "powermean") {
      if (!options || !(options->gamma > 0.0)) {
        throw tailcomb::ConfigError("powermean needs gamma > 0");
      }
      *out = new tc_test{tailcomb::CombinationTest::power_mean(std::move(weights), options->gamma)};
    } else if (kind == "fct") {
      std::vector<std::vector<std::size_t>> blocks;
      if (options && options->n_blocks > 0) {
        require(options->block_indices);
        require(options->block_sizes);
        std::size_t pos = 0;
        for (size_t b = 0; b < options->n_blocks; ++b) {
          auto& block = blocks.emplace_back();
          for (size_t k = 0; k < options->block_sizes[b]; ++k) {
            const size_t idx = options->block_indices[pos++];
            if (idx == 0) throw tailcomb::ConfigError("block indices are 1-based");
            block.push_back(idx - 1);
          }
        }
      } else {
        for (size_t j = 0; j < d; ++j) blocks.push_back({j});
      }
      if (weights.empty()) weights.assign(blocks.size(), 1.0 / static_cast<double>(blocks.size()));
      *out = new tc_test{tailcomb::CombinationTest::fct(std::move(blocks), std::move(weights), d)};
    } else {
      throw tailcomb::ConfigError("unknown test '" + kind + "'");
    }
  });
}

tc_status tc_test_parse(const char* spec, size_t d, tc_test** out) {
  return guarded([&] {
    require(spec);
    require(out);
    *out = new tc_test{tailcomb::parse_test(spec, d)};
  });
}

void tc_test_free(tc_test* t) { delete t; }

size_t tc_test_dimension(const tc_test* t) { return t ? t->value.dimension() : 0; }

tc_status tc_combined_pvalue(const tc_test* t, const double* p, size_t n, double* out) {
  return guarded([&] {
    require(t);
    require(p);
    require(out);
    if (n != t->value.dimension()) {
      throw tailcomb::ConfigError("expected " + std::to_string(t->value.dimension()) +
                                  " p-values, got " + std::to_string(n));
    }
    *out = tailcomb::combined_pvalue(t->value, std::span<const double>(p, n));
  });
}

tc_status tc_measure_from_json(const char* json, tc_measure** out) {
  return guarded([&] {
    require(json);
    require(out);
    *out = new tc_measure{tailcomb::measure_from_json(json)};
  });
}

tc_status tc_measure_load(const char* path, tc_measure** out) {
  return guarded([&] {
    require(path);
    require(out);
    *out = new tc_measure{tailcomb::measure_from_json(tailcomb::read_text_file(path))};
  });
}

void tc_measure_free(tc_measure* m) { delete m; }

size_t tc_measure_dimension(const tc_measure* m) { return m ? m->value.dimension() : 0; }

tc_status tc_asymptotic_ratio(const tc_combiner* c, const tc_measure* m, double beta,
                              double* out) {
  return guarded([&] {
    require(c);
    require(m);
    require(out);
    *out = tailcomb::asymptotic_ratio(c->value, measure_at(m, beta));
  });
}

tc_status tc_classify(const tc_combiner* c, const tc_measure* m, double beta, double tol,
                      tc_honesty* out) {
  return guarded([&] {
    require(c);
    require(m);
    require(out);
    switch (tailcomb::classify(c->value, measure_at(m, beta), tol)) {
      case tailcomb::Honesty::Calibrated: *out = TC_CALIBRATED; break;
      case tailcomb::Honesty::StrictlyHonest: *out = TC_STRICTLY_HONEST; break;
      case tailcomb::Honesty::Liberal: *out = TC_LIBERAL; break;
    }
  });
}

tc_status tc_model_load(const char* preset_or_path, tc_model** out) {
  return guarded([&] {
    require(preset_or_path);
    require(out);
    auto spec = tailcomb::load_model(preset_or_path);
    tailcomb::Model validate(spec);
    *out = new tc_model{std::move(spec)};
  });
}

tc_status tc_model_from_json(const char* json, tc_model** out) {
  return guarded([&] {
    require(json);
    require(out);
    auto spec = tailcomb::model_from_json(json);
    tailcomb::Model validate(spec);
    *out = new tc_model{std::move(spec)};
  });
}

void tc_model_free(tc_model* m) { delete m; }

size_t tc_model_dimension(const tc_model* m) { return m ? m->value.d : 0; }

tc_status tc_model_fingerprint(const tc_model* m, char** out) {
  return guarded([&] {
    require(m);
    require(out);
    *out = duplicate(tailcomb::model_fingerprint(m->value));
  });
}

tc_status tc_calibrate(const tc_model* model, const char* const* tests, size_t n_tests,
                       const double* alphas, size_t n_alphas, uint64_t n, uint64_t seed,
                       unsigned workers, char** csv) {
  return guarded([&] {
    require(model);
    require(alphas);
    require(csv);
    const auto parsed = parse_tests(tests, n_tests, model->value.d);
    tailcomb::ExecutionOptions exec;
    exec.workers = workers;
    const auto records = tailcomb::run_calibration(model->value, parsed, {alphas, n_alphas},
                                                   static_cast<std::size_t>(n), seed, exec);
    *csv = duplicate(tailcomb::calibration_csv(records));
  });
}

tc_status tc_calibration_csv_merge(const char* const* csvs, size_t n_csvs, char** out) {
  return guarded([&] {
    require(out);
    if (n_csvs > 0) require(csvs);
    std::vector<tailcomb::CalibrationRecord> all;
    for (size_t i = 0; i < n_csvs; ++i) {
      require(csvs[i]);
      auto part = tailcomb::parse_calibration_csv(csvs[i]);
      all.insert(all.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    }
    *out = duplicate(tailcomb::calibration_csv(std::move(all)));
  });
}

tc_status tc_calibration_warnings(uint64_t n, const double* alphas, size_t n_alphas, char** out) {
  return guarded([&] {
    require(alphas);
    require(out);
    std::string text;
    for (const auto& w : tailcomb::calibration_warnings(static_cast<std::size_t>(n),
                                                        {alphas, n_alphas})) {
      text += w + "\n";
    }
    *out = duplicate(text);
  });
}

tc_status tc_tailscale(const tc_model* model, const tc_combiner* c, const double* thresholds,
                       size_t n_thresholds, uint64_t n, uint64_t seed, unsigned workers,
                       char** csv) {
  return guarded([&] {
    require(model);
    require(c);
    require(thresholds);
    require(csv);
    tailcomb::ExecutionOptions exec;
    exec.workers = workers;
    const auto estimates = tailcomb::run_tail_scale(
        model->value, c->value, {thresholds, n_thresholds}, static_cast<std::size_t>(n), seed,
        exec);
    *csv = duplicate(tailcomb::tail_scale_csv(tailcomb::model_fingerprint(model->value),
                                              c->value.describe(), estimates,
                                              tailcomb::tail_scale_limit(model->value, c->value),
                                              seed));
  });
}

tc_status tc_parse_effect_grid(const char* text, double* out, size_t capacity, size_t* count) {
  return guarded([&] {
    require(text);
    require(count);
    const auto grid = tailcomb::parse_effect_grid(text);
    *count = grid.size();
    if (grid.size() > capacity) throw tailcomb::ConfigError("effect grid buffer too small");
    if (!grid.empty()) require(out);
    std::copy(grid.begin(), grid.end(), out);
  });
}

tc_status tc_power(const tc_power_config* config, char** csv) {
  return guarded([&] {
    require(config);
    require(csv);
    require(config->sigma);
    require(config->effects);
    tailcomb::PowerConfig pc;
    pc.nu = config->nu;
    pc.d = config->d;
    const std::string sigma = config->sigma;
    const auto colon = sigma.find(':');
    if (colon == std::string::npos) throw tailcomb::ConfigError("sigma must be ar:<rho> or exch:<rho>");
    const std::string kind = sigma.substr(0, colon);
    if (kind == "ar") {
      pc.sigma.kind = tailcomb::SigmaKind::AutoRegressive;
    } else if (kind == "exch") {
      pc.sigma.kind = tailcomb::SigmaKind::Exchangeable;
    } else {
      throw tailcomb::ConfigError("unknown sigma kind '" + kind + "'");
    }
    const auto rho = tailcomb::parse_real_list(sigma.substr(colon + 1));
    if (rho.size() != 1) throw tailcomb::ConfigError("sigma needs exactly one rho");
    pc.sigma.rho = rho.front();
    pc.direction = config->direction == TC_TOP_EIGEN ? tailcomb::EigenDirection::Top
                                                     : tailcomb::EigenDirection::Bottom;
    pc.effects.assign(config->effects, config->effects + config->n_effects);
    pc.alpha = config->alpha;
    pc.n = static_cast<std::size_t>(config->n);
    pc.seed = config->seed;
    pc.tests = parse_tests(config->tests, config->n_tests, config->d);
    tailcomb::ExecutionOptions exec;
    exec.workers = config->workers;
    *csv = duplicate(tailcomb::power_csv(tailcomb::run_power(pc, exec)));
  });
}

tc_status tc_falsify(const tc_combiner* c, size_t d, double beta, size_t n_atoms, uint64_t budget,
                     uint64_t seed, char** json) {
  return guarded([&] {
    require(c);
    require(json);
    const auto report = tailcomb::run_falsifier(c->value, d, beta, n_atoms, budget, seed);
    *json = duplicate(tailcomb::falsifier_report_json(report));
  });
}

}  // extern "C"
