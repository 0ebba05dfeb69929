#pragma once

#include "tailcomb/angular.hpp"
#include "tailcomb/samplers.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tailcomb {

std::string read_text_file(const std::string& path);
// Throws ConfigError when the path cannot be written.
void write_text_file(const std::string& path, std::string_view contents);

// Angular measure document:
// {"version":1, "beta":1, "signed":false, "atoms":[[...],...], "weights":[...]}.
DiscreteAngularMeasure measure_from_json(std::string_view text);
std::string measure_to_json(const DiscreteAngularMeasure& m);

// Model document, e.g. {"kind":"multivariate_t", "d":10, "nu":1,
// "sigma":{"kind":"ar","rho":0.5}}. See README for every kind.
ModelSpec model_from_json(std::string_view text);
// Canonical form: sorted keys, shortest round-trip doubles.
std::string model_to_json(const ModelSpec& spec);
// "<kind>-<8 hex digits>" from an FNV-1a hash of the canonical JSON.
std::string model_fingerprint(const ModelSpec& spec);

// Compact presets: "t,nu=1,d=10,sigma=ar:0.5", "gauss,d=10,sigma=exch:0.3",
// "iid,d=10" (Gaussian copula with identity shape), "frechet,d=4"
// (independent Frechet factors).
ModelSpec parse_model_preset(std::string_view preset);

// Either a preset string or a path to a model document.
ModelSpec load_model(const std::string& preset_or_path);

// Whitespace/comma separated reals.
std::vector<double> parse_real_list(std::string_view text);
// One block per line (or per '/'), 1-based indices; returned 0-based.
std::vector<std::vector<std::size_t>> parse_blocks(std::string_view text);

}  // namespace tailcomb
