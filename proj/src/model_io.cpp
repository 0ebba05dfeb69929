#include "tailcomb/io.hpp"

#include "tailcomb/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace tailcomb {
namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_real(std::string_view token) {
  const std::string s = trim(token);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

json parse_document(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
  const auto rows = [&] {
    try {
      return j.get<std::vector<std::vector<double>>>();
    } catch (const json::exception&) {
      throw ConfigError(std::string(what) + " must be a matrix (array of rows)");
    }
  }();
  if (rows.empty() || rows.front().empty()) throw ConfigError(std::string(what) + " is empty");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) {
      throw ConfigError(std::string(what) + " has ragged rows");
    }
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

SigmaSpec sigma_from_json(const json& j) {
  SigmaSpec s;
  if (j.is_array()) {
    s.kind = SigmaKind::Dense;
    s.dense = matrix_from_json(j, "sigma");
    return s;
  }
  if (!j.is_object()) throw ConfigError("sigma must be {\"kind\":..., \"rho\":...} or a matrix");
  const auto kind = field<std::string>(j, "kind");
  if (kind == "ar") {
    s.kind = SigmaKind::AutoRegressive;
  } else if (kind == "exch") {
    s.kind = SigmaKind::Exchangeable;
  } else {
    throw ConfigError("unknown sigma kind '" + kind + "' (expected ar or exch)");
  }
  s.rho = field<double>(j, "rho");
  return s;
}

json sigma_to_json(const SigmaSpec& s) {
  if (s.kind == SigmaKind::Dense) return matrix_to_json(s.dense);
  return json{{"kind", std::string(to_string(s.kind))}, {"rho", s.rho}};
}

DiscreteAngularMeasure measure_from_object(const json& j) {
  if (!j.is_object()) throw ConfigError("angular measure must be a JSON object");
  if (j.contains("version") && field<int>(j, "version") != 1) {
    throw ConfigError("unsupported angular measure version");
  }
  const double beta = j.contains("beta") ? field<double>(j, "beta") : 1.0;
  const bool is_signed = j.contains("signed") ? field<bool>(j, "signed") : false;
  return DiscreteAngularMeasure::from_rows(
      beta, field<std::vector<std::vector<double>>>(j, "atoms"),
      field<std::vector<double>>(j, "weights"), is_signed);
}

json measure_to_object(const DiscreteAngularMeasure& m) {
  json atoms = json::array();
  for (std::size_t k = 0; k < m.size(); ++k) {
    auto a = m.atom(k);
    atoms.push_back(std::vector<double>(a.begin(), a.end()));
  }
  const auto w = m.weights();
  return json{{"version", 1},
              {"beta", m.beta()},
              {"signed", m.is_signed()},
              {"atoms", std::move(atoms)},
              {"weights", std::vector<double>(w.begin(), w.end())}};
}

json model_to_object(const ModelSpec& spec) {
  json j{{"kind", std::string(to_string(spec.kind()))}, {"d", spec.d}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MultivariateT>) {
          j["nu"] = p.nu;
          j["sigma"] = sigma_to_json(p.sigma);
          if (!p.location.empty()) j["mu"] = p.location;
        } else if constexpr (std::is_same_v<T, GaussianCopula>) {
          j["sigma"] = sigma_to_json(p.sigma);
        } else if constexpr (std::is_same_v<T, BreimanDiscrete>) {
          j["measure"] = measure_to_object(p.measure);
        } else if constexpr (std::is_same_v<T, LinearFactor>) {
          j["beta"] = p.beta;
          j["A"] = matrix_to_json(p.a);
        } else if constexpr (std::is_same_v<T, MaxLinearFrechet>) {
          j["A"] = matrix_to_json(p.a);
          if (p.factor_measure) j["factor_measure"] = measure_to_object(*p.factor_measure);
        } else if constexpr (std::is_same_v<T, S1SDiscrete>) {
          std::vector<std::vector<double>> atoms;
          for (std::size_t k = 0; k < p.scales.size(); ++k) {
            atoms.emplace_back(p.atoms.begin() + static_cast<std::ptrdiff_t>(k * p.d),
                               p.atoms.begin() + static_cast<std::ptrdiff_t>((k + 1) * p.d));
          }
          j["atoms"] = atoms;
          j["scales"] = p.scales;
          j["standardized"] = p.standardized;
        }
      },
      spec.parameters);
  return j;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

SigmaSpec sigma_from_preset(const std::string& value) {
  const auto colon = value.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("sigma preset must look like ar:<rho> or exch:<rho>");
  }
  json j{{"kind", value.substr(0, colon)}, {"rho", parse_real(value.substr(colon + 1))}};
  return sigma_from_json(j);
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

DiscreteAngularMeasure measure_from_json(std::string_view text) {
  return measure_from_object(parse_document(text, "angular measure"));
}

std::string measure_to_json(const DiscreteAngularMeasure& m) {
  return measure_to_object(m).dump(2) + "\n";
}

ModelSpec model_from_json(std::string_view text) {
  const json j = parse_document(text, "model");
  if (!j.is_object()) throw ConfigError("model must be a JSON object");
  const auto kind = field<std::string>(j, "kind");
  ModelSpec spec;
  spec.d = field<std::size_t>(j, "d");
  if (kind == "multivariate_t") {
    MultivariateT p;
    p.nu = field<double>(j, "nu");
    p.sigma = j.contains("sigma") ? sigma_from_json(j.at("sigma")) : SigmaSpec{};
    if (j.contains("mu")) p.location = field<std::vector<double>>(j, "mu");
    spec.parameters = std::move(p);
  } else if (kind == "gaussian_copula") {
    GaussianCopula p;
    p.sigma = j.contains("sigma") ? sigma_from_json(j.at("sigma")) : SigmaSpec{};
    spec.parameters = std::move(p);
  } else if (kind == "breiman_discrete") {
    auto m = measure_from_object(j.at("measure"));
    if (j.contains("beta")) m = m.with_beta(field<double>(j, "beta"));
    spec.parameters = BreimanDiscrete{std::move(m)};
  } else if (kind == "linear_factor") {
    LinearFactor p;
    p.beta = j.contains("beta") ? field<double>(j, "beta") : 1.0;
    p.a = matrix_from_json(j.at("A"), "A");
    spec.parameters = std::move(p);
  } else if (kind == "max_linear_frechet") {
    auto a = matrix_from_json(j.at("A"), "A");
    spec.parameters = j.contains("factor_measure")
                          ? MaxLinearFrechet{std::move(a), measure_from_object(j.at("factor_measure"))}
                          : MaxLinearFrechet{std::move(a), std::nullopt};
  } else if (kind == "s1s_discrete") {
    S1SDiscrete p;
    p.d = spec.d;
    for (const auto& row : field<std::vector<std::vector<double>>>(j, "atoms")) {
      if (row.size() != spec.d) throw ConfigError("S1S atoms must have length d");
      p.atoms.insert(p.atoms.end(), row.begin(), row.end());
    }
    p.scales = field<std::vector<double>>(j, "scales");
    p.standardized = j.contains("standardized") ? field<bool>(j, "standardized") : true;
    spec.parameters = std::move(p);
  } else {
    throw ConfigError("unknown model kind '" + kind + "'");
  }
  return spec;
}

std::string model_to_json(const ModelSpec& spec) { return model_to_object(spec).dump(); }

std::string model_fingerprint(const ModelSpec& spec) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : model_to_json(spec)) {
    h ^= c;
    h *= 16777619u;
  }
  char hex[9];
  std::snprintf(hex, sizeof hex, "%08x", h);
  return std::string(to_string(spec.kind())) + "-" + hex;
}

ModelSpec parse_model_preset(std::string_view preset) {
  const auto parts = split(preset, ',');
  const std::string& name = parts.front();
  std::optional<double> nu;
  std::optional<std::size_t> d;
  std::optional<SigmaSpec> sigma;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value in preset: " + parts[i]);
    const std::string key = parts[i].substr(0, eq);
    const std::string value = parts[i].substr(eq + 1);
    if (key == "nu") {
      nu = parse_real(value);
    } else if (key == "d") {
      const double v = parse_real(value);
      if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("preset d must be a positive integer");
      d = static_cast<std::size_t>(v);
    } else if (key == "sigma") {
      sigma = sigma_from_preset(value);
    } else {
      throw ConfigError("unknown preset key '" + key + "'");
    }
  }
  if (!d) throw ConfigError("preset needs d=<dimension>");
  ModelSpec spec;
  spec.d = *d;
  if (name == "t") {
    if (!nu) throw ConfigError("t preset needs nu=<degrees of freedom>");
    spec.parameters = MultivariateT{*nu, sigma.value_or(SigmaSpec{}), {}};
  } else if (name == "gauss") {
    spec.parameters = GaussianCopula{sigma.value_or(SigmaSpec{})};
  } else if (name == "iid") {
    spec.parameters = GaussianCopula{SigmaSpec{}};
  } else if (name == "frechet") {
    spec.parameters = MaxLinearFrechet{
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(*d), static_cast<Eigen::Index>(*d)),
        std::nullopt};
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected t, gauss, iid or frechet)");
  }
  return spec;
}

ModelSpec load_model(const std::string& preset_or_path) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(preset_or_path, ec)) {
    return model_from_json(read_text_file(preset_or_path));
  }
  if (preset_or_path.find(',') != std::string::npos ||
      preset_or_path.find('/') == std::string::npos) {
    return parse_model_preset(preset_or_path);
  }
  throw ConfigError("model file '" + preset_or_path + "' does not exist");
}

std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) out.push_back(parse_real(token));
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return out;
}

std::vector<std::vector<std::size_t>> parse_blocks(std::string_view text) {
  std::vector<std::vector<std::size_t>> blocks;
  std::string normalized(text);
  for (char& c : normalized) {
    if (c == '/') c = '\n';
  }
  std::istringstream lines(normalized);
  std::string line;
  while (std::getline(lines, line)) {
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto& block = blocks.emplace_back();
    for (double v : parse_real_list(line)) {
      if (!(v >= 1.0) || v != std::floor(v)) {
        throw ConfigError("block indices must be positive integers (1-based)");
      }
      block.push_back(static_cast<std::size_t>(v) - 1);
    }
  }
  if (blocks.empty()) throw ConfigError("no blocks given");
  return blocks;
}

}  // namespace tailcomb
