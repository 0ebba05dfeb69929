#include "tailcomb/error.hpp"
#include "tailcomb/experiments.hpp"
#include "tailcomb/io.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <tuple>

namespace tailcomb {
namespace {

constexpr std::string_view kCalibrationHeader =
    "test,model,nu,d,sigma_kind,rho,alpha,n_sims,rejections,alpha_hat_ratio,se_ratio,seed";
constexpr std::string_view kPowerHeader =
    "test,effect_size,mu_direction,nu,d,alpha,n_sims,rejections,power,"
    "power_ratio_vs_baseline,seed";
constexpr std::string_view kTailScaleHeader =
    "model,combiner,threshold,n_sims,exceedances,estimate,standard_error,limit,seed";

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string real(const std::optional<double>& v) { return v ? real(*v) : "NA"; }

std::string quoted(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> rows_of(std::string_view text, std::string_view header) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw ConfigError("CSV header does not match the expected schema");
  }
  const auto columns = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',') + 1);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto& row = rows.emplace_back();
    std::stringstream fields(line);
    std::string f;
    while (std::getline(fields, f, ',')) row.push_back(f);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    if (row.size() != columns) throw ConfigError("CSV row has the wrong number of fields");
  }
  return rows;
}

double to_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad CSV number '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("bad CSV number '" + s + "'");
  return v;
}

std::optional<double> to_optional(const std::string& s) {
  if (s == "NA") return std::nullopt;
  return to_real(s);
}

std::uint64_t to_count(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad CSV integer '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("bad CSV integer '" + s + "'");
  return v;
}

}  // namespace

std::string calibration_csv(std::vector<CalibrationRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    // NA sorts before any numeric nu.
    return std::tie(a.test, a.nu, a.alpha) < std::tie(b.test, b.nu, b.alpha);
  });
  std::string out(kCalibrationHeader);
  out += '\n';
  for (const auto& r : records) {
    out += r.test + ',' + r.model + ',' + real(r.nu) + ',' + std::to_string(r.d) + ',' +
           r.sigma_kind + ',' + real(r.rho) + ',' + real(r.alpha) + ',' +
           std::to_string(r.n_sims) + ',' + std::to_string(r.rejections) + ',' +
           real(r.alpha_hat_ratio) + ',' + real(r.se_ratio) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::vector<CalibrationRecord> parse_calibration_csv(std::string_view text) {
  std::vector<CalibrationRecord> out;
  for (const auto& f : rows_of(text, kCalibrationHeader)) {
    CalibrationRecord r;
    r.test = f[0];
    r.model = f[1];
    r.nu = to_optional(f[2]);
    r.d = static_cast<std::size_t>(to_count(f[3]));
    r.sigma_kind = f[4];
    r.rho = to_optional(f[5]);
    r.alpha = to_real(f[6]);
    r.n_sims = to_count(f[7]);
    r.rejections = to_count(f[8]);
    r.alpha_hat_ratio = to_real(f[9]);
    r.se_ratio = to_real(f[10]);
    r.seed = to_count(f[11]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string power_csv(std::vector<PowerRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.test, a.effect_size) < std::tie(b.test, b.effect_size);
  });
  std::string out(kPowerHeader);
  out += '\n';
  for (const auto& r : records) {
    out += r.test + ',' + real(r.effect_size) + ',' + r.mu_direction + ',' + real(r.nu) + ',' +
           std::to_string(r.d) + ',' + real(r.alpha) + ',' + std::to_string(r.n_sims) + ',' +
           std::to_string(r.rejections) + ',' + real(r.power) + ',' +
           real(r.power_ratio_vs_baseline) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::vector<PowerRecord> parse_power_csv(std::string_view text) {
  std::vector<PowerRecord> out;
  for (const auto& f : rows_of(text, kPowerHeader)) {
    PowerRecord r;
    r.test = f[0];
    r.effect_size = to_real(f[1]);
    r.mu_direction = f[2];
    r.nu = to_real(f[3]);
    r.d = static_cast<std::size_t>(to_count(f[4]));
    r.alpha = to_real(f[5]);
    r.n_sims = to_count(f[6]);
    r.rejections = to_count(f[7]);
    r.power = to_real(f[8]);
    r.power_ratio_vs_baseline = to_optional(f[9]);
    r.seed = to_count(f[10]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string tail_scale_csv(std::string_view model, std::string_view combiner,
                           const std::vector<TailScaleEstimate>& estimates,
                           std::optional<double> limit, std::uint64_t seed) {
  std::string out(kTailScaleHeader);
  out += '\n';
  for (const auto& e : estimates) {
    out += quoted(model) + ',' + quoted(combiner) + ',' + real(e.threshold) + ',' +
           std::to_string(e.n_sims) + ',' + std::to_string(e.exceedances) + ',' +
           real(e.estimate) + ',' + real(e.standard_error) + ',' + real(limit) + ',' +
           std::to_string(seed) + '\n';
  }
  return out;
}

void emit_csv(const std::vector<CalibrationRecord>& records, const std::string& path) {
  write_text_file(path, calibration_csv(records));
}

void emit_csv(const std::vector<PowerRecord>& records, const std::string& path) {
  write_text_file(path, power_csv(records));
}

}  // namespace tailcomb
