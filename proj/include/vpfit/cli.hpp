#pragma once

// File-level front end shared by the vpfit tool and its tests: CSV ingestion,
// the flat key=value configuration format, and the fit / synth / spectra
// commands that write plot-ready CSV and key=value reports.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "vpfit/analysis.hpp"
#include "vpfit/basis.hpp"
#include "vpfit/error.hpp"
#include "vpfit/optimizer.hpp"
#include "vpfit/varpro.hpp"

namespace vpfit::cli {

namespace exit_code {
inline constexpr int success = 0;
inline constexpr int input_error = 1;
inline constexpr int not_converged = 2;
}  // namespace exit_code

/// Shortest decimal form that round-trips through strtod: 17 significant digits.
inline std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

inline std::string format_list(const std::vector<double>& values, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += format_number(values[i]);
  }
  return out;
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(delimiter, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_number(std::string_view text) {
  const std::string cell = trim(text);
  if (cell.empty()) return std::nullopt;
  const char* begin = cell.data();
  if (*begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

inline double require_number(std::string_view text, const std::string& what) {
  const auto v = parse_number(text);
  if (!v || !std::isfinite(*v)) throw Error(ErrorKind::Parse, what + ": expected a finite number, got '" + std::string(text) + "'");
  return *v;
}

inline std::vector<double> parse_number_list(std::string_view text, const std::string& what) {
  std::vector<double> out;
  for (const auto& cell : split(text, ',')) out.push_back(require_number(cell, what));
  return out;
}

inline int require_int(std::string_view text, const std::string& what) {
  const std::string cell = trim(text);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
    throw Error(ErrorKind::Parse, what + ": expected an integer, got '" + cell + "'");
  return value;
}

// ---------------------------------------------------------------------------
// Dataset ingestion

struct DatasetMeta {
  std::string source;
  double rescale = 1.0;
  std::size_t rows = 0;
};

struct Dataset {
  Vector x;
  Vector y;
  DatasetMeta meta;
};

/// Column chosen by 0-based index or by header name.
struct ColumnRef {
  std::variant<std::size_t, std::string> ref;

  static ColumnRef parse(const std::string& text) {
    const std::string t = trim(text);
    if (!t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); }))
      return {static_cast<std::size_t>(std::stoul(t))};
    return {t};
  }

  std::string describe() const {
    if (const auto* i = std::get_if<std::size_t>(&ref)) return "column " + std::to_string(*i);
    return "column '" + std::get<std::string>(ref) + "'";
  }
};

struct CsvOptions {
  ColumnRef x_column{std::size_t{0}};
  ColumnRef y_column{std::size_t{1}};
  char delimiter = ',';
  std::optional<double> rescale;
};

inline void validate(const Dataset& data) {
  if (data.x.size() != data.y.size()) throw Error(ErrorKind::DimensionMismatch, "x and y lengths differ");
  if (data.x.size() < 2) throw Error(ErrorKind::InsufficientData, "dataset needs at least two rows");
  if (!data.x.allFinite() || !data.y.allFinite()) throw Error(ErrorKind::InvalidArgument, "dataset has non-finite values");
  for (Eigen::Index i = 1; i < data.x.size(); ++i)
    if (!(data.x(i) > data.x(i - 1)))
      throw Error(ErrorKind::InvalidArgument, "x is not strictly increasing at row " + std::to_string(i));
}

/// Reads two numeric columns. A first non-comment line that does not parse as
/// numbers in the selected columns is taken as the header. Blank lines and
/// lines starting with '#' are skipped.
inline Dataset ingest_csv(const std::filesystem::path& path, const CsvOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");

  std::optional<std::size_t> x_index, y_index;
  if (const auto* i = std::get_if<std::size_t>(&options.x_column.ref)) x_index = *i;
  if (const auto* i = std::get_if<std::size_t>(&options.y_column.ref)) y_index = *i;

  std::vector<double> xs, ys;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto cells = split(content, options.delimiter);

    if (first_content) {
      first_content = false;
      const bool by_name = !x_index || !y_index;
      bool numeric = !by_name;
      if (numeric) {
        numeric = *x_index < cells.size() && *y_index < cells.size() && parse_number(cells[*x_index]) &&
                  parse_number(cells[*y_index]);
      }
      if (!numeric) {
        auto lookup = [&](const ColumnRef& col, std::optional<std::size_t>& index) {
          if (index) return;
          const auto& name = std::get<std::string>(col.ref);
          const auto it = std::find(cells.begin(), cells.end(), name);
          if (it == cells.end())
            throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": header has no column '" + name + "'");
          index = static_cast<std::size_t>(it - cells.begin());
        };
        lookup(options.x_column, x_index);
        lookup(options.y_column, y_index);
        continue;
      }
    }

    auto cell_value = [&](std::size_t index, const ColumnRef& col) {
      if (index >= cells.size())
        throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": missing " + col.describe());
      const auto v = parse_number(cells[index]);
      if (!v)
        throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": non-numeric value '" +
                                          cells[index] + "' in " + col.describe());
      if (!std::isfinite(*v))
        throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": non-finite value in " + col.describe());
      return *v;
    };
    xs.push_back(cell_value(*x_index, options.x_column));
    ys.push_back(cell_value(*y_index, options.y_column));
  }

  Dataset data;
  data.meta.source = path.string();
  data.meta.rows = xs.size();
  data.x = Eigen::Map<Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  data.y = Eigen::Map<Vector>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  if (options.rescale) {
    if (!(*options.rescale > 0.0) || !std::isfinite(*options.rescale))
      throw Error(ErrorKind::InvalidArgument, "rescale factor must be positive and finite");
    data.meta.rescale = *options.rescale;
    data.x *= *options.rescale;
  }
  try {
    validate(data);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
  return data;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

/// Header line plus one row per sample; every column must have the same length.
inline std::string csv_table(const std::vector<std::string>& header, const std::vector<const Vector*>& columns) {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
  out += '\n';
  const Eigen::Index rows = columns.empty() ? 0 : columns.front()->size();
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) out += (j ? "," : "") + format_number((*columns[j])(i));
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// key=value configuration

/// Ordered key=value pairs. Later assignments override earlier ones.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text, const std::string& source) {
    KeyValues kv;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string content = trim(line);
      if (content.empty() || content.front() == '#') continue;
      kv.assign(content, source + ":" + std::to_string(line_no));
    }
    return kv;
  }

  static KeyValues load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
  }

  /// "key=value"; `where` names the origin for error messages.
  void assign(std::string_view assignment, const std::string& where) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::Parse, where + ": expected key=value, got '" + std::string(assignment) + "'");
    const std::string key = trim(assignment.substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::Parse, where + ": empty key");
    set(key, trim(assignment.substr(eq + 1)));
  }

  void set(const std::string& key, std::string value) {
    const auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
    if (it != entries_.end()) it->second = std::move(value);
    else entries_.emplace_back(key, std::move(value));
  }

  const std::string* find(std::string_view key) const {
    for (const auto& [k, v] : entries_)
      if (k == key) return &v;
    return nullptr;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Breakpoints as an explicit list or as a count of uniform breakpoints over
/// the data span.
struct BreakpointSetting {
  std::vector<double> explicit_points;
  int uniform_count = 0;
};

inline BreakpointSetting parse_breakpoints(const std::string& text) {
  std::string t = trim(text);
  BreakpointSetting out;
  if (t.rfind("uniform", 0) == 0) {
    std::string rest = trim(std::string_view(t).substr(7));
    if (!rest.empty() && rest.front() == ':') rest = trim(std::string_view(rest).substr(1));
    out.uniform_count = require_int(rest, "breakpoints uniform count");
    if (out.uniform_count < 2) throw Error(ErrorKind::Parse, "breakpoints uniform count must be >= 2");
    return out;
  }
  out.explicit_points = parse_number_list(t, "breakpoints");
  return out;
}

struct RunConfig {
  int degree = 2;
  BreakpointSetting breakpoints{{}, 5};
  int harmonics = 1;
  std::optional<double> omega_init;
  std::optional<std::pair<double, double>> omega_bounds;
  double tolerance = 1e-8;
  int max_iterations = 200;
  std::optional<double> rescale;
  std::uint64_t seed = 1;
};

inline RunConfig parse_run_config(const KeyValues& kv) {
  static const char* known[] = {"degree",    "breakpoints",    "harmonics", "omega-init", "omega-bounds",
                                "tolerance", "max-iterations", "rescale",   "seed"};
  for (const auto& [key, value] : kv.entries())
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw Error(ErrorKind::Parse, "unknown config key '" + key + "'");

  RunConfig cfg;
  auto is_auto = [](const std::string& v) { return v.empty() || v == "auto"; };
  if (const auto* v = kv.find("degree")) cfg.degree = require_int(*v, "degree");
  if (const auto* v = kv.find("breakpoints")) cfg.breakpoints = parse_breakpoints(*v);
  if (const auto* v = kv.find("harmonics")) cfg.harmonics = require_int(*v, "harmonics");
  if (const auto* v = kv.find("omega-init"); v && !is_auto(*v)) cfg.omega_init = require_number(*v, "omega-init");
  if (const auto* v = kv.find("omega-bounds"); v && !is_auto(*v)) {
    const auto b = parse_number_list(*v, "omega-bounds");
    if (b.size() != 2) throw Error(ErrorKind::Parse, "omega-bounds needs exactly two values");
    cfg.omega_bounds = std::pair{b[0], b[1]};
  }
  if (const auto* v = kv.find("tolerance")) cfg.tolerance = require_number(*v, "tolerance");
  if (const auto* v = kv.find("max-iterations")) cfg.max_iterations = require_int(*v, "max-iterations");
  if (const auto* v = kv.find("rescale"); v && !is_auto(*v)) cfg.rescale = require_number(*v, "rescale");
  if (const auto* v = kv.find("seed")) cfg.seed = static_cast<std::uint64_t>(require_int(*v, "seed"));
  return cfg;
}

/// Concrete spline space for `data`; enforces that breakpoints cover the data
/// and stay within one sample spacing of its ends.
inline SplineSpec resolve_spline(const RunConfig& cfg, const Dataset& data) {
  const double x_min = data.x(0), x_max = data.x(data.x.size() - 1);
  SplineSpec spec;
  spec.degree = cfg.degree;
  spec.breakpoints = cfg.breakpoints.uniform_count > 0 ? uniform_breakpoints(x_min, x_max, cfg.breakpoints.uniform_count)
                                                       : cfg.breakpoints.explicit_points;
  validate(spec);
  const double dx = (x_max - x_min) / static_cast<double>(data.x.size() - 1);
  for (double k : spec.breakpoints)
    if (k < x_min - dx || k > x_max + dx)
      throw Error(ErrorKind::InvalidSpec, "breakpoint " + format_number(k) + " lies outside the data span [" +
                                              format_number(x_min) + ", " + format_number(x_max) + "]");
  if (spec.lower() > x_min || spec.upper() < x_max)
    throw Error(ErrorKind::InvalidSpec, "breakpoints [" + format_number(spec.lower()) + ", " + format_number(spec.upper()) +
                                            "] do not cover the data span [" + format_number(x_min) + ", " +
                                            format_number(x_max) + "]");
  return spec;
}

inline FitConfig to_fit_config(const RunConfig& cfg, SplineSpec sspec) {
  FitConfig fc;
  fc.sspec = std::move(sspec);
  fc.harmonics = cfg.harmonics;
  fc.omega_bounds = cfg.omega_bounds;
  fc.omega_init_override = cfg.omega_init;
  fc.tolerance = cfg.tolerance;
  fc.max_iterations = cfg.max_iterations;
  return fc;
}

// ---------------------------------------------------------------------------
// fit

struct ResidualSummary {
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation (n - 1)
  double rms = 0.0;
  double max_abs = 0.0;
};

inline ResidualSummary summarize(const Vector& r) {
  ResidualSummary s;
  const double n = static_cast<double>(r.size());
  s.mean = r.mean();
  s.std_dev = r.size() > 1 ? std::sqrt((r.array() - s.mean).square().sum() / (n - 1.0)) : 0.0;
  s.rms = std::sqrt(r.squaredNorm() / n);
  s.max_abs = r.cwiseAbs().maxCoeff();
  return s;
}

struct RunReport {
  std::vector<std::pair<std::string, std::string>> config_echo;
  FitResult fit;
  double period = 0.0;
  Vector standard_errors;
  std::vector<HarmonicComponent> harmonics;
  ResidualSummary residual;
  bool periodic_significant = false;

  std::string to_text() const {
    std::ostringstream out;
    auto kv = [&](const std::string& key, const std::string& value) { out << key << '=' << value << '\n'; };
    for (const auto& [k, v] : config_echo) kv(k, v);
    kv("omega_init", format_number(fit.omega_init));
    kv("omega_hat", format_number(fit.omega_hat));
    kv("period", format_number(period));
    kv("converged", fit.converged ? "true" : "false");
    kv("iterations", std::to_string(fit.iterations));
    kv("cost", format_number(fit.cost));
    kv("sigma2", format_number(fit.covariance.sigma2));
    kv("n_df", std::to_string(fit.covariance.n_df));
    const Eigen::Index n_alpha = fit.alpha.size();
    for (Eigen::Index i = 0; i < fit.gamma.size(); ++i) {
      const std::string name = i < n_alpha ? "alpha" + std::to_string(i + 1) : "beta" + std::to_string(i - n_alpha + 1);
      kv(name, format_number(fit.gamma(i)));
      kv(name + "_se", format_number(standard_errors(i)));
    }
    double max_amp = 0.0, max_amp_se = 0.0;
    for (const auto& h : harmonics) {
      const std::string prefix = "harmonic" + std::to_string(h.harmonic);
      kv(prefix + "_amplitude", format_number(h.amplitude));
      kv(prefix + "_amplitude_se", format_number(h.amplitude_se));
      kv(prefix + "_phase", format_number(h.phase));
      if (h.amplitude > max_amp) {
        max_amp = h.amplitude;
        max_amp_se = h.amplitude_se;
      }
    }
    kv("max_harmonic_amplitude", format_number(max_amp));
    kv("max_harmonic_amplitude_se", format_number(max_amp_se));
    kv("periodic_significant", periodic_significant ? "true" : "false");
    if (!periodic_significant)
      kv("note", "no harmonic amplitude reaches 3 standard errors; the periodic component is not distinguishable from noise");
    kv("residual_mean", format_number(residual.mean));
    kv("residual_std", format_number(residual.std_dev));
    kv("residual_rms", format_number(residual.rms));
    kv("residual_max_abs", format_number(residual.max_abs));
    return out.str();
  }
};

struct FitOutputs {
  std::filesystem::path components;
  std::filesystem::path covariance;
  std::filesystem::path report;

  static FitOutputs from_prefix(const std::string& prefix) {
    return {prefix + "_components.csv", prefix + "_covariance.csv", prefix + "_report.txt"};
  }
};

/// Covariance matrix with alpha1..alpha2nu, beta1..betan row/column headers.
inline std::string covariance_csv(const FitResult& fit) {
  const Eigen::Index n_alpha = fit.alpha.size();
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < fit.gamma.size(); ++i)
    names.push_back(i < n_alpha ? "alpha" + std::to_string(i + 1) : "beta" + std::to_string(i - n_alpha + 1));
  std::string out = "cov";
  for (const auto& n : names) out += "," + n;
  out += '\n';
  const Matrix& c = fit.covariance.covariance;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    out += names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < c.cols(); ++j) out += "," + format_number(c(i, j));
    out += '\n';
  }
  return out;
}

struct FitRun {
  RunReport report;
  int exit_code = exit_code::success;
};

/// Fits `data` and writes components, covariance and report files.
/// Non-convergence still writes every file and returns exit code 2.
inline FitRun run_fit(const Dataset& data, const RunConfig& cfg, const FitOutputs& outputs) {
  const SplineSpec sspec = [&] {
    try {
      return resolve_spline(cfg, data);
    } catch (const Error& e) {
      throw e.with_stage("config");
    }
  }();
  const FitConfig fc = to_fit_config(cfg, sspec);

  FitRun run;
  auto& rep = run.report;
  rep.config_echo = {
      {"source", data.meta.source},
      {"n_samples", std::to_string(data.x.size())},
      {"rescale", format_number(data.meta.rescale)},
      {"config.degree", std::to_string(cfg.degree)},
      {"config.breakpoints", format_list(sspec.breakpoints)},
      {"config.harmonics", std::to_string(cfg.harmonics)},
      {"config.omega_init", cfg.omega_init ? format_number(*cfg.omega_init) : "auto"},
      {"config.omega_bounds",
       cfg.omega_bounds ? format_number(cfg.omega_bounds->first) + "," + format_number(cfg.omega_bounds->second) : "auto"},
      {"config.tolerance", format_number(cfg.tolerance)},
      {"config.max_iterations", std::to_string(cfg.max_iterations)},
  };
  rep.fit = fit(data.x, data.y, fc);
  rep.period = 2.0 * std::numbers::pi / rep.fit.omega_hat;
  rep.standard_errors = rep.fit.covariance.standard_errors();
  const Eigen::Index n_alpha = rep.fit.alpha.size();
  rep.harmonics = harmonic_components(rep.fit.alpha, rep.fit.covariance.covariance.topLeftCorner(n_alpha, n_alpha));
  rep.residual = summarize(rep.fit.residual);
  rep.periodic_significant = std::any_of(rep.harmonics.begin(), rep.harmonics.end(),
                                         [](const HarmonicComponent& h) { return h.amplitude >= 3.0 * h.amplitude_se; });

  const auto& f = rep.fit;
  write_text(outputs.components, csv_table({"x", "y", "y_model", "y_periodic", "y_spline", "residual"},
                                           {&data.x, &data.y, &f.y_model, &f.y_periodic, &f.y_spline, &f.residual}));
  write_text(outputs.covariance, covariance_csv(f));
  write_text(outputs.report, rep.to_text());
  run.exit_code = f.converged ? exit_code::success : exit_code::not_converged;
  return run;
}

// ---------------------------------------------------------------------------
// synth

/// Reads a synthetic signal description. Keys: n-samples, degree, breakpoints
/// (explicit list), beta, omega, amplitudes ("s1,c1; s2,c2; ..."), sigma, seed.
inline SyntheticSpec parse_synthetic_spec(const KeyValues& kv) {
  SyntheticSpec spec;
  auto need = [&](const char* key) -> const std::string& {
    const auto* v = kv.find(key);
    if (!v) throw Error(ErrorKind::Parse, std::string("synthetic spec is missing '") + key + "'");
    return *v;
  };
  if (const auto* v = kv.find("n-samples")) spec.n_samples = require_int(*v, "n-samples");
  spec.sspec.degree = require_int(need("degree"), "degree");
  spec.sspec.breakpoints = parse_number_list(need("breakpoints"), "breakpoints");
  spec.beta_true = parse_number_list(need("beta"), "beta");
  spec.omega_true = require_number(need("omega"), "omega");
  for (const auto& pair : split(need("amplitudes"), ';')) {
    if (pair.empty()) continue;
    const auto v = parse_number_list(pair, "amplitudes");
    if (v.size() != 2) throw Error(ErrorKind::Parse, "each amplitude entry needs a sin and a cos coefficient");
    spec.harmonic_amplitudes.emplace_back(v[0], v[1]);
  }
  if (const auto* v = kv.find("sigma")) spec.noise_sigma = require_number(*v, "sigma");
  if (const auto* v = kv.find("seed")) spec.seed = static_cast<std::uint64_t>(require_int(*v, "seed"));
  return spec;
}

inline SyntheticSpec preset(const std::string& name) {
  if (name == "paper-6a") return reference_preset();
  throw Error(ErrorKind::InvalidArgument, "unknown preset '" + name + "' (available: paper-6a)");
}

struct SynthOutputs {
  std::filesystem::path data;
  std::filesystem::path truth_csv;
  std::filesystem::path truth_params;

  static SynthOutputs for_path(const std::filesystem::path& data) {
    return {data, data.string() + ".truth.csv", data.string() + ".truth.txt"};
  }
};

inline std::string synthetic_params_text(const SyntheticSpec& spec) {
  std::ostringstream out;
  out << "n_samples=" << spec.n_samples << '\n';
  out << "degree=" << spec.sspec.degree << '\n';
  out << "breakpoints=" << format_list(spec.sspec.breakpoints) << '\n';
  out << "beta_true=" << format_list(spec.beta_true) << '\n';
  out << "omega_true=" << format_number(spec.omega_true) << '\n';
  out << "harmonics=" << spec.harmonic_amplitudes.size() << '\n';
  for (std::size_t k = 0; k < spec.harmonic_amplitudes.size(); ++k) {
    out << "alpha_true" << 2 * k + 1 << '=' << format_number(spec.harmonic_amplitudes[k].first) << '\n';
    out << "alpha_true" << 2 * k + 2 << '=' << format_number(spec.harmonic_amplitudes[k].second) << '\n';
  }
  out << "noise_sigma=" << format_number(spec.noise_sigma) << '\n';
  out << "seed=" << spec.seed << '\n';
  out << "noise_generator=mt19937_64+box-muller\n";
  out << "x_grid=i/n_samples\n";
  return out.str();
}

inline SyntheticDataset run_synth(const SyntheticSpec& spec, const SynthOutputs& outputs) {
  const auto data = generate_synthetic(spec);
  write_text(outputs.data, csv_table({"x", "y"}, {&data.x, &data.y}));
  write_text(outputs.truth_csv, csv_table({"x", "y_spline_true", "y_periodic_true", "noise"},
                                          {&data.x, &data.trend, &data.periodic, &data.noise}));
  write_text(outputs.truth_params, synthetic_params_text(spec));
  return data;
}

// ---------------------------------------------------------------------------
// spectra

inline std::string spectrum_csv(const SpectrumReport& report) {
  std::vector<std::string> header{"frequency"};
  for (const auto& l : report.labels) header.push_back(l.name());
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
  out += '\n';
  for (Eigen::Index k = 0; k < report.frequencies.size(); ++k) {
    out += format_number(report.frequencies(k));
    for (Eigen::Index j = 0; j < report.magnitudes.cols(); ++j) out += "," + format_number(report.magnitudes(k, j));
    out += '\n';
  }
  return out;
}

/// Unnormalized one-sided spectrum of a uniformly sampled signal, optionally
/// after removing its spline least-squares fit.
inline Spectrum signal_spectrum(const Dataset& data, const std::optional<SplineSpec>& prefit) {
  const double dx = detail::uniform_spacing(data.x);
  Vector v = data.y;
  if (prefit) v = data.y - project(bspline_basis(data.x, *prefit), data.y);
  Spectrum s;
  s.magnitudes = one_sided_magnitudes(v);
  s.frequencies.resize(s.magnitudes.size());
  const double window = dx * static_cast<double>(data.x.size());
  for (Eigen::Index k = 0; k < s.frequencies.size(); ++k) s.frequencies(k) = static_cast<double>(k) / window;
  return s;
}

inline std::string signal_spectrum_csv(const Spectrum& s, const std::string& column) {
  return csv_table({"frequency", column}, {&s.frequencies, &s.magnitudes});
}

inline std::string interaction_csv(const InteractionReport& report) {
  std::string out = "family,column,probe_magnitude,high_frequency_energy,compared\n";
  for (const auto& row : report.rows)
    out += row.family + "," + row.label.name() + "," + format_number(row.probe_magnitude) + "," +
           format_number(row.high_frequency_energy) + "," + (row.compared ? "true" : "false") + "\n";
  return out;
}

/// Parses a key=value report back into a map.
inline std::map<std::string, std::string> read_report(const std::filesystem::path& path) {
  std::map<std::string, std::string> out;
  const auto kv = KeyValues::load(path);
  for (const auto& [k, v] : kv.entries()) out[k] = v;
  return out;
}

}  // namespace vpfit::cli
