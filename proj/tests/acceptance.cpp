// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vpfit/cli.hpp"
#include "vpfit/vpfit.hpp"

namespace fs = std::filesystem;
using namespace vpfit;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

FitConfig preset_config(const SyntheticSpec& spec) {
  FitConfig c;
  c.sspec = spec.sspec;
  c.harmonics = static_cast<int>(spec.harmonic_amplitudes.size());
  return c;
}

// ---------------------------------------------------------------------------

Outcome c1_initial_frequency() {
  Outcome o;
  const double half_bin = two_pi / 2.0;  // unit window
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto spec = reference_preset(seed, 0.05);
    const auto data = generate_synthetic(spec);
    const auto init = initial_frequency(data.x, data.y, spec.sspec);
    worst = std::max(worst, std::abs(init.omega - 37.699));
  }
  const double elapsed = seconds_since(t0);
  o.check(worst <= half_bin, "max |omega_init - 37.699| over 20 seeds = " + fmt("%.3e", worst) + " (<= " + fmt("%.4f", half_bin) + ")");
  o.check(worst <= 5e-4, "omega_init matches 37.699 to the stated digits");
  o.check(elapsed < 1.0, "runtime " + fmt("%.3f", elapsed) + " s (< 1 s)");
  return o;
}

struct PresetFits {
  std::vector<FitResult> fits;
  double elapsed = 0.0;
};

const PresetFits& preset_fits() {
  static const PresetFits cache = [] {
    PresetFits p;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto spec = reference_preset(seed, 0.05);
      const auto data = generate_synthetic(spec);
      p.fits.push_back(fit(data.x, data.y, preset_config(spec)));
    }
    p.elapsed = seconds_since(t0);
    return p;
  }();
  return cache;
}

Outcome c2_frequency_recovery() {
  Outcome o;
  const auto& p = preset_fits();
  std::vector<double> errors;
  bool all_converged = true;
  for (const auto& f : p.fits) {
    errors.push_back(std::abs(f.omega_hat - 36.96));
    all_converged = all_converged && f.converged;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto clean_spec = reference_preset(1, 0.0);
  const auto clean = generate_synthetic(clean_spec);
  const auto clean_fit = fit(clean.x, clean.y, preset_config(clean_spec));
  const double elapsed = p.elapsed + seconds_since(t0);
  const double med = median(errors), mx = *std::max_element(errors.begin(), errors.end());
  o.check(all_converged, "all 20 fits converged");
  o.check(med <= 0.15, "median |omega_hat - 36.96| = " + fmt("%.4f", med) + " (<= 0.15)");
  o.check(mx <= 0.5, "max |omega_hat - 36.96| = " + fmt("%.4f", mx) + " (<= 0.5)");
  o.check(std::abs(clean_fit.omega_hat - 36.96) <= 1e-6,
          "noiseless |omega_hat - 36.96| = " + fmt("%.3e", std::abs(clean_fit.omega_hat - 36.96)) + " (<= 1e-6)");
  o.check(elapsed < 10.0, "runtime " + fmt("%.3f", elapsed) + " s (< 10 s)");
  return o;
}

Outcome c3_residual_fidelity() {
  Outcome o;
  double sd_lo = INFINITY, sd_hi = 0.0, s2_lo = INFINITY, s2_hi = 0.0;
  for (const auto& f : preset_fits().fits) {
    const double n = static_cast<double>(f.residual.size());
    const double mean = f.residual.mean();
    const double sd = std::sqrt((f.residual.array() - mean).square().sum() / (n - 1.0));
    sd_lo = std::min(sd_lo, sd);
    sd_hi = std::max(sd_hi, sd);
    s2_lo = std::min(s2_lo, f.covariance.sigma2);
    s2_hi = std::max(s2_hi, f.covariance.sigma2);
  }
  o.check(sd_lo >= 0.04 && sd_hi <= 0.06, "residual sd range [" + fmt("%.5f", sd_lo) + ", " + fmt("%.5f", sd_hi) + "] within [0.04, 0.06]");
  o.check(s2_lo >= 0.0015 && s2_hi <= 0.004,
          "sigma2 range [" + fmt("%.6f", s2_lo) + ", " + fmt("%.6f", s2_hi) + "] within [0.0015, 0.004]");
  return o;
}

Outcome c4_covariance() {
  Outcome o;
  // (a) properties on every preset fit, plus the orthonormal identity case
  double asym = 0.0, min_eig = INFINITY;
  for (const auto& f : preset_fits().fits) {
    const Matrix& C = f.covariance.covariance;
    asym = std::max(asym, (C - C.transpose()).cwiseAbs().maxCoeff() / C.cwiseAbs().maxCoeff());
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(C).eigenvalues();
    min_eig = std::min(min_eig, ev.minCoeff() / ev.maxCoeff());
  }
  o.check(asym <= 1e-12, "(a) max relative asymmetry " + fmt("%.2e", asym));
  o.check(min_eig >= -1e-12, "(a) min eigenvalue / max eigenvalue " + fmt("%.2e", min_eig) + " (>= -1e-12)");
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix R(30, 6);
  for (Eigen::Index i = 0; i < R.size(); ++i) R.data()[i] = nd(rng);
  const Matrix Q = R.householderQr().householderQ() * Matrix::Identity(30, 6);
  const double id_err = (covariance({Q, {}}, 0.7).covariance - 0.7 * Matrix::Identity(6, 6)).cwiseAbs().maxCoeff();
  o.check(id_err <= 1e-14, "(a) orthonormal basis: |cov - sigma2*I| = " + fmt("%.2e", id_err));

  // (b) Monte Carlo on n=40, one harmonic at fixed omega, linear spline on [0, 0.5, 1]
  const int n = 40, draws = 10000;
  const double sigma = 0.1, omega = two_pi * 3.3;
  const Vector x = unit_window_grid(n);
  const auto B = assemble_basis(x, {omega, 1}, {1, {0.0, 0.5, 1.0}});
  Vector gamma_true(B.cols());
  gamma_true << 0.8, -0.3, 1.0, 0.4, -0.6;
  const Vector clean = B.values * gamma_true;
  const Matrix closed = covariance(B, sigma * sigma).covariance;
  GaussianStream g(2024);
  Matrix estimates(draws, B.cols());
  for (int d = 0; d < draws; ++d) {
    Vector y = clean;
    for (int i = 0; i < n; ++i) y(i) += sigma * g.next();
    estimates.row(d) = solve_linear(B, y).gamma.transpose();
  }
  const Matrix centered = estimates.rowwise() - estimates.colwise().mean();
  const Matrix empirical = centered.transpose() * centered / (draws - 1.0);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < closed.rows(); ++j)
    worst = std::max(worst, std::abs(empirical(j, j) - closed(j, j)) / closed(j, j));
  o.check(worst <= 0.10, "(b) Monte Carlo diagonals, max relative deviation " + fmt("%.4f", worst) + " over 1e4 draws (<= 0.10)");

  // (c) spline block of the seed-1 preset fit vs reference diagonals (x1e-3)
  const double reference[6] = {0.132, 0.091, 0.063, 0.053, 0.100, 0.105};
  const auto& f = preset_fits().fits.front();
  const Eigen::Index a = f.alpha.size();
  bool within = true;
  std::string values;
  for (int j = 0; j < 6; ++j) {
    const double d = f.covariance.covariance(a + j, a + j) * 1e3;
    within = within && d >= 0.1 * reference[j] && d <= 10.0 * reference[j];
    values += (j ? " " : "") + fmt("%.4f", d);
  }
  o.check(within, "(c) spline-block diagonals x1e3 [" + values + "] within one decade of [0.132 0.091 0.063 0.053 0.100 0.105]");
  return o;
}

Outcome c5_vpf_correctness() {
  Outcome o;
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> omega_dist(5.0, 100.0);
  std::uniform_int_distribution<int> nu_dist(1, 3);
  double worst_cost = 0.0, worst_idem = 0.0, worst_orth = 0.0;
  for (int probe = 0; probe < 50; ++probe) {
    const auto spec = reference_preset(1000 + probe, 0.05);
    const auto data = generate_synthetic(spec);
    const double omega = omega_dist(rng);
    const int nu = nu_dist(rng);
    const auto B = assemble_basis(data.x, {omega, nu}, spec.sspec);
    const Matrix& M = B.values;
    const Vector g = (M.transpose() * M).llt().solve(M.transpose() * data.y);
    const double oracle = (data.y - M * g).squaredNorm();
    const double cost = vpf_cost(omega, data.x, data.y, nu, spec.sspec);
    worst_cost = std::max(worst_cost, std::abs(cost - oracle) / oracle);

    const Vector p = project(B, data.y);
    worst_idem = std::max(worst_idem, (project(B, p) - p).norm() / p.norm());
    const Vector r = data.y - p;
    const Vector grad = M.transpose() * r;
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      worst_orth = std::max(worst_orth, std::abs(grad(j)) / (data.y.norm() * M.col(j).norm()));
  }
  o.check(worst_cost <= 1e-10, "max relative |vpf_cost - normal-equations minimum| = " + fmt("%.2e", worst_cost) + " (<= 1e-10)");
  o.check(worst_idem <= 1e-10, "max projection idempotence error " + fmt("%.2e", worst_idem) + " (<= 1e-10)");
  o.check(worst_orth <= 1e-8, "max |B^T r|_j / (|y| |b_j|) = " + fmt("%.2e", worst_orth) + " (<= 1e-8)");
  return o;
}

Outcome c6_basis_laws() {
  Outcome o;
  std::mt19937_64 rng(66);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int degree = trial % 5;
    const int count = 2 + trial % 9;
    std::vector<double> k{-1.0 + u(rng)};
    for (int i = 1; i < count; ++i) k.push_back(k.back() + 0.05 + u(rng));
    const SplineSpec s{degree, k};
    Vector x(501);
    for (int i = 0; i <= 500; ++i) x(i) = s.lower() + (s.upper() - s.lower()) * i / 500.0;
    x(500) = s.upper();
    const Matrix B = bspline_basis(x, s).values;
    worst = std::max(worst, (B.rowwise().sum().array() - 1.0).abs().maxCoeff());
  }
  o.check(worst <= 1e-12, "partition of unity, max deviation " + fmt("%.2e", worst) + " over 200 random specs (<= 1e-12)");

  int mismatches = 0, cases = 0;
  const Vector x = Vector::LinSpaced(400, 0.0, 1.0);
  for (int degree = 0; degree <= 4; ++degree)
    for (int count = 2; count <= 10; ++count)
      for (int nu = 1; nu <= 5; ++nu) {
        ++cases;
        const SplineSpec s{degree, uniform_breakpoints(0.0, 1.0, count)};
        const auto B = assemble_basis(x, {7.0, nu}, s);
        const int spline_dim = count + degree - 1;
        const bool ok = s.dimension() == spline_dim && clamped_knot_vector(s).size() == static_cast<std::size_t>(spline_dim + degree + 1) &&
                        B.cols() == 2 * nu + spline_dim && B.select(BasisFamily::Harmonic).cols() == 2 * nu &&
                        B.select(BasisFamily::Spline).cols() == spline_dim;
        if (!ok) ++mismatches;
      }
  o.check(mismatches == 0, "dimension formulas: " + std::to_string(cases - mismatches) + "/" + std::to_string(cases) +
                               " (degree 0..4, breakpoints 2..10, harmonics 1..5)");
  return o;
}

double max_bspline_probe(int knots, double omega) {
  const auto r = interaction_report({2, uniform_breakpoints(0.0, 1.0, knots)}, 5, omega);
  double m = 0.0;
  for (const auto& row : r.rows)
    if (row.family == "bspline") m = std::max(m, row.probe_magnitude);
  return m;
}

Outcome c7_interaction() {
  Outcome o;
  const auto r = interaction_report(reference_preset().sspec, 5, 36.96);
  std::string spl, mono;
  double spl_max = 0.0, mono_min = INFINITY;
  for (const auto& row : r.rows) {
    if (!row.compared) continue;
    if (row.family == "bspline") {
      spl += (spl.empty() ? "" : " ") + fmt("%.3f", row.probe_magnitude);
      spl_max = std::max(spl_max, row.probe_magnitude);
    } else {
      mono += (mono.empty() ? "" : " ") + fmt("%.3f", row.probe_magnitude);
      mono_min = std::min(mono_min, row.probe_magnitude);
    }
  }
  o.check(spl_max < mono_min, "probe bin " + std::to_string(r.probe_bin) + ": bspline [" + spl + "] all below monomial x^1..x^5 [" +
                                  mono + "]");
  const double m5 = max_bspline_probe(5, 36.96), m9 = max_bspline_probe(9, 36.96), m17 = max_bspline_probe(17, 36.96);
  o.check(m9 <= m5 && m17 <= m9,
          "densification 5->9->17 knots, max bspline magnitude " + fmt("%.3f", m5) + " -> " + fmt("%.3f", m9) + " -> " + fmt("%.3f", m17) +
              " non-increasing");
  return o;
}

Outcome c8_four_parameter() {
  Outcome o;
  const int n = 8192;
  const double window = 8.0, omega = 20.7, amplitude = 1.5, phase = 0.6, offset = -0.4;
  Vector x(n), y(n);
  GaussianStream g(42);
  for (int i = 0; i < n; ++i) {
    x(i) = window * i / n;
    y(i) = amplitude * std::sin(omega * x(i) + phase) + offset + 0.01 * g.next();
  }
  FitConfig config;
  config.sspec = {0, {x(0), x(n - 1)}};
  config.harmonics = 1;
  const auto r = fit(x, y, config);
  const auto h = harmonic_components(r.alpha, r.covariance.covariance.topLeftCorner(2, 2));
  o.check(r.converged, "converged");
  o.check(std::abs(r.omega_hat - omega) <= 1e-3, "frequency error " + fmt("%.2e", std::abs(r.omega_hat - omega)));
  o.check(std::abs(h[0].amplitude - amplitude) <= 1e-3, "amplitude error " + fmt("%.2e", std::abs(h[0].amplitude - amplitude)));
  o.check(std::abs(h[0].phase - phase) <= 1e-3, "phase error " + fmt("%.2e", std::abs(h[0].phase - phase)));
  o.check(std::abs(r.beta(0) - offset) <= 1e-3, "offset error " + fmt("%.2e", std::abs(r.beta(0) - offset)));
  return o;
}

// CLI helpers

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d(VPFIT_TEST_TMP);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + VPFIT_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

Outcome c10_cli_contract() {
  Outcome o;
  const fs::path d = work_dir();
  const fs::path a = d / "a.csv", b = d / "b.csv";
  const int s1 = run_cli("synth --preset paper-6a --seed 1 -o " + q(a));
  const int s2 = run_cli("synth --preset paper-6a --seed 1 -o " + q(b));
  o.check(s1 == 0 && s2 == 0 && slurp(a) == slurp(b) && slurp(d / "a.csv.truth.csv") == slurp(d / "b.csv.truth.csv"),
          "synth reruns byte-identical");

  const std::string cfg = " --set harmonics=3";
  const int f1 = run_cli("fit " + q(a) + cfg + " -o " + q(d / "run1"));
  const int f2 = run_cli("fit " + q(a) + cfg + " -o " + q(d / "run2"));
  bool same = f1 == 0 && f2 == 0;
  for (const char* suffix : {"_components.csv", "_covariance.csv"})
    same = same && slurp(d / ("run1" + std::string(suffix))) == slurp(d / ("run2" + std::string(suffix)));
  // reports differ only in the echoed source path
  auto strip_source = [](std::string text) {
    const auto pos = text.find('\n');
    return text.substr(pos + 1);
  };
  same = same && strip_source(slurp(d / "run1_report.txt")) == strip_source(slurp(d / "run2_report.txt"));
  o.check(same, "fit reruns byte-identical (exit codes " + std::to_string(f1) + ", " + std::to_string(f2) + ")");

  const int bad = run_cli("fit " + q(a) + " --set breakpoints=0,0.5,3 -o " + q(d / "bad"));
  const int missing = run_cli("fit " + q(d / "missing.csv") + " -o " + q(d / "missing"));
  const int capped = run_cli("fit " + q(a) + cfg + " --set max-iterations=1 -o " + q(d / "capped"));
  o.check(bad == 1 && missing == 1, "input errors exit 1 (breakpoints outside span: " + std::to_string(bad) +
                                        ", missing file: " + std::to_string(missing) + ")");
  o.check(capped == 2 && fs::exists(d / "capped_report.txt"),
          "non-convergence exits 2 with outputs written (exit " + std::to_string(capped) + ")");

  double worst = INFINITY;
  try {
    const auto rep = cli::read_report(d / "run1_report.txt");
    const auto data = cli::ingest_csv(a);
    const auto B = assemble_basis(data.x, {std::stod(rep.at("omega_hat")), 3}, cli::resolve_spline(cli::RunConfig{}, data));
    Vector gamma(B.cols());
    for (int i = 0; i < 6; ++i) gamma(i) = std::stod(rep.at("alpha" + std::to_string(i + 1)));
    for (int i = 0; i < 6; ++i) gamma(6 + i) = std::stod(rep.at("beta" + std::to_string(i + 1)));
    cli::CsvOptions opt;
    opt.y_column = cli::ColumnRef::parse("y_model");
    const auto model = cli::ingest_csv(d / "run1_components.csv", opt);
    worst = (B.values * gamma - model.y).cwiseAbs().maxCoeff();
  } catch (const std::exception& e) {
    o.notes.push_back(std::string("error: ") + e.what());
  }
  o.check(worst <= 1e-9, "report coefficients rebuild y_model within " + fmt("%.2e", worst) + " (<= 1e-9)");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"C1", "initial frequency on the synthetic preset", c1_initial_frequency},
      {"C2", "frequency recovery over 20 seeds", c2_frequency_recovery},
      {"C3", "residual fidelity", c3_residual_fidelity},
      {"C4", "covariance properties, Monte Carlo, magnitudes", c4_covariance},
      {"C5", "projection functional correctness", c5_vpf_correctness},
      {"C6", "basis laws", c6_basis_laws},
      {"C7", "B-spline vs monomial interaction", c7_interaction},
      {"C8", "four-parameter sine fit", c8_four_parameter},
      {"C10", "CLI contract", c10_cli_contract},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title);
    for (const auto& note : o.notes) std::printf("       %s\n", note.c_str());
    if (std::string(c.id) == "C8")
      std::printf("[N/A ] C9 industrial field data: not available, not reproducible; covered by C1-C8\n");
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
