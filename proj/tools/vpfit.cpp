// vpfit: separate a periodic component (base frequency + harmonics) from a
// B-spline trend by variable projection.
//
//   vpfit synth   --preset paper-6a --seed 1 -o data.csv
//   vpfit fit     data.csv --config fit.cfg --set harmonics=3 --out run/data
//   vpfit spectra --family monomial --max-degree 5 -o mono.csv

#include <CLI11.hpp>

#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vpfit/cli.hpp"

namespace fs = std::filesystem;
using namespace vpfit;
using namespace vpfit::cli;

namespace {

struct CommonInput {
  std::string x_column = "0";
  std::string y_column = "1";
  std::string delimiter = ",";
  std::string config_path;
  std::vector<std::string> overrides;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--x-col", x_column, "x column: 0-based index or header name");
    cmd.add_option("--y-col", y_column, "y column: 0-based index or header name");
    cmd.add_option("--delimiter", delimiter, "field delimiter (single character)");
    cmd.add_option("-c,--config", config_path, "key=value configuration file");
    cmd.add_option("--set", overrides, "override a configuration key (key=value), repeatable");
  }

  KeyValues config() const {
    KeyValues kv = config_path.empty() ? KeyValues{} : KeyValues::load(config_path);
    for (const auto& o : overrides) kv.assign(o, "--set");
    return kv;
  }

  CsvOptions csv(const RunConfig& cfg) const {
    if (delimiter.size() != 1) throw Error(ErrorKind::InvalidArgument, "delimiter must be a single character");
    CsvOptions o;
    o.x_column = ColumnRef::parse(x_column);
    o.y_column = ColumnRef::parse(y_column);
    o.delimiter = delimiter[0];
    o.rescale = cfg.rescale;
    return o;
  }
};

int report_error(const std::exception& e) {
  std::cerr << "vpfit: error: " << e.what() << '\n';
  return exit_code::input_error;
}

int fit_one(const std::string& input, const CommonInput& common, const RunConfig& cfg, const std::string& prefix) {
  const auto data = ingest_csv(input, common.csv(cfg));
  const auto run = run_fit(data, cfg, FitOutputs::from_prefix(prefix));
  const auto& f = run.report.fit;
  std::cerr << input << ": omega_init=" << format_number(f.omega_init) << " omega_hat=" << format_number(f.omega_hat)
            << " period=" << format_number(run.report.period) << (f.converged ? "" : " (NOT CONVERGED)") << '\n';
  return run.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic + piecewise-polynomial trend separation by variable projection"};
  app.require_subcommand(1);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit one or more CSV datasets");
  CommonInput fit_in;
  std::vector<std::string> fit_inputs;
  std::string fit_out, fit_out_dir;
  fit_cmd->add_option("inputs", fit_inputs, "input CSV file(s)")->required()->check(CLI::ExistingFile);
  fit_in.add_to(*fit_cmd);
  fit_cmd->add_option("-o,--out", fit_out, "output prefix (single input); files <prefix>_components.csv, ...");
  fit_cmd->add_option("--out-dir", fit_out_dir, "output directory for batch runs (prefix = dir/<input stem>)");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset with ground truth");
  std::string synth_preset = "paper-6a", synth_spec, synth_out;
  std::optional<std::uint64_t> synth_seed;
  std::optional<double> synth_sigma;
  std::optional<int> synth_samples;
  synth_cmd->add_option("--preset", synth_preset, "named preset (paper-6a)");
  synth_cmd->add_option("--spec", synth_spec, "key=value synthetic spec file (overrides --preset)");
  synth_cmd->add_option("--seed", synth_seed, "noise seed");
  synth_cmd->add_option("--sigma", synth_sigma, "noise standard deviation");
  synth_cmd->add_option("--samples", synth_samples, "number of samples");
  synth_cmd->add_option("-o,--out", synth_out, "output dataset CSV")->required();

  // spectra
  auto* spectra_cmd = app.add_subcommand("spectra", "write DFT magnitude spectra as CSV");
  CommonInput spec_in;
  std::string spec_family, spec_input, spec_out;
  int spec_degree = 5, spec_samples = 1024;
  bool spec_prefit = false;
  std::optional<double> spec_rate, spec_probe;
  double spec_cutoff = 10.0;
  spectra_cmd->add_option("--family", spec_family, "basis family: monomial | bspline | compare")
      ->check(CLI::IsMember({"monomial", "bspline", "compare"}));
  spectra_cmd->add_option("--input", spec_input, "signal CSV (instead of --family)")->check(CLI::ExistingFile);
  spectra_cmd->add_flag("--prefit-residual", spec_prefit, "spectrum of the residual after a spline-only fit");
  spectra_cmd->add_option("--max-degree", spec_degree, "highest monomial degree");
  spectra_cmd->add_option("--samples", spec_samples, "number of samples for basis families");
  spectra_cmd->add_option("--sample-rate", spec_rate, "samples per unit (default: samples per window)");
  spectra_cmd->add_option("--omega-probe", spec_probe, "probe frequency in rad/unit for --family compare");
  spectra_cmd->add_option("--cutoff", spec_cutoff, "high-frequency cutoff (cycles/unit) for --family compare");
  spectra_cmd->add_option("-o,--out", spec_out, "output CSV")->required();
  spec_in.add_to(*spectra_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_code::success : exit_code::input_error;
  }

  try {
    if (*fit_cmd) {
      const RunConfig cfg = parse_run_config(fit_in.config());
      if (fit_inputs.size() == 1) {
        const std::string prefix =
            !fit_out.empty() ? fit_out
                             : (fit_out_dir.empty() ? fs::path(fit_inputs[0]).replace_extension().string()
                                                    : (fs::path(fit_out_dir) / fs::path(fit_inputs[0]).stem()).string());
        return fit_one(fit_inputs[0], fit_in, cfg, prefix);
      }
      if (!fit_out.empty()) throw Error(ErrorKind::InvalidArgument, "--out takes a single input; use --out-dir for batches");
      std::vector<std::future<int>> jobs;
      for (const auto& input : fit_inputs) {
        const fs::path dir = fit_out_dir.empty() ? fs::path(input).parent_path() : fs::path(fit_out_dir);
        const std::string prefix = (dir / fs::path(input).stem()).string();
        jobs.push_back(std::async(std::launch::async, [&, input, prefix] {
          try {
            return fit_one(input, fit_in, cfg, prefix);
          } catch (const std::exception& e) {
            std::cerr << input << ": ";
            return report_error(e);
          }
        }));
      }
      int worst = exit_code::success;
      for (auto& j : jobs) {
        const int code = j.get();
        if (code == exit_code::input_error || (code == exit_code::not_converged && worst == exit_code::success))
          worst = code;
      }
      return worst;
    }

    if (*synth_cmd) {
      SyntheticSpec spec = synth_spec.empty() ? preset(synth_preset) : parse_synthetic_spec(KeyValues::load(synth_spec));
      if (synth_seed) spec.seed = *synth_seed;
      if (synth_sigma) spec.noise_sigma = *synth_sigma;
      if (synth_samples) spec.n_samples = *synth_samples;
      run_synth(spec, SynthOutputs::for_path(synth_out));
      return exit_code::success;
    }

    if (*spectra_cmd) {
      const RunConfig cfg = parse_run_config(spec_in.config());
      if (!spec_input.empty()) {
        const auto data = ingest_csv(spec_input, spec_in.csv(cfg));
        std::optional<SplineSpec> prefit;
        if (spec_prefit) prefit = resolve_spline(cfg, data);
        write_text(spec_out, signal_spectrum_csv(signal_spectrum(data, prefit), spec_prefit ? "prefit_residual" : "signal"));
        return exit_code::success;
      }
      if (spec_family.empty()) throw Error(ErrorKind::InvalidArgument, "spectra needs --family or --input");
      auto bspline_spec = [&] {
        SplineSpec s{cfg.degree, cfg.breakpoints.uniform_count > 0 ? uniform_breakpoints(0.0, 1.0, cfg.breakpoints.uniform_count)
                                                                    : cfg.breakpoints.explicit_points};
        validate(s);
        return s;
      };
      if (spec_family == "monomial") {
        const double rate = spec_rate.value_or(static_cast<double>(spec_samples));
        write_text(spec_out, spectrum_csv(basis_spectra(monomial_vandermonde(spec_samples, spec_degree), rate)));
      } else if (spec_family == "bspline") {
        const auto s = bspline_spec();
        const double span = s.upper() - s.lower();
        Vector x(spec_samples);
        for (int i = 0; i < spec_samples; ++i) x(i) = s.lower() + span * i / spec_samples;
        const double rate = spec_rate.value_or(spec_samples / span);
        write_text(spec_out, spectrum_csv(basis_spectra(bspline_basis(x, s), rate)));
      } else {
        if (!spec_probe) throw Error(ErrorKind::InvalidArgument, "--family compare needs --omega-probe");
        const auto report = interaction_report(bspline_spec(), spec_degree, *spec_probe, spec_samples, spec_cutoff);
        write_text(spec_out, interaction_csv(report));
        std::cout << "probe_bin=" << report.probe_bin << "\nprobe_winner=" << to_string(report.probe_winner)
                  << "\nenergy_winner=" << to_string(report.energy_winner) << "\n(first=bspline, second=monomial)\n";
      }
      return exit_code::success;
    }
  } catch (const std::exception& e) {
    return report_error(e);
  }
  return exit_code::success;
}
