#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "star/config.hpp"
#include "star/io.hpp"
#include "star/local.hpp"
#include "star/stability.hpp"

using namespace star;

namespace {

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::geometry: return 3;
    case ErrorCategory::solver: return 4;
    case ErrorCategory::io: return 5;
    default: return 0;
  }
}

int fail(const std::exception& e) {
  const auto c = categorize(e);
  std::cerr << "error[" << to_string(c) << "]: " << e.what() << "\n";
  return exit_code(c);
}

struct GeometryFlags {
  std::string reference;
  std::vector<double> angles;
  std::vector<double> weights;
  double width = 1.0;

  void add(CLI::App* app) {
    app->add_option("--case", reference, "Reference geometry 1a, 1b, 2a, 2b, 3a or 3b");
    app->add_option("--angles", angles, "Ray angles in units of pi, measured from +Z");
    app->add_option("--weights", weights, "Ray weights s_k (default all 1)");
    app->add_option("--width", width, "Strip width L")->check(CLI::PositiveNumber);
  }
  StarGeometry build() const {
    if (reference.empty() == angles.empty()) throw ConfigError("give exactly one of --case or --angles");
    return build_geometry({reference, angles, weights}, width);
  }
};

std::string format_footer() {
  std::string s = "File formats:\n";
  for (const char* f : {kDataFieldFormat, kImageFormat, kCoefficientFormat, kBallisticFormat,
                        kDiagnosticsFormat, kCurveFormat})
    s += std::string("  ") + f + "\n";
  s += "  PGM P5, 8 bit, mu L clipped to [-2, 6]\n"
       "Environment:\n  STAR_THREADS  worker count for per-q solves\n"
       "Exit codes: 0 ok, 2 config or arguments, 3 geometry, 4 solver, 5 io";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Star-transform tomography toolkit"};
  app.footer(format_footer());
  app.require_subcommand(1);

  // analyze
  GeometryFlags ag;
  std::string curve;
  auto* analyze = app.add_subcommand("analyze", "Stability report for a star geometry");
  ag.add(analyze);
  analyze->add_option("--curve-csv", curve, "Write f(theta) samples as CSV");

  // phantom
  std::string ph_kind = "square", ph_csv, ph_pgm;
  int ph_n = 125;
  double ph_width = 1.0;
  auto* phantom = app.add_subcommand("phantom", "Rasterize a reference phantom");
  phantom->add_option("--kind", ph_kind, "square or shepp_logan")
      ->check(CLI::IsMember({"square", "shepp_logan"}));
  phantom->add_option("--n", ph_n, "Interior grid size (odd)");
  phantom->add_option("--width", ph_width, "Strip width L")->check(CLI::PositiveNumber);
  phantom->add_option("--out-csv", ph_csv, "Image CSV output");
  phantom->add_option("--out-pgm", ph_pgm, "PGM output");

  // forward
  GeometryFlags fg;
  std::string fw_kind = "square", fw_dir = ".", fw_ballistic;
  int fw_n = 125;
  double fw_photons = 0.0, fw_scatter = 0.0;
  std::uint64_t fw_seed = 1;
  auto* forward = app.add_subcommand("forward", "Synthesize pairwise measurements and Phi");
  fg.add(forward);
  forward->add_option("--kind", fw_kind, "square or shepp_logan")
      ->check(CLI::IsMember({"square", "shepp_logan"}));
  forward->add_option("--n", fw_n, "Interior grid size (odd)");
  forward->add_option("--photons", fw_photons, "Incident photon count; 0 for noiseless");
  forward->add_option("--seed", fw_seed, "Noise seed");
  forward->add_option("--scatter", fw_scatter, "Scattering-contrast amplitude");
  forward->add_option("--out-dir", fw_dir, "Directory for pair_j_k.csv and phi.csv");
  forward->add_option("--ballistic", fw_ballistic, "Also write ballistic projections to this file");

  // reconstruct
  GeometryFlags rg;
  std::string rc_data, rc_method = "direct", rc_csv, rc_pgm, rc_ballistic, rc_trunc = "zero_data", rc_diag;
  std::vector<std::string> rc_pairs;
  std::vector<int> rc_zero;
  double rc_lambda = 0.0;
  int rc_nmax = -1, rc_nsum = 200, rc_threads = 0;
  bool rc_proj = false;
  auto* recon = app.add_subcommand("reconstruct", "Reconstruct mu from Phi or pairwise fields");
  rg.add(recon);
  recon->add_option("--data", rc_data, "Phi data field (recursive, direct)");
  recon->add_option("--pairs", rc_pairs, "Pairwise data fields (local)");
  recon->add_option("--method", rc_method, "recursive, direct or local")
      ->check(CLI::IsMember({"recursive", "direct", "local"}));
  recon->add_option("--lambda", rc_lambda, "Tikhonov parameter")->check(CLI::NonNegativeNumber);
  recon->add_option("--nmax", rc_nmax, "Highest Z harmonic; -1 for (N-1)/2");
  recon->add_option("--nsum", rc_nsum, "Terms of the accelerated series")->check(CLI::PositiveNumber);
  recon->add_option("--truncation", rc_trunc, "zero_data or truncate_matrix")
      ->check(CLI::IsMember({"zero_data", "truncate_matrix"}));
  recon->add_flag("--use-projection", rc_proj, "Use ballistic mu_0(q) (recursive only)");
  recon->add_option("--ballistic", rc_ballistic, "Ballistic projection CSV");
  recon->add_option("--zero-set", rc_zero, "Rays with sigma = 0 (local)");
  recon->add_option("--threads", rc_threads, "Worker threads; 0 uses STAR_THREADS");
  recon->add_option("--out-csv", rc_csv, "Image CSV output");
  recon->add_option("--out-pgm", rc_pgm, "PGM output");
  recon->add_option("--diagnostics", rc_diag, "Per-q diagnostics CSV");

  // reproduce-table1
  auto* table = app.add_subcommand("reproduce-table1", "Sigma0, Sigma1 and zero counts of the reference cases");

  // run
  std::string config_path;
  bool print_config = false;
  auto* runc = app.add_subcommand("run", "Run an experiment from a JSON config");
  runc->add_option("config", config_path, "Config file")->required();
  runc->add_flag("--print-config", print_config, "Echo the normalized config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*analyze) {
      const auto g = ag.build();
      std::cout << format_report(classify(g));
      if (!curve.empty()) {
        std::ofstream os(curve);
        if (!os) throw IoError("cannot write " + curve);
        os << "# " << kCurveFormat << "\ntheta_over_pi,f\n";
        for (const auto& [t, f] : sample_f_theta(g)) os << format_double(t) << ',' << format_double(f) << '\n';
      }
    } else if (*phantom) {
      const Phantom p = build_phantom({ph_kind, 0.0}, ph_width);
      const ImageGrid img = rasterize(p, ph_n);
      if (!ph_csv.empty()) write_image_csv(ph_csv, img);
      if (!ph_pgm.empty()) write_pgm(ph_pgm, img, ph_width);
      std::cout << "max_mu_L " << format_double(img.max_value() * ph_width) << "\n";
    } else if (*forward) {
      const auto g = fg.build();
      const Phantom p = build_phantom({fw_kind, fw_scatter}, fg.width);
      p.validate();
      const SamplingGrid grid = make_sampling_grid(p, g, fw_n);
      ExperimentConfig c;
      if (fw_photons > 0.0) c.noise = NoiseSpec{fw_photons, fw_seed};
      NoiseReport nr;
      const auto fields = measure(c, g, p, grid, &nr);
      std::vector<double> w;
      for (const auto& r : g.rays()) w.push_back(r.weight);
      const DataField phi = combine_pairs(fields, scheme_for_weights(w));
      std::filesystem::create_directories(fw_dir);
      const std::filesystem::path dir(fw_dir);
      for (const auto& f : fields)
        write_datafield((dir / ("pair_" + std::to_string(f.j) + "_" + std::to_string(f.k) + ".csv")).string(),
                        f.field, std::make_pair(f.j, f.k));
      write_datafield((dir / "phi.csv").string(), phi);
      if (!fw_ballistic.empty()) write_ballistic(fw_ballistic, grid, ballistic_projections(p, grid));
      std::cout << "ny " << grid.ny << "\nnoise_resampled " << nr.resampled << "\nnoise_clamped " << nr.clamped
                << "\n";
    } else if (*recon) {
      const auto g = rg.build();
      ImageGrid img;
      if (rc_method == "local") {
        if (rc_pairs.empty()) throw ConfigError("--method local needs --pairs");
        std::vector<PairwiseField> fields;
        for (const auto& path : rc_pairs) {
          std::optional<std::pair<int, int>> pair;
          DataField f = read_datafield(path, &pair);
          if (!pair) throw IoError(path + ": not a pairwise field");
          fields.push_back({pair->first, pair->second, std::move(f)});
        }
        const auto scheme = solve_sigmas(g, rc_zero);
        img = divergence_reconstruct(vector_combine(fields, scheme), scheme.zeta);
      } else {
        if (rc_data.empty()) throw ConfigError("--data is required");
        if (rc_proj && rc_method != "recursive") throw ConfigError("--use-projection requires --method recursive");
        const DataField phi = read_datafield(rc_data);
        ReconstructOptions opt;
        opt.method = parse_method(rc_method);
        opt.lambda = rc_lambda;
        opt.nmax = rc_nmax;
        opt.nsum = rc_nsum;
        opt.truncation = parse_truncation(rc_trunc);
        opt.threads = rc_threads;
        opt.use_projection = rc_proj;
        if (rc_proj) {
          if (rc_ballistic.empty()) throw ConfigError("--use-projection needs --ballistic");
          opt.ballistic = read_ballistic(rc_ballistic, phi.grid);
        }
        const auto rec = reconstruct(phi, g, opt);
        for (const auto& w : rec.warnings) std::cerr << "warning: " << w << "\n";
        if (!rc_diag.empty()) write_diagnostics(rc_diag, rec);
        std::cout << "failed_slices " << rec.failures << "\n";
        img = rec.image;
      }
      if (!rc_csv.empty()) write_image_csv(rc_csv, img);
      if (!rc_pgm.empty()) write_pgm(rc_pgm, img, rg.width);
    } else if (*table) {
      std::printf("%-4s %9s %9s %3s\n", "case", "Sigma0", "Sigma1", "NZ");
      for (const auto& c : reference_geometries()) {
        const auto r = classify(reference_geometry(c.name));
        std::printf("%-4s %9.4f %9.4f %3d\n", c.name.c_str(), r.sigma.sigma0, r.sigma.sigma1, r.zero_count);
      }
    } else if (*runc) {
      const ExperimentConfig c = load_config(config_path);
      if (print_config) std::cout << dump_config(c);
      const RunResult r = run(c);
      if (r.exit_code != 0) {
        std::cerr << "error[" << to_string(r.category) << "]: " << r.message << "\n";
        return exit_code(r.category);
      }
      std::cout << "interior_relative_l2 " << format_double(r.interior_error) << "\nfailed_slices "
                << r.failures << "\n";
      for (const auto& o : r.outputs) std::cout << "wrote " << o << "\n";
    }
  } catch (const std::exception& e) {
    return fail(e);
  }
  return 0;
}
