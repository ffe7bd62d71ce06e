#include "star/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "star/io.hpp"
#include "star/local.hpp"
#include "star/stability.hpp"

namespace star {

using nlohmann::json;

const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::none: return "none";
    case ErrorCategory::config: return "config";
    case ErrorCategory::geometry: return "geometry";
    case ErrorCategory::solver: return "solver";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

ErrorCategory categorize(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const json::exception*>(&e))
    return ErrorCategory::config;
  if (dynamic_cast<const IoError*>(&e)) return ErrorCategory::io;
  if (dynamic_cast<const GeometryError*>(&e) || dynamic_cast<const CoefficientError*>(&e) ||
      dynamic_cast<const PhantomError*>(&e) || dynamic_cast<const LocalError*>(&e))
    return ErrorCategory::geometry;
  return ErrorCategory::solver;
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  ExperimentConfig c;
  check_keys(j, {"strip_width", "n", "geometry", "phantom", "noise", "solver", "output"}, "config");
  read(j, "strip_width", c.width, "config");
  read(j, "n", c.n, "config");
  if (!j.contains("geometry")) throw ConfigError("config lacks 'geometry'");

  const json& g = j.at("geometry");
  check_keys(g, {"case", "rays"}, "geometry");
  read(g, "case", c.geometry.reference, "geometry");
  if (g.contains("rays")) {
    if (!g.at("rays").is_array() || g.at("rays").empty()) throw ConfigError("geometry.rays must be a non-empty array");
    for (const auto& r : g.at("rays")) {
      check_keys(r, {"theta_over_pi", "weight"}, "geometry.rays");
      if (!r.contains("theta_over_pi")) throw ConfigError("ray lacks theta_over_pi");
      double t = 0.0, w = 1.0;
      read(r, "theta_over_pi", t, "geometry.rays");
      read(r, "weight", w, "geometry.rays");
      c.geometry.angles_over_pi.push_back(t);
      c.geometry.weights.push_back(w);
    }
  }
  if (c.geometry.reference.empty() == c.geometry.angles_over_pi.empty())
    throw ConfigError("geometry needs exactly one of 'case' or 'rays'");

  if (j.contains("phantom")) {
    const json& p = j.at("phantom");
    check_keys(p, {"kind", "scatter"}, "phantom");
    read(p, "kind", c.phantom.kind, "phantom");
    read(p, "scatter", c.phantom.scatter, "phantom");
  }
  if (j.contains("noise") && !j.at("noise").is_null()) {
    const json& n = j.at("noise");
    check_keys(n, {"photons", "seed"}, "noise");
    NoiseSpec ns;
    read(n, "photons", ns.photons, "noise");
    read(n, "seed", ns.seed, "noise");
    c.noise = ns;
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s, {"method", "lambda", "nmax", "nsum", "truncation", "use_projection", "threads", "zero_set"},
               "solver");
    read(s, "method", c.solver.method, "solver");
    read(s, "lambda", c.solver.lambda, "solver");
    read(s, "nmax", c.solver.nmax, "solver");
    read(s, "nsum", c.solver.nsum, "solver");
    read(s, "truncation", c.solver.truncation, "solver");
    read(s, "use_projection", c.solver.use_projection, "solver");
    read(s, "threads", c.solver.threads, "solver");
    read(s, "zero_set", c.solver.zero_set, "solver");
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, {"dir", "prefix"}, "output");
    read(o, "dir", c.output.dir, "output");
    read(o, "prefix", c.output.prefix, "output");
  }

  if (!(c.width > 0.0)) throw ConfigError("width must be positive");
  if (c.n < 3 || c.n % 2 == 0) throw ConfigError("n must be odd and at least 3");
  if (c.phantom.kind != "square" && c.phantom.kind != "shepp_logan")
    throw ConfigError("phantom.kind must be square or shepp_logan");
  if (c.noise && !(c.noise->photons >= 1.0)) throw ConfigError("noise.photons must be at least 1");
  if (c.solver.method != "direct" && c.solver.method != "recursive" && c.solver.method != "local")
    throw ConfigError("solver.method must be direct, recursive or local");
  if (c.solver.lambda < 0.0) throw ConfigError("solver.lambda must be non-negative");
  if (c.solver.nsum < 1) throw ConfigError("solver.nsum must be positive");
  if (c.solver.truncation != "zero_data" && c.solver.truncation != "truncate_matrix")
    throw ConfigError("solver.truncation must be zero_data or truncate_matrix");
  if (c.solver.use_projection && c.solver.method != "recursive")
    throw ConfigError("solver.use_projection requires method recursive");
  if (c.output.prefix.empty()) throw ConfigError("output.prefix must not be empty");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& c) {
  json j;
  j["strip_width"] = c.width;
  j["n"] = c.n;
  json g = json::object();
  if (!c.geometry.reference.empty()) g["case"] = c.geometry.reference;
  if (!c.geometry.angles_over_pi.empty()) {
    json rays = json::array();
    for (std::size_t k = 0; k < c.geometry.angles_over_pi.size(); ++k)
      rays.push_back({{"theta_over_pi", c.geometry.angles_over_pi[k]},
                      {"weight", k < c.geometry.weights.size() ? c.geometry.weights[k] : 1.0}});
    g["rays"] = rays;
  }
  j["geometry"] = g;
  j["phantom"] = {{"kind", c.phantom.kind}, {"scatter", c.phantom.scatter}};
  if (c.noise)
    j["noise"] = {{"photons", c.noise->photons}, {"seed", c.noise->seed}};
  else
    j["noise"] = nullptr;
  j["solver"] = {{"method", c.solver.method},         {"lambda", c.solver.lambda},
                 {"nmax", c.solver.nmax},             {"nsum", c.solver.nsum},
                 {"truncation", c.solver.truncation}, {"use_projection", c.solver.use_projection},
                 {"threads", c.solver.threads},       {"zero_set", c.solver.zero_set}};
  j["output"] = {{"dir", c.output.dir}, {"prefix", c.output.prefix}};
  return j.dump(2) + "\n";
}

StarGeometry build_geometry(const GeometrySpec& g, double width) {
  if (!g.reference.empty()) {
    if (!g.angles_over_pi.empty()) throw ConfigError("geometry: give a case or angles, not both");
    return reference_geometry(g.reference, width);
  }
  std::vector<double> w = g.weights;
  if (w.empty()) w.assign(g.angles_over_pi.size(), 1.0);
  if (w.size() != g.angles_over_pi.size()) throw ConfigError("geometry: one weight per angle");
  return make_geometry_pi(g.angles_over_pi, w, width);
}

Phantom build_phantom(const PhantomSpec& p, double width) {
  Phantom ph = p.kind == "shepp_logan" ? make_shepp_logan(width) : make_square_phantom(width);
  if (p.scatter != 0.0)
    ph.scatter_contrast.push_back({Ellipse{0.0, 0.5 * width, 0.4 * width, 0.4 * width, 0.0}, p.scatter});
  return ph;
}

std::vector<PairwiseField> measure(const ExperimentConfig& c, const StarGeometry& g, const Phantom& p,
                                   const SamplingGrid& grid, NoiseReport* report) {
  auto fields = pairwise_fields(p, g, grid, true);
  if (c.noise)
    for (auto& f : fields) f = add_poisson_noise(f, c.noise->photons, c.noise->seed, report);
  return fields;
}

RunResult run(const ExperimentConfig& c) {
  RunResult res;
  try {
    const StarGeometry g = build_geometry(c.geometry, c.width);
    const Phantom p = build_phantom(c.phantom, c.width);
    p.validate();
    const SamplingGrid grid = make_sampling_grid(p, g, c.n);
    const auto report = classify(g);
    NoiseReport noise;
    const auto fields = measure(c, g, p, grid, &noise);

    ImageGrid image;
    Reconstruction rec;
    const bool local = c.solver.method == "local";
    if (local) {
      const auto scheme = solve_sigmas(g, c.solver.zero_set);
      image = divergence_reconstruct(vector_combine(fields, scheme), scheme.zeta);
    } else {
      const auto scheme = scheme_for_weights([&] {
        std::vector<double> w;
        for (const auto& r : g.rays()) w.push_back(r.weight);
        return w;
      }());
      const DataField phi = combine_pairs(fields, scheme);
      ReconstructOptions opt;
      opt.method = parse_method(c.solver.method);
      opt.lambda = c.solver.lambda;
      opt.nmax = c.solver.nmax;
      opt.nsum = c.solver.nsum;
      opt.truncation = parse_truncation(c.solver.truncation);
      opt.use_projection = c.solver.use_projection;
      opt.threads = c.solver.threads;
      if (opt.use_projection) opt.ballistic = ballistic_projections(p, grid);
      rec = reconstruct(phi, g, opt);
      image = rec.image;
      res.failures = rec.failures;
    }
    res.interior_error = interior_error(image, rasterize(p, c.n, grid.ny));

    namespace fs = std::filesystem;
    fs::create_directories(c.output.dir);
    const fs::path base = fs::path(c.output.dir) / c.output.prefix;
    const std::string csv = base.string() + ".csv", pgm = base.string() + ".pgm";
    const std::string stab = base.string() + "_stability.txt", diag = base.string() + "_diagnostics.csv";
    const std::string metrics = base.string() + "_metrics.txt";
    write_image_csv(csv, image);
    write_pgm(pgm, image, c.width);
    {
      std::ofstream os(stab);
      if (!os) throw IoError("cannot write " + stab);
      os << format_report(report);
    }
    if (!local) write_diagnostics(diag, rec);
    {
      std::ofstream os(metrics);
      if (!os) throw IoError("cannot write " + metrics);
      os << "interior_relative_l2 " << format_double(res.interior_error) << "\n";
      os << "failed_slices " << res.failures << "\n";
      os << "noise_samples " << noise.samples << "\nnoise_resampled " << noise.resampled
         << "\nnoise_clamped " << noise.clamped << "\n";
      for (const auto& w : rec.warnings) os << "warning " << w << "\n";
    }
    res.outputs = {csv, pgm, stab, metrics};
    if (!local) res.outputs.push_back(diag);
  } catch (const std::exception& e) {
    res.category = categorize(e);
    res.exit_code = 2;
    res.message = e.what();
  }
  return res;
}

}  // namespace star
