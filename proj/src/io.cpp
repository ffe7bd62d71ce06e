#include "star/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace star {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return is;
}

// Parses `# <format> key=value ...`.
std::map<std::string, std::string> parse_header(const std::string& line, const std::string& format,
                                                const std::string& path) {
  const std::string prefix = "# " + format;
  if (line.rfind(prefix, 0) != 0) throw IoError(path + ": expected header '" + prefix + "'");
  std::map<std::string, std::string> kv;
  std::istringstream is(line.substr(prefix.size()));
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw IoError(path + ": malformed header field " + tok);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

double to_double(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw IoError("");
    return v;
  } catch (...) {
    throw IoError(path + ": not a number: '" + s + "'");
  }
}

int to_int(const std::string& s, const std::string& path) {
  const double v = to_double(s, path);
  if (v != std::floor(v)) throw IoError(path + ": not an integer: '" + s + "'");
  return static_cast<int>(v);
}

const std::string& field(const std::map<std::string, std::string>& kv, const std::string& key,
                         const std::string& path) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw IoError(path + ": header lacks " + key);
  return it->second;
}

std::vector<double> split_numbers(const std::string& line, const std::string& path) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    auto end = line.find(',', start);
    if (end == std::string::npos) end = line.size();
    std::string tok = line.substr(start, end - start);
    while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.pop_back();
    out.push_back(to_double(tok, path));
    start = end + 1;
  }
  return out;
}

std::string next_data_line(std::istream& is, const std::string& path) {
  std::string line;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#') return line;
  throw IoError(path + ": unexpected end of file");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_datafield(const std::string& path, const DataField& f,
                     std::optional<std::pair<int, int>> pair) {
  auto os = open_out(path);
  const auto& g = f.grid;
  os << "# " << kDataFieldFormat << " n=" << g.n << " ny=" << g.ny << " h=" << format_double(g.h)
     << " y0=" << format_double(g.y0) << " width=" << format_double(g.width);
  if (pair) os << " pair=" << pair->first << ',' << pair->second;
  os << "\n# rows z_j = j h for j = 0..n+1; columns y_i = y0 + i h\n";
  for (int j = 0; j < g.rows(); ++j) {
    for (int i = 0; i < g.ny; ++i) os << (i ? "," : "") << format_double(f.at(i, j));
    os << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

DataField read_datafield(const std::string& path, std::optional<std::pair<int, int>>* pair) {
  auto is = open_in(path);
  std::string line;
  std::getline(is, line);
  const auto kv = parse_header(line, kDataFieldFormat, path);
  SamplingGrid g;
  g.n = to_int(field(kv, "n", path), path);
  g.ny = to_int(field(kv, "ny", path), path);
  g.h = to_double(field(kv, "h", path), path);
  g.y0 = to_double(field(kv, "y0", path), path);
  g.width = to_double(field(kv, "width", path), path);
  if (g.n < 1 || g.ny < 1 || !(g.h > 0.0)) throw IoError(path + ": invalid grid");
  if (pair) {
    pair->reset();
    if (const auto it = kv.find("pair"); it != kv.end()) {
      const auto c = it->second.find(',');
      if (c == std::string::npos) throw IoError(path + ": malformed pair field");
      *pair = std::make_pair(to_int(it->second.substr(0, c), path), to_int(it->second.substr(c + 1), path));
    }
  }
  DataField f(g);
  for (int j = 0; j < g.rows(); ++j) {
    const auto v = split_numbers(next_data_line(is, path), path);
    if (static_cast<int>(v.size()) != g.ny) throw IoError(path + ": wrong column count");
    for (int i = 0; i < g.ny; ++i) f.at(i, j) = v[i];
  }
  return f;
}

void write_image_csv(const std::string& path, const ImageGrid& img) {
  auto os = open_out(path);
  os << "# " << kImageFormat << " ny=" << img.ny << " nz=" << img.nz << " h=" << format_double(img.h)
     << " y0=" << format_double(img.y0) << "\n# rows z_j = (j+1) h; columns y_i = y0 + i h\n";
  for (int j = 0; j < img.nz; ++j) {
    for (int i = 0; i < img.ny; ++i) os << (i ? "," : "") << format_double(img.at(i, j));
    os << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

ImageGrid read_image_csv(const std::string& path) {
  auto is = open_in(path);
  std::string line;
  std::getline(is, line);
  const auto kv = parse_header(line, kImageFormat, path);
  ImageGrid img(to_int(field(kv, "ny", path), path), to_int(field(kv, "nz", path), path),
                to_double(field(kv, "h", path), path), to_double(field(kv, "y0", path), path));
  for (int j = 0; j < img.nz; ++j) {
    const auto v = split_numbers(next_data_line(is, path), path);
    if (static_cast<int>(v.size()) != img.ny) throw IoError(path + ": wrong column count");
    for (int i = 0; i < img.ny; ++i) img.at(i, j) = v[i];
  }
  return img;
}

void write_pgm(const std::string& path, const ImageGrid& img, double width) {
  auto os = open_out(path);
  os << "P5\n" << img.ny << ' ' << img.nz << "\n255\n";
  std::vector<unsigned char> row(img.ny);
  for (int j = img.nz - 1; j >= 0; --j) {
    for (int i = 0; i < img.ny; ++i) {
      const double v = std::clamp(img.at(i, j) * width, -2.0, 6.0);
      row[i] = static_cast<unsigned char>(std::lround((v + 2.0) / 8.0 * 255.0));
    }
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw IoError("write failed: " + path);
}

void write_coefficients_csv(const std::string& path, const CoefficientTable& t) {
  auto os = open_out(path);
  os << "# " << kCoefficientFormat << " nmax=" << t.nmax << " ny=" << t.rows() << "\nn,q,re,im\n";
  for (int m = 0; m < t.rows(); ++m)
    for (int n = -t.nmax; n <= t.nmax; ++n) {
      const cplx v = t.at(m, n);
      os << n << ',' << format_double(t.q(m)) << ',' << format_double(v.real()) << ','
         << format_double(v.imag()) << '\n';
    }
  if (!os) throw IoError("write failed: " + path);
}

void write_ballistic(const std::string& path, const SamplingGrid& g, const std::vector<double>& p) {
  if (static_cast<int>(p.size()) != g.ny) throw IoError("ballistic data must have ny samples");
  auto os = open_out(path);
  os << "# " << kBallisticFormat << " ny=" << g.ny << " h=" << format_double(g.h)
     << " y0=" << format_double(g.y0) << "\ny,value\n";
  for (int i = 0; i < g.ny; ++i) os << format_double(g.y(i)) << ',' << format_double(p[i]) << '\n';
  if (!os) throw IoError("write failed: " + path);
}

std::vector<double> read_ballistic(const std::string& path, const SamplingGrid& g) {
  auto is = open_in(path);
  std::string line;
  std::getline(is, line);
  const auto kv = parse_header(line, kBallisticFormat, path);
  const int ny = to_int(field(kv, "ny", path), path);
  const double h = to_double(field(kv, "h", path), path);
  const double y0 = to_double(field(kv, "y0", path), path);
  if (ny != g.ny || std::abs(h - g.h) > 1e-12 * g.h || std::abs(y0 - g.y0) > 1e-12 * g.width)
    throw IoError(path + ": ballistic grid does not match the data grid");
  std::getline(is, line);
  if (line.rfind("y,value", 0) != 0) throw IoError(path + ": expected column header y,value");
  std::vector<double> out;
  for (int i = 0; i < ny; ++i) {
    const auto v = split_numbers(next_data_line(is, path), path);
    if (v.size() != 2) throw IoError(path + ": expected two columns");
    out.push_back(v[1]);
  }
  return out;
}

void write_diagnostics(const std::string& path, const Reconstruction& r) {
  auto os = open_out(path);
  os << "# " << kDiagnosticsFormat << " failures=" << r.failures
     << " imag_residue=" << format_double(r.imag_residue) << "\nrow,q,q_solved,condition,flagged,reason\n";
  for (const auto& s : r.slices) {
    std::string reason = s.reason;
    std::replace(reason.begin(), reason.end(), '"', '\'');
    os << s.row << ',' << format_double(s.q) << ',' << format_double(s.q_solved) << ','
       << format_double(s.condition) << ',' << (s.flagged ? 1 : 0) << ",\"" << reason << "\"\n";
  }
  if (!os) throw IoError("write failed: " + path);
}

std::vector<double> ballistic_projections(const Phantom& p, const SamplingGrid& g) {
  std::vector<double> out(g.ny);
  for (int i = 0; i < g.ny; ++i) out[i] = line_integral(p, {g.y(i), 0.0}, {0.0, 1.0}, p.width);
  return out;
}

}  // namespace star
