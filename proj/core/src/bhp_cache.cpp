#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>

#include "unifluct/bhp.hpp"
#include "unifluct/error.hpp"

namespace unifluct {

namespace {

constexpr const char* kMagic = "unifluct-bhp-table";

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, const std::filesystem::path& path,
                    std::size_t line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorKind::kParse, path.string() + ":" + std::to_string(line) +
                                       ": bad number '" + text + "'");
  }
  return v;
}

struct CacheHeader {
  std::map<std::string, std::string> fields;
  std::size_t data_line = 0;
};

// Header lines look like "# key<TAB>value"; the first one carries the magic.
CacheHeader read_header(std::istream& in, const std::filesystem::path& path) {
  CacheHeader header;
  std::string line;
  std::size_t lineno = 0;
  std::streampos data_start = in.tellg();
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] != '#') {
      in.clear();
      in.seekg(data_start);
      header.data_line = lineno;
      return header;
    }
    data_start = in.tellg();
    const std::string body = line.substr(line.find_first_not_of("# "));
    const auto tab = body.find('\t');
    if (tab == std::string::npos) {
      header.fields[body] = "";
    } else {
      header.fields[body.substr(0, tab)] = body.substr(tab + 1);
    }
  }
  header.data_line = lineno + 1;
  (void)path;
  return header;
}

const std::string& require(const CacheHeader& h, const std::string& key,
                           const std::filesystem::path& path) {
  auto it = h.fields.find(key);
  if (it == h.fields.end()) {
    throw Error(ErrorKind::kParse,
                path.string() + ": cache header lacks '" + key + "'");
  }
  return it->second;
}

BhpParams params_from_header(const CacheHeader& h,
                             const std::filesystem::path& path) {
  if (!h.fields.contains(kMagic)) {
    throw Error(ErrorKind::kParse, path.string() + ": not a BHP table cache");
  }
  if (require(h, "format_version", path) != std::to_string(kTableFormatVersion)) {
    throw Error(ErrorKind::kParse,
                path.string() + ": unsupported cache format version");
  }
  const int side = static_cast<int>(
      parse_double(require(h, "L", path), path, 0));
  BhpParams p = BhpParams::for_lattice(side);
  if (static_cast<int>(parse_double(require(h, "N", path), path, 0)) !=
      p.sites()) {
    throw Error(ErrorKind::kParse, path.string() + ": N does not equal L^2");
  }
  p.x_max = parse_double(require(h, "x_max", path), path, 0);
  p.grid_min = parse_double(require(h, "grid_min", path), path, 0);
  p.grid_max = parse_double(require(h, "grid_max", path), path, 0);
  p.grid_step = parse_double(require(h, "grid_step", path), path, 0);
  p.quadrature_abs_tol =
      parse_double(require(h, "quadrature_abs_tol", path), path, 0);
  return p;
}

bool same_params(const BhpParams& a, const BhpParams& b) {
  return a.lattice_side == b.lattice_side && a.x_max == b.x_max &&
         a.grid_min == b.grid_min && a.grid_max == b.grid_max &&
         a.grid_step == b.grid_step &&
         a.quadrature_abs_tol == b.quadrature_abs_tol &&
         a.eigenvalues == b.eigenvalues;
}

}  // namespace

void write_table(const BhpTable& table, const std::filesystem::path& path) {
  const BhpParams& p = table.params();
  std::ostringstream out;
  out << "# " << kMagic << '\n'
      << "# format_version\t" << kTableFormatVersion << '\n'
      << "# L\t" << p.lattice_side << '\n'
      << "# N\t" << p.sites() << '\n'
      << "# x_max\t" << format_double(p.x_max) << '\n'
      << "# grid_min\t" << format_double(p.grid_min) << '\n'
      << "# grid_max\t" << format_double(p.grid_max) << '\n'
      << "# grid_step\t" << format_double(p.grid_step) << '\n'
      << "# quadrature_abs_tol\t" << format_double(p.quadrature_abs_tol) << '\n'
      << "# normalization_factor\t"
      << format_double(table.normalization_factor()) << '\n'
      << "# columns\tmu\tpdf\tcdf\n";
  const auto pdf = table.pdf_column();
  const auto cdf = table.cdf_column();
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << format_double(table.mu(i)) << '\t' << format_double(pdf[i]) << '\t'
        << format_double(cdf[i]) << '\n';
  }

  // Write to a sibling temporary and rename, so concurrent readers never see
  // a half-written cache.
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) {
      throw Error(ErrorKind::kIo, "cannot write table cache " + path.string());
    }
    f << out.str();
    if (!f.flush()) {
      throw Error(ErrorKind::kIo, "cannot write table cache " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorKind::kIo,
                "cannot move table cache into place: " + ec.message());
  }
}

BhpTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  const CacheHeader header = read_header(in, path);
  BhpParams params = params_from_header(header, path);
  const double factor =
      parse_double(require(header, "normalization_factor", path), path, 0);

  const std::size_t n = params.grid_size();
  std::vector<double> pdf;
  std::vector<double> cdf;
  pdf.reserve(n);
  cdf.reserve(n);
  std::string line;
  std::size_t lineno = header.data_line - 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 == std::string::npos ? t1 : t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) {
      throw Error(ErrorKind::kParse, path.string() + ":" +
                                         std::to_string(lineno) +
                                         ": expected mu<TAB>pdf<TAB>cdf");
    }
    const double mu = parse_double(line.substr(0, t1), path, lineno);
    if (std::abs(mu - params.grid_point(pdf.size())) > 1e-9) {
      throw Error(ErrorKind::kParse, path.string() + ":" +
                                         std::to_string(lineno) +
                                         ": grid point out of sequence");
    }
    pdf.push_back(parse_double(line.substr(t1 + 1, t2 - t1 - 1), path, lineno));
    cdf.push_back(parse_double(line.substr(t2 + 1), path, lineno));
  }
  if (pdf.size() != n) {
    throw Error(ErrorKind::kParse,
                path.string() + ": expected " + std::to_string(n) +
                    " rows, found " + std::to_string(pdf.size()));
  }
  return BhpTable(std::move(params), std::move(pdf), std::move(cdf), factor);
}

bool cache_matches(const std::filesystem::path& path, const BhpParams& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  try {
    return same_params(params_from_header(read_header(in, path), path), params);
  } catch (const Error&) {
    return false;
  }
}

CachedTable load_or_build_table(const std::filesystem::path& path,
                                const BhpParams& params, unsigned workers) {
  params.validate();
  if (cache_matches(path, params)) {
    try {
      return {read_table(path), false};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kParse) throw;
      // Corrupt body with a valid header: fall through and rebuild.
    }
  }
  BhpTable table = build_table(params, workers);
  write_table(table, path);
  return {std::move(table), true};
}

}  // namespace unifluct
