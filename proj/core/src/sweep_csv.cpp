#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "format_util.hpp"
#include "magnonfit/sweep_io.hpp"
#include "magnonfit/units.hpp"

namespace magnonfit {

namespace {

using detail::format_double;
using detail::parse_double;

/// Hz text whose conversion back to rad/s reproduces omega exactly, when one
/// exists within a few ulps of omega/2π.
double canonical_hz(double omega) {
  const double f0 = angular_to_hz(omega);
  if (hz_to_angular(f0) == omega) return f0;
  double up = f0, down = f0;
  for (int k = 0; k < 4; ++k) {
    up = std::nextafter(up, INFINITY);
    down = std::nextafter(down, -INFINITY);
    if (hz_to_angular(up) == omega) return up;
    if (hz_to_angular(down) == omega) return down;
  }
  return f0;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

/// Reads a field-major table; returns fields, freqs and the value columns per cell.
struct Table {
  std::vector<double> fields;
  std::vector<double> freqs;
  std::vector<std::vector<double>> values;
};

Table read_table(std::istream& in, const std::string& expected_header, std::size_t n_values) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("sweep csv: empty input");
  if (strip_cr(line) != expected_header) {
    throw std::invalid_argument("sweep csv: expected header '" + expected_header + "', got '" + strip_cr(line) + "'");
  }
  std::vector<double> bs, fs;
  std::vector<std::vector<double>> vals_all;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cols = split(line);
    if (cols.size() != 2 + n_values) {
      throw std::invalid_argument("sweep csv: line " + std::to_string(line_no) + " has " +
                                  std::to_string(cols.size()) + " columns");
    }
    std::vector<double> vals(n_values);
    try {
      bs.push_back(parse_double(cols[0]));
      fs.push_back(hz_to_angular(parse_double(cols[1])));
      for (std::size_t k = 0; k < n_values; ++k) vals[k] = parse_double(cols[2 + k]);
    } catch (const std::exception& e) {
      throw std::invalid_argument("sweep csv: line " + std::to_string(line_no) + ": " + e.what());
    }
    vals_all.push_back(std::move(vals));
  }
  if (bs.empty()) throw std::invalid_argument("sweep csv: no data rows");

  Table t;
  std::size_t nf = 0;
  while (nf < bs.size() && bs[nf] == bs[0]) ++nf;
  t.freqs.assign(fs.begin(), fs.begin() + static_cast<std::ptrdiff_t>(nf));
  if (bs.size() % nf != 0) throw std::invalid_argument("sweep csv: grid is not rectangular");
  for (std::size_t k = 0; k < bs.size(); ++k) {
    if (k % nf == 0) t.fields.push_back(bs[k]);
    if (bs[k] != t.fields.back() || fs[k] != t.freqs[k % nf]) {
      throw std::invalid_argument("sweep csv: data row " + std::to_string(k + 1) +
                                  " breaks the field-major rectangular grid");
    }
  }
  t.values = std::move(vals_all);
  return t;
}

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepMap& sweep) {
  out << "field_t,freq_hz,re,im\n";
  std::vector<std::string> hz(sweep.n_freqs());
  for (std::size_t j = 0; j < hz.size(); ++j) hz[j] = format_double(canonical_hz(sweep.freqs()[j]));
  for (std::size_t i = 0; i < sweep.n_fields(); ++i) {
    const std::string b = format_double(sweep.fields()[i]);
    for (std::size_t j = 0; j < sweep.n_freqs(); ++j) {
      const auto v = sweep.at(i, j);
      out << b << ',' << hz[j] << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
    }
  }
}

SweepMap read_sweep_csv(std::istream& in) {
  Table t = read_table(in, "field_t,freq_hz,re,im", 2);
  std::vector<std::complex<double>> s(t.values.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = {t.values[k][0], t.values[k][1]};
  return SweepMap(std::move(t.fields), std::move(t.freqs), std::move(s));
}

void write_db_csv(std::ostream& out, const DbMap& map) {
  if (map.db.size() != map.fields.size() * map.freqs.size()) throw std::invalid_argument("write_db_csv: ragged map");
  out << "field_t,freq_hz,s21_db\n";
  std::vector<std::string> hz(map.freqs.size());
  for (std::size_t j = 0; j < hz.size(); ++j) hz[j] = format_double(canonical_hz(map.freqs[j]));
  for (std::size_t i = 0; i < map.fields.size(); ++i) {
    const std::string b = format_double(map.fields[i]);
    for (std::size_t j = 0; j < map.freqs.size(); ++j) {
      out << b << ',' << hz[j] << ',' << format_double(map.at(i, j)) << '\n';
    }
  }
}

DbMap read_db_csv(std::istream& in) {
  Table t = read_table(in, "field_t,freq_hz,s21_db", 1);
  DbMap m;
  m.fields = std::move(t.fields);
  m.freqs = std::move(t.freqs);
  m.db.reserve(t.values.size());
  for (const auto& v : t.values) m.db.push_back(v[0]);
  return m;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta.json");
  return p;
}

void save_sweep(const std::filesystem::path& csv, const SweepMap& sweep) {
  std::ofstream out(csv);
  if (!out) throw std::runtime_error("cannot open " + csv.string() + " for writing");
  write_sweep_csv(out, sweep);
  std::ofstream meta(sidecar_path(csv));
  if (!meta) throw std::runtime_error("cannot open " + sidecar_path(csv).string() + " for writing");
  meta << sweep.meta().dump(2) << '\n';
}

SweepMap load_sweep(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot open sweep file " + csv.string());
  SweepMap s = read_sweep_csv(in);
  const auto side = sidecar_path(csv);
  if (std::filesystem::exists(side)) {
    std::ifstream m(side);
    nlohmann::json meta;
    try {
      m >> meta;
    } catch (const std::exception& e) {
      throw std::runtime_error("malformed sidecar " + side.string() + ": " + e.what());
    }
    s.meta() = meta.is_object() ? meta : nlohmann::json::object();
  }
  return s;
}

std::vector<BackgroundSegment> background_segments_from_meta(const nlohmann::json& meta) {
  std::vector<BackgroundSegment> out;
  if (!meta.contains("background_segments")) return out;
  for (const auto& s : meta.at("background_segments")) {
    out.push_back({s.at("omega_lo").get<double>(), s.at("omega_hi").get<double>(),
                   s.at("reference_field_t").get<double>()});
  }
  return out;
}

nlohmann::json background_segments_to_json(std::span<const BackgroundSegment> segments) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : segments) {
    arr.push_back({{"omega_lo", s.omega_lo},
                   {"omega_hi", s.omega_hi},
                   {"reference_field_t", s.reference_field},
                   {"freq_lo_ghz", angular_to_ghz(s.omega_lo)},
                   {"freq_hi_ghz", angular_to_ghz(s.omega_hi)}});
  }
  return arr;
}

}  // namespace magnonfit
