#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "snls/field.hpp"
#include "snls/fit.hpp"

namespace snls {

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; big-endian hosts unsupported");

namespace io {

inline constexpr char kFieldMagic[8] = {'S', 'N', 'L', 'S',
                                        'F', 'L', 'D', '1'};

// Flat binary field format:
//   8 bytes magic "SNLSFLD1"
//   u32 d, u32 N, f64 L, u8 representation tag (0 physical, 1 frequency)
//   N^d * (f32 re, f32 im), row-major, little-endian.
inline void write_field(const std::filesystem::path& path,
                        const SpectralField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open for write: " + path.string());
  out.write(kFieldMagic, sizeof(kFieldMagic));
  const std::uint32_t d = f.grid().d;
  const std::uint32_t N = f.grid().N;
  const double L = f.grid().L;
  const std::uint8_t rep = static_cast<std::uint8_t>(f.representation());
  out.write(reinterpret_cast<const char*>(&d), sizeof(d));
  out.write(reinterpret_cast<const char*>(&N), sizeof(N));
  out.write(reinterpret_cast<const char*>(&L), sizeof(L));
  out.write(reinterpret_cast<const char*>(&rep), sizeof(rep));
  std::vector<float> buf(2 * f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    buf[2 * i] = static_cast<float>(f[i].real());
    buf[2 * i + 1] = static_cast<float>(f[i].imag());
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw config_error("write failed: " + path.string());
}

inline SpectralField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open for read: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kFieldMagic, sizeof(magic)) != 0)
    throw config_error("not a field file: " + path.string());
  std::uint32_t d = 0, N = 0;
  double L = 0.0;
  std::uint8_t rep = 0;
  in.read(reinterpret_cast<char*>(&d), sizeof(d));
  in.read(reinterpret_cast<char*>(&N), sizeof(N));
  in.read(reinterpret_cast<char*>(&L), sizeof(L));
  in.read(reinterpret_cast<char*>(&rep), sizeof(rep));
  if (!in || rep > 1) throw config_error("corrupt field header: " + path.string());
  GridSpec grid(static_cast<int>(d), L, static_cast<int>(N));
  std::vector<float> buf(2 * grid.size());
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!in) throw config_error("truncated field file: " + path.string());
  std::vector<cdouble> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = cdouble(buf[2 * i], buf[2 * i + 1]);
  return SpectralField(grid, static_cast<Representation>(rep),
                       std::move(values));
}

// CSV export (index, re, im); intended for small grids.
inline void write_field_csv(const std::filesystem::path& path,
                            const SpectralField& f) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for write: " + path.string());
  out << "index,re,im\n";
  char line[96];
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g\n", i, f[i].real(),
                  f[i].imag());
    out << line;
  }
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// One CSV with a header row; every cell is preformatted text.
inline void write_csv(const std::filesystem::path& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for write: " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
}

inline void write_json(const std::filesystem::path& path,
                       const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for write: " + path.string());
  out << j.dump(2) << "\n";
}

inline nlohmann::json fit_to_json(const FitReport& fit) {
  nlohmann::json j{{"exponent_hat", fit.exponent_hat},
                   {"intercept", fit.intercept},
                   {"r_squared", fit.r_squared},
                   {"n_points", fit.n_points},
                   {"ci_lo", fit.ci_95.lo},
                   {"ci_hi", fit.ci_95.hi}};
  if (fit.exponent_predicted) j["exponent_predicted"] = *fit.exponent_predicted;
  for (const auto& [k, v] : fit.metadata) j["metadata"][k] = v;
  return j;
}

// FNV-1a 64-bit of a file's bytes; used for the artifact hashes in run
// manifests.
inline std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot hash missing file: " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

// Run manifest: resolved configuration + master seed + artifact hashes.
// Deliberately no timestamps: reruns with the same seed must be
// byte-identical.
inline void write_run_manifest(const std::filesystem::path& dir,
                               const nlohmann::json& resolved_config,
                               std::uint64_t master_seed,
                               const std::vector<std::string>& artifacts) {
  nlohmann::json j;
  j["config"] = resolved_config;
  j["master_seed"] = master_seed;
  j["artifacts"] = nlohmann::json::array();
  for (const auto& a : artifacts)
    j["artifacts"].push_back(
        {{"path", a}, {"fnv1a64", hex64(fnv1a64_file(dir / a))}});
  write_json(dir / "manifest.json", j);
}

// Minimal standalone log-log SVG plot: data points plus an optional fitted
// power law.
inline void write_loglog_svg(const std::filesystem::path& path,
                             const std::vector<double>& xs,
                             const std::vector<double>& ys,
                             const FitReport* fit, const std::string& title,
                             const std::string& xlabel,
                             const std::string& ylabel) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw config_error("write_loglog_svg: need matching xs/ys, >= 2 points");
  const int W = 640, H = 480, ML = 70, MR = 20, MT = 40, MB = 50;
  const double huge = std::numeric_limits<double>::infinity();
  double lx0 = huge, lx1 = -huge, ly0 = huge, ly1 = -huge;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw config_error("write_loglog_svg: data must be positive");
    lx0 = std::min(lx0, std::log10(xs[i]));
    lx1 = std::max(lx1, std::log10(xs[i]));
    ly0 = std::min(ly0, std::log10(ys[i]));
    ly1 = std::max(ly1, std::log10(ys[i]));
  }
  if (lx1 - lx0 < 1e-12) lx1 = lx0 + 1.0;
  if (ly1 - ly0 < 1e-12) ly1 = ly0 + 1.0;
  const double padx = 0.05 * (lx1 - lx0), pady = 0.08 * (ly1 - ly0);
  lx0 -= padx; lx1 += padx; ly0 -= pady; ly1 += pady;
  auto X = [&](double x) {
    return ML + (std::log10(x) - lx0) / (lx1 - lx0) * (W - ML - MR);
  };
  auto Y = [&](double y) {
    return H - MB - (std::log10(y) - ly0) / (ly1 - ly0) * (H - MT - MB);
  };
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for write: " + path.string());
  char buf[256];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes box
  std::snprintf(buf, sizeof(buf),
                "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" "
                "fill=\"none\" stroke=\"black\"/>\n",
                ML, MT, W - ML - MR, H - MT - MB);
  out << buf;
  // decade ticks
  for (int e = static_cast<int>(std::ceil(lx0)); e <= std::floor(lx1); ++e) {
    const double px = ML + (e - lx0) / (lx1 - lx0) * (W - ML - MR);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%d\" x2=\"%.1f\" y2=\"%d\" "
                  "stroke=\"#cccccc\"/>\n<text x=\"%.1f\" y=\"%d\" "
                  "font-size=\"11\" text-anchor=\"middle\">1e%d</text>\n",
                  px, MT, px, H - MB, px, H - MB + 16, e);
    out << buf;
  }
  for (int e = static_cast<int>(std::ceil(ly0)); e <= std::floor(ly1); ++e) {
    const double py = H - MB - (e - ly0) / (ly1 - ly0) * (H - MT - MB);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" "
                  "stroke=\"#cccccc\"/>\n<text x=\"%d\" y=\"%.1f\" "
                  "font-size=\"11\" text-anchor=\"end\">1e%d</text>\n",
                  ML, py, W - MR, py, ML - 5, py + 4, e);
    out << buf;
  }
  // fitted line across the x-range
  if (fit) {
    const double xa = std::pow(10.0, lx0 + padx), xb = std::pow(10.0, lx1 - padx);
    const double ya = std::exp(fit->intercept) * std::pow(xa, fit->exponent_hat);
    const double yb = std::exp(fit->intercept) * std::pow(xb, fit->exponent_hat);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                  "stroke=\"#d62728\" stroke-width=\"1.5\"/>\n",
                  X(xa), Y(ya), X(xb), Y(yb));
    out << buf;
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::snprintf(buf, sizeof(buf),
                  "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" "
                  "fill=\"#1f77b4\"/>\n",
                  X(xs[i]), Y(ys[i]));
    out << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-size=\"14\">%s</text>\n"
                "<text x=\"%d\" y=\"%d\" font-size=\"12\" "
                "text-anchor=\"middle\">%s</text>\n",
                ML, MT - 12, title.c_str(), ML + (W - ML - MR) / 2, H - 10,
                xlabel.c_str());
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"14\" y=\"%d\" font-size=\"12\" "
                "transform=\"rotate(-90 14 %d)\" text-anchor=\"middle\">"
                "%s</text>\n",
                MT + (H - MT - MB) / 2, MT + (H - MT - MB) / 2,
                ylabel.c_str());
  out << buf << "</svg>\n";
}

}  // namespace io
}  // namespace snls
