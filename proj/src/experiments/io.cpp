#include "stochograd/experiments/runner.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace stochograd {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << "schema=1\n" << kCsvHeader << "\n";
  for (const MetricsRow& r : rows) {
    out << r.experiment << ',' << r.algorithm << ',' << r.seed << ',' << r.k << ',' << format_double(r.data_passes)
        << ',' << opt(r.seconds) << ',' << format_double(r.objective) << ',' << opt(r.subopt) << ','
        << opt(r.rel_dist) << '\n';
  }
}

void write_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(out, rows);
}

void write_pgm(const std::string& path, const DenseVector& image) {
  const Shape& s = image.shape();
  if (!s.is_image() || s.channels != 1) throw ShapeError("write_pgm needs a single-channel image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "P5\n" << s.cols << ' ' << s.rows << "\n65535\n";
  const double lo = image.values().minCoeff(), hi = image.values().maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  for (Index i = 0; i < image.size(); ++i) {
    const double t = std::clamp((image[i] - lo) / span, 0.0, 1.0);
    const auto q = static_cast<unsigned>(std::lround(t * 65535.0));
    const char bytes[2] = {static_cast<char>((q >> 8) & 0xff), static_cast<char>(q & 0xff)};
    out.write(bytes, 2);
  }
}

void write_raw(const std::string& path, const DenseVector& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (Index i = 0; i < x.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(x[i]);
    char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    out.write(bytes, 8);
  }
  const Shape& s = x.shape();
  nlohmann::json shape = s.is_image() ? nlohmann::json::array({s.rows, s.cols}) : nlohmann::json::array({s.size()});
  if (s.is_image() && s.channels > 1) shape = nlohmann::json::array({s.channels, s.rows, s.cols});
  write_json(path + ".json", {{"shape", shape}, {"dtype", "float64"}, {"endian", "little"}});
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

unsigned worker_count(unsigned requested) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (const char* env = std::getenv("STOCHOGRAD_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

}  // namespace stochograd
