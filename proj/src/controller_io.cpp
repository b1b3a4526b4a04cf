#include "drro/controller_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "drro/errors.hpp"

namespace drro {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "drro-controller";
constexpr int kVersion = 1;

json parse_or_fail(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kParseError, e.what());
  }
}

std::uint64_t hex_to_hash(const std::string& s) {
  if (s.empty() || s.size() > 16) fail(ErrorKind::kParseError, "bad plant_hash '" + s + "'");
  std::uint64_t h = 0;
  for (char c : s) {
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else fail(ErrorKind::kParseError, "bad plant_hash '" + s + "'");
    h = (h << 4) | static_cast<std::uint64_t>(v);
  }
  return h;
}

}  // namespace

std::string hash_to_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string controller_to_json(const ControllerCache& cache) {
  const GridSamples& K = cache.controller.K;
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["plant_hash"] = hash_to_hex(cache.plant_hash);
  j["k"] = K.grid().exponent();
  j["rows"] = K.rows();
  j["cols"] = K.cols();
  j["provenance"] = to_string(cache.controller.provenance);
  j["gamma"] = cache.controller.gamma_used ? json(*cache.controller.gamma_used) : json(nullptr);
  j["r"] = cache.controller.radius ? json(*cache.controller.radius) : json(nullptr);
  std::vector<double> re, im;
  re.reserve(K.size() * K.rows() * K.cols());
  im.reserve(re.capacity());
  for (std::size_t i = 0; i < K.size(); ++i) {
    for (int r = 0; r < K.rows(); ++r) {
      for (int c = 0; c < K.cols(); ++c) {
        const Complex v = K[i](r, c);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
          fail(ErrorKind::kNonFiniteSample, "cannot cache a non-finite controller sample");
        }
        re.push_back(v.real());
        im.push_back(v.imag());
      }
    }
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j.dump() + "\n";
}

bool is_controller_cache(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  return j.is_object() && j.contains("format") && j["format"] == kFormat;
}

ControllerCache controller_from_json(const std::string& text) {
  const json j = parse_or_fail(text);
  try {
    if (!j.is_object() || j.value("format", "") != kFormat) {
      fail(ErrorKind::kParseError, "not a controller cache");
    }
    if (j.at("version").get<int>() != kVersion) {
      fail(ErrorKind::kParseError, "unsupported controller cache version");
    }
    ControllerCache out;
    out.plant_hash = hex_to_hash(j.at("plant_hash").get<std::string>());
    const int k = j.at("k").get<int>();
    if (k < FrequencyGrid::kMinExponent || k > FrequencyGrid::kMaxExponent) {
      fail(ErrorKind::kParseError, "grid exponent out of range");
    }
    const FrequencyGrid grid(k);
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (rows < 1 || cols < 1 || re.size() != grid.size() * rows * cols || im.size() != re.size()) {
      fail(ErrorKind::kGridMismatch, "controller sample count does not match its grid");
    }
    GridSamples K(grid, rows, cols);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c, ++idx) K[i](r, c) = Complex(re[idx], im[idx]);
      }
    }
    out.controller.K = std::move(K);
    out.controller.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    if (!j.at("gamma").is_null()) out.controller.gamma_used = j["gamma"].get<double>();
    if (!j.at("r").is_null()) out.controller.radius = j["r"].get<double>();
    return out;
  } catch (const json::exception& e) {
    fail(ErrorKind::kParseError, std::string("controller cache: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp =
      path.string() + ".tmp." + std::to_string(static_cast<long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kInvalidArgument, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) fail(ErrorKind::kInvalidArgument, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    fail(ErrorKind::kInvalidArgument, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

void save_controller(const std::filesystem::path& path, const ControllerCache& cache) {
  write_file_atomic(path, controller_to_json(cache));
}

ControllerCache load_controller(const std::filesystem::path& path) {
  return controller_from_json(read_file(path));
}

}  // namespace drro
