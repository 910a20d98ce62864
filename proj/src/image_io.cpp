#include "dcm/image_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dcm/errors.hpp"

namespace dcm {

namespace {

static_assert(std::endian::native == std::endian::little,
              "float serialization assumes a little-endian host");

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError("unexpected end of header", start);
    return bytes_.substr(start, pos_ - start);
  }

  long integer(long lo, long hi, const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    const std::string t = token();
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (*end != '\0' || v < lo || v > hi) {
      throw ParseError(std::string("bad ") + what + " '" + t + "'", start);
    }
    return v;
  }

  double real(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    const std::string t = token();
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (*end != '\0' || !std::isfinite(v)) {
      throw ParseError(std::string("bad ") + what + " '" + t + "'", start);
    }
    return v;
  }

  /// Exactly one whitespace byte separates the header from the raster.
  void end_of_header() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw ParseError("missing whitespace after header", pos_);
    }
    ++pos_;
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

constexpr long kMaxSide = 1 << 15;

void append_float(std::string& out, float v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

float load_float(const std::string& bytes, std::size_t pos) {
  float v;
  std::memcpy(&v, bytes.data() + pos, 4);
  return v;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error while writing '" + path + "'");
}

Image parse_pnm(const std::string& bytes) {
  HeaderReader h(bytes);
  const std::string magic = h.token();
  int channels;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw ParseError("expected P5 or P6 magic, got '" + magic + "'", 0);
  }
  const int width = static_cast<int>(h.integer(1, kMaxSide, "width"));
  const int height = static_cast<int>(h.integer(1, kMaxSide, "height"));
  const long maxval = h.integer(1, 65535, "maxval");
  h.end_of_header();
  const std::size_t sample = maxval > 255 ? 2 : 1;
  const std::size_t n = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - h.pos() < n * sample) throw ParseError("truncated raster", bytes.size());
  Image img(width, height, channels);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + h.pos());
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned v = sample == 2 ? (p[2 * i] << 8) | p[2 * i + 1] : p[i];
    if (v > static_cast<unsigned>(maxval)) {
      throw ParseError("sample exceeds maxval", h.pos() + i * sample);
    }
    img.data[i] = static_cast<float>(static_cast<double>(v) / maxval);
  }
  return img;
}

Image read_image(const std::string& path) {
  const std::string bytes = read_file(path);
  try {
    return parse_pnm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.offset());
  }
}

std::string encode_pnm(const Image& image) {
  if (image.channels != 1 && image.channels != 3) throw ArgumentError("PNM needs 1 or 3 channels");
  std::string out = (image.channels == 1 ? "P5\n" : "P6\n") + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  for (float v : image.data) {
    const double c = std::isfinite(v) ? std::clamp(static_cast<double>(v), 0.0, 1.0) : 0.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  return out;
}

void write_pnm(const std::string& path, const Image& image) { write_file(path, encode_pnm(image)); }

std::string encode_pfm(const Image& field) {
  if (field.channels != 1 && field.channels != 3) throw ArgumentError("PFM needs 1 or 3 channels");
  std::string out = (field.channels == 1 ? "Pf\n" : "PF\n") + std::to_string(field.width) + " " +
                    std::to_string(field.height) + "\n-1.0\n";
  out.reserve(out.size() + field.data.size() * 4);
  for (int y = field.height - 1; y >= 0; --y) {
    for (int x = 0; x < field.width; ++x) {
      for (int c = 0; c < field.channels; ++c) append_float(out, field.at(x, y, c));
    }
  }
  return out;
}

void write_pfm(const std::string& path, const Image& field) { write_file(path, encode_pfm(field)); }

Image parse_pfm(const std::string& bytes) {
  HeaderReader h(bytes);
  const std::string magic = h.token();
  int channels;
  if (magic == "Pf") {
    channels = 1;
  } else if (magic == "PF") {
    channels = 3;
  } else {
    throw ParseError("expected Pf or PF magic, got '" + magic + "'", 0);
  }
  const int width = static_cast<int>(h.integer(1, kMaxSide, "width"));
  const int height = static_cast<int>(h.integer(1, kMaxSide, "height"));
  const std::size_t scale_pos = h.pos();
  const double scale = h.real("scale");
  if (scale >= 0.0) throw ParseError("big-endian PFM is not supported", scale_pos);
  h.end_of_header();
  Image img(width, height, channels);
  if (bytes.size() - h.pos() < img.data.size() * 4) {
    throw ParseError("truncated raster", bytes.size());
  }
  std::size_t pos = h.pos();
  for (int y = height - 1; y >= 0; --y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c, pos += 4) img.at(x, y, c) = load_float(bytes, pos);
    }
  }
  return img;
}

Image read_pfm(const std::string& path) { return parse_pfm(read_file(path)); }

std::string encode_flo(const Image& flow) {
  if (flow.channels != 2) throw ArgumentError(".flo needs two channels");
  std::string out = "PIEH";
  const std::int32_t dims[2] = {flow.width, flow.height};
  out.append(reinterpret_cast<const char*>(dims), 8);
  for (float v : flow.data) append_float(out, v);
  return out;
}

void write_flo(const std::string& path, const Image& flow) { write_file(path, encode_flo(flow)); }

Image read_flo(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 12 || bytes.compare(0, 4, "PIEH") != 0) {
    throw ParseError(path + ": missing PIEH tag", 0);
  }
  std::int32_t dims[2];
  std::memcpy(dims, bytes.data() + 4, 8);
  if (dims[0] <= 0 || dims[1] <= 0 || dims[0] > kMaxSide || dims[1] > kMaxSide) {
    throw ParseError(path + ": bad dimensions", 4);
  }
  Image flow(dims[0], dims[1], 2);
  if (bytes.size() - 12 < flow.data.size() * 4) throw ParseError(path + ": truncated", bytes.size());
  for (std::size_t i = 0; i < flow.data.size(); ++i) flow.data[i] = load_float(bytes, 12 + 4 * i);
  return flow;
}

Image colorize_disparity(const Image& disparity, double lo, double hi) {
  Image out(disparity.width, disparity.height, 3);
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < disparity.num_pixels(); ++i) {
    const float d = disparity.data[i * disparity.channels];
    const float g = std::isfinite(d) ? static_cast<float>(std::clamp((d - lo) / span, 0.0, 1.0)) : 0.0f;
    for (int c = 0; c < 3; ++c) out.data[3 * i + c] = g;
  }
  return out;
}

namespace {

// Middlebury color wheel: RY 15, YG 6, GC 4, CB 11, BM 13, MR 6.
std::vector<std::array<double, 3>> color_wheel() {
  std::vector<std::array<double, 3>> w;
  auto ramp = [&](int n, auto fn) {
    for (int i = 0; i < n; ++i) w.push_back(fn(static_cast<double>(i) / n));
  };
  ramp(15, [](double t) { return std::array<double, 3>{1, t, 0}; });
  ramp(6, [](double t) { return std::array<double, 3>{1 - t, 1, 0}; });
  ramp(4, [](double t) { return std::array<double, 3>{0, 1, t}; });
  ramp(11, [](double t) { return std::array<double, 3>{0, 1 - t, 1}; });
  ramp(13, [](double t) { return std::array<double, 3>{t, 0, 1}; });
  ramp(6, [](double t) { return std::array<double, 3>{1, 0, 1 - t}; });
  return w;
}

}  // namespace

Image colorize_flow(const Image& flow, double max_magnitude) {
  if (flow.channels != 2) throw ArgumentError("flow colorization needs two channels");
  static const auto wheel = color_wheel();
  const int ncols = static_cast<int>(wheel.size());
  double rad_max = max_magnitude;
  if (rad_max <= 0.0) {
    for (std::size_t i = 0; i < flow.num_pixels(); ++i) {
      const double a = flow.data[2 * i], b = flow.data[2 * i + 1];
      if (std::isfinite(a) && std::isfinite(b)) rad_max = std::max(rad_max, std::hypot(a, b));
    }
  }
  if (rad_max <= 0.0) rad_max = 1.0;
  Image out(flow.width, flow.height, 3);
  for (std::size_t i = 0; i < flow.num_pixels(); ++i) {
    const double a = flow.data[2 * i], b = flow.data[2 * i + 1];
    if (!std::isfinite(a) || !std::isfinite(b)) continue;  // black
    const double u = a / rad_max, v = b / rad_max;
    const double rad = std::hypot(u, v);
    const double angle = std::atan2(-v, -u) / std::numbers::pi;
    const double fk = (angle + 1.0) / 2.0 * (ncols - 1);
    const int k0 = static_cast<int>(std::floor(fk)) % ncols;
    const int k1 = (k0 + 1) % ncols;
    const double f = fk - std::floor(fk);
    for (int c = 0; c < 3; ++c) {
      double col = (1 - f) * wheel[k0][c] + f * wheel[k1][c];
      col = rad <= 1.0 ? 1.0 - rad * (1.0 - col) : col * 0.75;
      out.data[3 * i + c] = static_cast<float>(col);
    }
  }
  return out;
}

}  // namespace dcm
