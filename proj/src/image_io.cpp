#include "forecast/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "forecast/errors.hpp"

namespace forecast {

namespace {

std::uint8_t to_byte(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::string& s, std::size_t& pos) {
  while (pos < s.size()) {
    if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  return s.substr(start, pos - start);
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string());
}

std::string encode_pnm(const ByteImage& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw ContractViolation("PNM images have 1 or 3 channels");
  }
  std::string out = image.channels == 1 ? "P5\n" : "P6\n";
  out += std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.data.data()), image.data.size());
  return out;
}

ByteImage decode_pnm(const std::string& bytes) {
  std::size_t pos = 0;
  const std::string magic = next_token(bytes, pos);
  ByteImage img;
  if (magic == "P5") {
    img.channels = 1;
  } else if (magic == "P6") {
    img.channels = 3;
  } else {
    throw IoError("unsupported PNM magic '" + magic + "'");
  }
  try {
    img.width = std::stoul(next_token(bytes, pos));
    img.height = std::stoul(next_token(bytes, pos));
    const unsigned long maxval = std::stoul(next_token(bytes, pos));
    if (maxval != 255) throw IoError("only maxval 255 is supported");
  } catch (const std::logic_error&) {
    throw IoError("malformed PNM header");
  }
  ++pos;  // single whitespace byte after maxval
  const std::size_t n = img.width * img.height * img.channels;
  if (bytes.size() < pos + n) throw IoError("truncated PNM payload");
  img.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                  bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return img;
}

ByteImage read_pnm(const std::filesystem::path& path) { return decode_pnm(read_file(path)); }

Image read_ppm(const std::filesystem::path& path) {
  const ByteImage raw = read_pnm(path);
  if (raw.channels != 3) throw IoError(path.string() + " is not a P6 image");
  Image img(raw.width, raw.height, 3);
  for (std::size_t i = 0; i < raw.data.size(); ++i) img.data[i] = raw.data[i] / 255.0;
  return img;
}

std::string encode_ppm(const Image& image) {
  ByteImage raw;
  raw.width = image.width;
  raw.height = image.height;
  raw.channels = 3;
  raw.data.resize(image.width * image.height * 3);
  for (std::size_t p = 0; p < image.width * image.height; ++p) {
    for (std::size_t ch = 0; ch < 3; ++ch) {
      const std::size_t src = image.channels == 1 ? 0 : ch;
      raw.data[p * 3 + ch] = to_byte(image.data[p * image.channels + src]);
    }
  }
  return encode_pnm(raw);
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  write_file_atomic(path, encode_ppm(image));
}

}  // namespace forecast
