#include "stereoguide/io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cerrno>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace stereoguide {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw std::runtime_error("cannot open '" + path + "': " + std::strerror(errno));
  }
  return f;
}

std::vector<unsigned char> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "': " + std::strerror(errno));
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

// Whitespace-delimited token scanner over a byte buffer; '#' starts a
// comment running to end of line (PGM allows them mid-header).
class TokenCursor {
 public:
  TokenCursor(const std::vector<unsigned char>& bytes, const std::string& path,
              bool comments)
      : bytes_(bytes), path_(path), comments_(comments) {}

  std::size_t offset() const { return off_; }

  void skip_separators() {
    while (off_ < bytes_.size()) {
      if (is_space(bytes_[off_])) {
        ++off_;
      } else if (comments_ && bytes_[off_] == '#') {
        while (off_ < bytes_.size() && bytes_[off_] != '\n') ++off_;
      } else {
        break;
      }
    }
  }

  // Next token and the offset it started at.
  std::pair<std::string, std::size_t> token(const char* what) {
    skip_separators();
    if (off_ >= bytes_.size()) {
      throw FormatError(path_, bytes_.size(),
                        std::string("unexpected end of header, wanted ") + what);
    }
    const std::size_t start = off_;
    std::string out;
    while (off_ < bytes_.size() && !is_space(bytes_[off_]) &&
           !(comments_ && bytes_[off_] == '#')) {
      out.push_back(static_cast<char>(bytes_[off_]));
      ++off_;
    }
    return {out, start};
  }

  int int_token(const char* what, int min_value) {
    auto [text, start] = token(what);
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != text.size() || v < min_value || v > 1 << 24) {
      throw FormatError(path_, start,
                        std::string("bad ") + what + " '" + text + "'");
    }
    return static_cast<int>(v);
  }

  double real_token(const char* what) {
    auto [text, start] = token(what);
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != text.size()) {
      throw FormatError(path_, start,
                        std::string("bad ") + what + " '" + text + "'");
    }
    return v;
  }

  // The single whitespace byte that separates header from payload.
  void expect_one_separator() {
    if (off_ >= bytes_.size() || !is_space(bytes_[off_])) {
      throw FormatError(path_, off_, "missing separator before payload");
    }
    ++off_;
  }

 private:
  const std::vector<unsigned char>& bytes_;
  std::string path_;
  bool comments_;
  std::size_t off_ = 0;
};

float float_from_bytes(const unsigned char* b, bool little_endian) {
  std::uint32_t u;
  if (little_endian) {
    u = static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
        static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
  } else {
    u = static_cast<std::uint32_t>(b[3]) | static_cast<std::uint32_t>(b[2]) << 8 |
        static_cast<std::uint32_t>(b[1]) << 16 | static_cast<std::uint32_t>(b[0]) << 24;
  }
  return std::bit_cast<float>(u);
}

constexpr std::size_t kPngSigBytes = 8;
// Byte position of the bit-depth field inside IHDR, for header diagnostics.
constexpr std::size_t kPngBitDepthOffset = 24;

bool has_png_signature(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "': " + std::strerror(errno));
  }
  unsigned char sig[kPngSigBytes] = {};
  in.read(reinterpret_cast<char*>(sig), kPngSigBytes);
  return in.gcount() == kPngSigBytes && png_sig_cmp(sig, 0, kPngSigBytes) == 0;
}

struct PngRaster {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int channels = 0;
  std::vector<unsigned char> bytes;  // rows top to bottom, tightly packed
};

// Decodes a PNG. 16-bit data stays big-endian two-byte samples. When
// normalize_to_8bit is set, palette/low-depth/alpha inputs are expanded
// and stripped down to 8-bit gray or RGB.
PngRaster decode_png(const std::string& path, bool normalize_to_8bit) {
  FilePtr file = open_file(path, "rb");
  unsigned char sig[kPngSigBytes] = {};
  if (std::fread(sig, 1, kPngSigBytes, file.get()) != kPngSigBytes ||
      png_sig_cmp(sig, 0, kPngSigBytes) != 0) {
    throw FormatError(path, 0, "not a PNG file");
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("libpng allocation failure");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("libpng allocation failure");
  }

  PngRaster raster;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path, 0, "PNG decode failure");
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, kPngSigBytes);
  png_read_info(png, info);

  raster.width = static_cast<int>(png_get_image_width(png, info));
  raster.height = static_cast<int>(png_get_image_height(png, info));
  raster.bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (normalize_to_8bit) {
    if (raster.bit_depth == 16) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw FormatError(path, kPngBitDepthOffset, "unsupported bit depth 16");
    }
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && raster.bit_depth < 8) {
      png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    raster.bit_depth = png_get_bit_depth(png, info);
  }

  raster.channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raster.bytes.resize(rowbytes * static_cast<std::size_t>(raster.height));
  rows.resize(static_cast<std::size_t>(raster.height));
  for (int y = 0; y < raster.height; ++y) {
    rows[static_cast<std::size_t>(y)] = raster.bytes.data() + rowbytes * y;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return raster;
}

void encode_png_rgb8(const std::string& path, int width, int height,
                     const std::vector<unsigned char>& rgb) {
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("libpng allocation failure");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng allocation failure");
  }

  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("PNG encode failure for '" + path + "'");
  }

  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t rowbytes = static_cast<std::size_t>(width) * 3;
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(rgb.data() + rowbytes * y);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageGrid gray_from_raster(const PngRaster& raster, const std::string& path) {
  if (raster.channels != 1 && raster.channels != 3) {
    throw FormatError(path, kPngBitDepthOffset, "expected grayscale or RGB pixels");
  }
  std::vector<float> data(static_cast<std::size_t>(raster.width) * raster.height);
  const std::size_t rowbytes =
      static_cast<std::size_t>(raster.width) * raster.channels;
  for (int y = 0; y < raster.height; ++y) {
    const unsigned char* row = raster.bytes.data() + rowbytes * y;
    for (int x = 0; x < raster.width; ++x) {
      float v;
      if (raster.channels == 1) {
        v = static_cast<float>(row[x]);
      } else {
        const unsigned char* p = row + static_cast<std::size_t>(x) * 3;
        v = static_cast<float>(
            std::lround(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]));
      }
      data[static_cast<std::size_t>(y) * raster.width + x] = v;
    }
  }
  return ImageGrid(raster.width, raster.height, std::move(data));
}

ImageGrid load_pgm(const std::string& path) {
  const std::vector<unsigned char> bytes = read_all(path);
  TokenCursor cursor(bytes, path, /*comments=*/true);
  auto [magic, magic_off] = cursor.token("magic");
  if (magic != "P5" && magic != "P2") {
    throw FormatError(path, magic_off, "expected PGM magic P5 or P2");
  }
  const int width = cursor.int_token("width", 1);
  const int height = cursor.int_token("height", 1);
  const std::size_t maxval_off = cursor.offset();
  const int maxval = cursor.int_token("maxval", 1);
  if (maxval > 255) {
    throw FormatError(path, maxval_off, "unsupported bit depth: maxval > 255");
  }

  std::vector<float> data(static_cast<std::size_t>(width) * height);
  if (magic == "P5") {
    cursor.expect_one_separator();
    const std::size_t need = data.size();
    if (bytes.size() - cursor.offset() < need) {
      throw FormatError(path, bytes.size(), "truncated PGM payload");
    }
    const unsigned char* p = bytes.data() + cursor.offset();
    for (std::size_t i = 0; i < need; ++i) data[i] = static_cast<float>(p[i]);
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) {
      data[i] = static_cast<float>(cursor.int_token("pixel", 0));
    }
  }
  for (float v : data) {
    if (v > 255.0f) throw FormatError(path, 0, "PGM sample exceeds 255");
  }
  return ImageGrid(width, height, std::move(data));
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && is_space(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && is_space(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

FormatError::FormatError(const std::string& path, std::size_t byte_offset,
                         const std::string& message)
    : std::runtime_error(path + ": " + message + " (byte " +
                         std::to_string(byte_offset) + ")"),
      path_(path),
      byte_offset_(byte_offset) {}

void DatasetPair::validate() const {
  if (left.width() != right.width() || left.height() != right.height()) {
    throw std::invalid_argument("stereo pair dimensions differ");
  }
  if (gt && (gt->width() != left.width() || gt->height() != left.height())) {
    throw std::invalid_argument("ground truth dimensions differ from the pair");
  }
  if (d_min < 0 || d_max < d_min) {
    throw std::invalid_argument("require d_max >= d_min >= 0");
  }
}

DisparityMap read_pfm(const std::string& path) {
  const std::vector<unsigned char> bytes = read_all(path);
  TokenCursor cursor(bytes, path, /*comments=*/false);

  auto [magic, magic_off] = cursor.token("magic");
  if (magic == "PF") {
    throw FormatError(path, magic_off, "color PFM (PF) is not a disparity map");
  }
  if (magic != "Pf") {
    throw FormatError(path, magic_off, "expected PFM magic Pf");
  }
  const int width = cursor.int_token("width", 1);
  const int height = cursor.int_token("height", 1);
  const std::size_t scale_off = cursor.offset();
  const double scale = cursor.real_token("scale");
  if (scale == 0.0) {
    throw FormatError(path, scale_off, "scale must be nonzero");
  }
  cursor.expect_one_separator();

  const bool little_endian = scale < 0.0;
  const std::size_t need = static_cast<std::size_t>(width) * height * 4;
  if (bytes.size() - cursor.offset() < need) {
    throw FormatError(path, bytes.size(), "truncated payload: need " +
                                              std::to_string(need) + " bytes");
  }

  DisparityMap map(width, height);
  const unsigned char* p = bytes.data() + cursor.offset();
  for (int file_row = 0; file_row < height; ++file_row) {
    const int y = height - 1 - file_row;  // rows stored bottom to top
    for (int x = 0; x < width; ++x, p += 4) {
      const float v = float_from_bytes(p, little_endian);
      map.at(x, y) = std::isfinite(v) ? v : kInvalidDisparity;
    }
  }
  return map;
}

void write_pfm(const DisparityMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "': " + std::strerror(errno));
  }
  out << "Pf\n" << map.width() << " " << map.height() << "\n-1\n";
  for (int file_row = 0; file_row < map.height(); ++file_row) {
    const int y = map.height() - 1 - file_row;
    for (int x = 0; x < map.width(); ++x) {
      float v = map.at(x, y);
      if (!std::isfinite(v)) v = kInvalidDisparity;
      const std::uint32_t u = std::bit_cast<std::uint32_t>(v);
      const char le[4] = {static_cast<char>(u & 0xff), static_cast<char>(u >> 8 & 0xff),
                          static_cast<char>(u >> 16 & 0xff),
                          static_cast<char>(u >> 24 & 0xff)};
      out.write(le, 4);
    }
  }
  if (!out) {
    throw std::runtime_error("write failure on '" + path + "'");
  }
}

DisparityMap read_disparity_png16(const std::string& path) {
  const PngRaster raster = decode_png(path, /*normalize_to_8bit=*/false);
  if (raster.bit_depth != 16 || raster.channels != 1) {
    throw FormatError(path, kPngBitDepthOffset,
                      "expected a 16-bit single-channel PNG");
  }
  DisparityMap map(raster.width, raster.height);
  const std::size_t rowbytes = static_cast<std::size_t>(raster.width) * 2;
  for (int y = 0; y < raster.height; ++y) {
    const unsigned char* row = raster.bytes.data() + rowbytes * y;
    for (int x = 0; x < raster.width; ++x) {
      // PNG 16-bit samples are big-endian.
      const std::uint16_t v = static_cast<std::uint16_t>(
          row[static_cast<std::size_t>(x) * 2] << 8 |
          row[static_cast<std::size_t>(x) * 2 + 1]);
      map.at(x, y) = v == 0 ? kInvalidDisparity : static_cast<float>(v / 256.0);
    }
  }
  return map;
}

ImageGrid load_gray(const std::string& path) {
  if (has_png_signature(path)) {
    return gray_from_raster(decode_png(path, /*normalize_to_8bit=*/true), path);
  }
  return load_pgm(path);
}

std::pair<int, int> read_calib(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "': " + std::strerror(errno));
  }
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    if (trim(line.substr(0, eq)) != "ndisp") continue;
    const std::string value = trim(line.substr(eq + 1));
    std::size_t pos = 0;
    long ndisp = 0;
    try {
      ndisp = std::stol(value, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != value.size() || ndisp < 1) {
      throw FormatError(path, line_start, "bad ndisp value '" + value + "'");
    }
    return {0, static_cast<int>(ndisp) - 1};
  }
  throw FormatError(path, offset, "calibration file lacks an ndisp entry");
}

void falsecolor_entry(int i, unsigned char rgb[3]) {
  assert(i >= 0 && i < 256);
  const double t = i / 255.0;
  const auto channel = [](double v) {
    return static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
  };
  rgb[0] = channel(std::min(4.0 * t - 1.5, -4.0 * t + 4.5));
  rgb[1] = channel(std::min(4.0 * t - 0.5, -4.0 * t + 3.5));
  rgb[2] = channel(std::min(4.0 * t + 0.5, -4.0 * t + 2.5));
}

void render_falsecolor(const DisparityMap& map, const std::string& path) {
  float vmin = 0.0f, vmax = 0.0f;
  bool any = false;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (!map.valid(x, y)) continue;
      const float v = map.at(x, y);
      if (!any || v < vmin) vmin = v;
      if (!any || v > vmax) vmax = v;
      any = true;
    }
  }

  std::vector<unsigned char> rgb(static_cast<std::size_t>(map.width()) *
                                 map.height() * 3);
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      unsigned char* px =
          rgb.data() + (static_cast<std::size_t>(y) * map.width() + x) * 3;
      if (!map.valid(x, y)) {
        px[0] = px[1] = px[2] = 0;
        continue;
      }
      int idx = 128;  // degenerate range: one hue for the whole map
      if (vmax > vmin) {
        idx = static_cast<int>(
            std::lround((map.at(x, y) - vmin) / (vmax - vmin) * 255.0));
        idx = std::clamp(idx, 0, 255);
      }
      falsecolor_entry(idx, px);
    }
  }
  encode_png_rgb8(path, map.width(), map.height(), rgb);
}

DisparityMap flip_disparity_sign(const DisparityMap& map) {
  DisparityMap out(map.width(), map.height());
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const float v = map.at(x, y);
      out.at(x, y) = disparity_valid(v) ? -v : kInvalidDisparity;
    }
  }
  return out;
}

}  // namespace stereoguide
