#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "stereoguide/grid.hpp"

namespace stereoguide {

/// Malformed input container. Carries the source path and the byte offset
/// where parsing stopped making sense.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& path, std::size_t byte_offset,
              const std::string& message);

  const std::string& path() const { return path_; }
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::string path_;
  std::size_t byte_offset_;
};

/// Rectified stereo inputs plus optional ground truth and search range.
/// The toolkit-internal convention is a nonnegative disparity with the
/// right-image match at x - d; `left_minus` records that ingestion has
/// normalized the source to it.
struct DatasetPair {
  ImageGrid left;
  ImageGrid right;
  std::optional<DisparityMap> gt;
  int d_min = 0;
  int d_max = 63;
  bool left_minus = true;

  void validate() const;
};

/// Reads a grayscale PFM disparity map: header `Pf`, dimensions, scale
/// (sign selects the payload endianness), then rows of 32-bit floats
/// stored bottom to top. Non-finite payload values become the invalid
/// sentinel. Color `PF` files are rejected.
DisparityMap read_pfm(const std::string& path);

/// Inverse of read_pfm; writes little-endian with scale -1. Invalid pixels
/// serialize as +inf. read_pfm(write_pfm(m)) is bit-exact.
void write_pfm(const DisparityMap& map, const std::string& path);

/// Reads a 16-bit single-channel PNG disparity map: disparity is the
/// stored value / 256, stored zero means invalid. Anything but 16-bit
/// grayscale is rejected.
DisparityMap read_disparity_png16(const std::string& path);

/// Loads an 8-bit grayscale or RGB image (PNG or PGM, sniffed by magic
/// bytes). RGB collapses by luma weights 0.299/0.587/0.114, rounded to
/// nearest.
ImageGrid load_gray(const std::string& path);

/// Extracts the disparity search range from a key=value calibration file
/// carrying `ndisp`; returns (0, ndisp - 1).
std::pair<int, int> read_calib(const std::string& path);

/// Writes an 8-bit RGB PNG mapping the valid disparity range linearly
/// onto a fixed 256-entry blue-to-red colormap; invalid pixels are black.
void render_falsecolor(const DisparityMap& map, const std::string& path);

/// Colormap entry i in [0, 255] as packed RGB. Exposed so renders can be
/// checked without decoding PNGs.
void falsecolor_entry(int i, unsigned char rgb[3]);

/// Negates every valid disparity; invalid pixels pass through. Converts
/// between the signed x_right - x_left convention and the internal
/// nonnegative one, and is its own inverse.
DisparityMap flip_disparity_sign(const DisparityMap& map);

}  // namespace stereoguide
