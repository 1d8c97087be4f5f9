#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "png_helpers.hpp"
#include "stereoguide/io.hpp"

namespace sg = stereoguide;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "stereoguide_io_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

std::string le_float(float v) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  return {static_cast<char>(u & 0xff), static_cast<char>(u >> 8 & 0xff),
          static_cast<char>(u >> 16 & 0xff), static_cast<char>(u >> 24 & 0xff)};
}

std::string be_float(float v) {
  const std::string le = le_float(v);
  return {le[3], le[2], le[1], le[0]};
}

}  // namespace

TEST_CASE("pfm writing produces the exact golden bytes") {
  sg::DisparityMap map(2, 2);
  map.at(0, 0) = 1.0f;
  map.at(1, 0) = 2.0f;
  map.at(0, 1) = 3.0f;
  map.at(1, 1) = 4.0f;
  const fs::path path = temp_file("golden.pfm");
  sg::write_pfm(map, path.string());

  // header, then the bottom row first, little-endian floats
  std::string expected = "Pf\n2 2\n-1\n";
  expected += le_float(3.0f) + le_float(4.0f) + le_float(1.0f) + le_float(2.0f);
  CHECK(read_bytes(path) == expected);

  sg::DisparityMap tiny(1, 1, 5.0f);
  const fs::path tiny_path = temp_file("tiny.pfm");
  sg::write_pfm(tiny, tiny_path.string());
  CHECK(fs::file_size(tiny_path) == 14);  // "Pf\n1 1\n-1\n" + one float
}

TEST_CASE("pfm round trip is bit-exact including invalid pixels") {
  std::mt19937_64 rng(3);
  sg::DisparityMap map(11, 7);
  for (float& v : map.data()) {
    v = (rng() % 5 == 0) ? sg::kInvalidDisparity
                         : static_cast<float>(rng() % 4096) / 16.0f - 8.0f;
  }
  const fs::path path = temp_file("roundtrip.pfm");
  sg::write_pfm(map, path.string());
  const sg::DisparityMap back = sg::read_pfm(path.string());
  REQUIRE(back.width() == 11);
  REQUIRE(back.height() == 7);
  CHECK(back.data() == map.data());
}

TEST_CASE("pfm reader accepts big-endian payloads") {
  std::string bytes = "Pf\n2 1\n1\n";  // positive scale: big-endian
  bytes += be_float(6.5f) + be_float(-0.25f);
  const fs::path path = temp_file("big_endian.pfm");
  write_bytes(path, bytes);
  const sg::DisparityMap map = sg::read_pfm(path.string());
  CHECK(map.at(0, 0) == 6.5f);
  CHECK(map.at(1, 0) == -0.25f);
}

TEST_CASE("pfm reader maps every non-finite value to the invalid sentinel") {
  std::string bytes = "Pf\n4 1\n-1\n";
  bytes += le_float(std::numeric_limits<float>::infinity());
  bytes += le_float(-std::numeric_limits<float>::infinity());
  bytes += le_float(std::numeric_limits<float>::quiet_NaN());
  bytes += le_float(2.5f);
  const fs::path path = temp_file("nonfinite.pfm");
  write_bytes(path, bytes);
  const sg::DisparityMap map = sg::read_pfm(path.string());
  CHECK_FALSE(map.valid(0, 0));
  CHECK_FALSE(map.valid(1, 0));
  CHECK_FALSE(map.valid(2, 0));
  CHECK(map.at(0, 0) == sg::kInvalidDisparity);
  CHECK(map.at(3, 0) == 2.5f);
}

TEST_CASE("pfm reader rejects malformed headers with located errors") {
  SUBCASE("color PFM") {
    const fs::path path = temp_file("color.pfm");
    write_bytes(path, "PF\n2 2\n-1\n" + std::string(48, '\0'));
    try {
      sg::read_pfm(path.string());
      FAIL("expected FormatError");
    } catch (const sg::FormatError& e) {
      CHECK(e.byte_offset() == 0);
      CHECK(e.path() == path.string());
      CHECK(std::string(e.what()).find("color") != std::string::npos);
      CHECK(std::string(e.what()).find("(byte 0)") != std::string::npos);
    }
  }
  SUBCASE("wrong magic") {
    const fs::path path = temp_file("magic.pfm");
    write_bytes(path, "P5\n2 2\n-1\n");
    CHECK_THROWS_AS(sg::read_pfm(path.string()), sg::FormatError);
  }
  SUBCASE("zero scale") {
    const fs::path path = temp_file("scale.pfm");
    write_bytes(path, "Pf\n1 1\n0\n" + le_float(1.0f));
    CHECK_THROWS_AS(sg::read_pfm(path.string()), sg::FormatError);
  }
  SUBCASE("bad dimensions") {
    const fs::path path = temp_file("dims.pfm");
    write_bytes(path, "Pf\n0 2\n-1\n");
    CHECK_THROWS_AS(sg::read_pfm(path.string()), sg::FormatError);
  }
  SUBCASE("truncated payload points at the file end") {
    sg::DisparityMap map(3, 2, 1.0f);
    const fs::path path = temp_file("truncated.pfm");
    sg::write_pfm(map, path.string());
    std::string bytes = read_bytes(path);
    bytes.pop_back();
    write_bytes(path, bytes);
    try {
      sg::read_pfm(path.string());
      FAIL("expected FormatError");
    } catch (const sg::FormatError& e) {
      CHECK(e.byte_offset() == bytes.size());
    }
  }
}

TEST_CASE("16-bit png disparities decode as value / 256") {
  const fs::path path = temp_file("disp16.png");
  pngtest::write_png_gray16(path.string(), 2, 2, {256, 0, 12800, 65535});
  const sg::DisparityMap map = sg::read_disparity_png16(path.string());
  CHECK(map.at(0, 0) == 1.0f);
  CHECK_FALSE(map.valid(1, 0));  // stored zero means missing
  CHECK(map.at(0, 1) == 50.0f);
  CHECK(map.at(1, 1) == 255.99609375f);
}

TEST_CASE("disparity png reader insists on 16-bit single-channel input") {
  SUBCASE("8-bit grayscale") {
    const fs::path path = temp_file("disp8.png");
    pngtest::write_png_gray8(path.string(), 2, 2, {0, 1, 2, 3});
    try {
      sg::read_disparity_png16(path.string());
      FAIL("expected FormatError");
    } catch (const sg::FormatError& e) {
      CHECK(e.byte_offset() == 24);  // IHDR bit-depth field
    }
  }
  SUBCASE("rgb") {
    const fs::path path = temp_file("disp_rgb.png");
    pngtest::write_png_rgb8(path.string(), 1, 1, {10, 20, 30});
    CHECK_THROWS_AS(sg::read_disparity_png16(path.string()), sg::FormatError);
  }
  SUBCASE("not a png at all") {
    const fs::path path = temp_file("disp_not.png");
    write_bytes(path, "Pf\n1 1\n-1\n" + le_float(1.0f));
    CHECK_THROWS_AS(sg::read_disparity_png16(path.string()), sg::FormatError);
  }
}

TEST_CASE("load_gray decodes 8-bit pngs") {
  SUBCASE("grayscale passes through") {
    const fs::path path = temp_file("gray.png");
    pngtest::write_png_gray8(path.string(), 3, 2, {0, 10, 20, 128, 254, 255});
    const sg::ImageGrid image = sg::load_gray(path.string());
    REQUIRE(image.width() == 3);
    REQUIRE(image.height() == 2);
    CHECK(image.at(0, 0) == 0.0f);
    CHECK(image.at(1, 0) == 10.0f);
    CHECK(image.at(1, 1) == 254.0f);
    CHECK(image.at(2, 1) == 255.0f);
  }
  SUBCASE("rgb collapses by rounded luma") {
    const fs::path path = temp_file("rgb.png");
    pngtest::write_png_rgb8(path.string(), 2, 1,
                            {100, 50, 200, 255, 255, 255});
    const sg::ImageGrid image = sg::load_gray(path.string());
    // 0.299*100 + 0.587*50 + 0.114*200 = 82.05 -> 82
    CHECK(image.at(0, 0) == 82.0f);
    CHECK(image.at(1, 0) == 255.0f);
  }
  SUBCASE("alpha channels are stripped") {
    const fs::path path = temp_file("rgba.png");
    pngtest::write_png_rgba8(path.string(), 1, 1, {100, 50, 200, 7});
    const sg::ImageGrid image = sg::load_gray(path.string());
    CHECK(image.at(0, 0) == 82.0f);
  }
  SUBCASE("palettes expand before the luma collapse") {
    const fs::path path = temp_file("palette.png");
    pngtest::write_png_palette(path.string(), 2, 1,
                               {{{100, 50, 200}}, {{255, 255, 255}}}, {0, 1});
    const sg::ImageGrid image = sg::load_gray(path.string());
    CHECK(image.at(0, 0) == 82.0f);
    CHECK(image.at(1, 0) == 255.0f);
  }
  SUBCASE("16-bit input is rejected, not silently squashed") {
    const fs::path path = temp_file("gray16_for_gray.png");
    pngtest::write_png_gray16(path.string(), 1, 1, {512});
    try {
      sg::load_gray(path.string());
      FAIL("expected FormatError");
    } catch (const sg::FormatError& e) {
      CHECK(e.byte_offset() == 24);
    }
  }
}

TEST_CASE("load_gray reads both pgm flavors") {
  SUBCASE("binary P5") {
    const fs::path path = temp_file("image.pgm");
    std::string bytes = "P5\n3 2\n255\n";
    bytes += '\x00';
    bytes += '\x40';
    bytes += '\x80';
    bytes += '\xc0';
    bytes += '\xff';
    bytes += '\x01';
    write_bytes(path, bytes);
    const sg::ImageGrid image = sg::load_gray(path.string());
    REQUIRE(image.width() == 3);
    REQUIRE(image.height() == 2);
    CHECK(image.at(0, 0) == 0.0f);
    CHECK(image.at(1, 0) == 64.0f);
    CHECK(image.at(2, 0) == 128.0f);
    CHECK(image.at(0, 1) == 192.0f);
    CHECK(image.at(1, 1) == 255.0f);
    CHECK(image.at(2, 1) == 1.0f);
  }
  SUBCASE("ascii P2 with comments") {
    const fs::path path = temp_file("image_ascii.pgm");
    write_bytes(path, "P2\n# a comment\n2 2\n255\n0 100\n200 255\n");
    const sg::ImageGrid image = sg::load_gray(path.string());
    CHECK(image.at(0, 0) == 0.0f);
    CHECK(image.at(1, 0) == 100.0f);
    CHECK(image.at(0, 1) == 200.0f);
    CHECK(image.at(1, 1) == 255.0f);
  }
  SUBCASE("wide maxval is rejected") {
    const fs::path path = temp_file("wide.pgm");
    write_bytes(path, "P5\n1 1\n65535\n\x01\x02");
    CHECK_THROWS_AS(sg::load_gray(path.string()), sg::FormatError);
  }
  SUBCASE("truncated P5 payload") {
    const fs::path path = temp_file("short.pgm");
    write_bytes(path, "P5\n2 2\n255\n\x01\x02");
    CHECK_THROWS_AS(sg::load_gray(path.string()), sg::FormatError);
  }
}

TEST_CASE("calibration files provide the disparity range") {
  SUBCASE("middlebury style") {
    const fs::path path = temp_file("calib.txt");
    write_bytes(path,
                "cam0=[3979.911 0 1244.772; 0 3979.911 1019.507; 0 0 1]\n"
                "cam1=[3979.911 0 1369.115; 0 3979.911 1019.507; 0 0 1]\n"
                "doffs=124.343\nbaseline=193.001\nwidth=2964\nheight=1988\n"
                "ndisp=280\nisint=0\nvmin=31\nvmax=257\n");
    CHECK(sg::read_calib(path.string()) == std::pair<int, int>{0, 279});
  }
  SUBCASE("whitespace around the separator") {
    const fs::path path = temp_file("calib_ws.txt");
    write_bytes(path, "ndisp = 64\n");
    CHECK(sg::read_calib(path.string()) == std::pair<int, int>{0, 63});
  }
  SUBCASE("single-disparity degenerate range") {
    const fs::path path = temp_file("calib_one.txt");
    write_bytes(path, "ndisp=1\n");
    CHECK(sg::read_calib(path.string()) == std::pair<int, int>{0, 0});
  }
  SUBCASE("missing ndisp") {
    const fs::path path = temp_file("calib_missing.txt");
    write_bytes(path, "width=10\nheight=10\n");
    CHECK_THROWS_AS(sg::read_calib(path.string()), sg::FormatError);
  }
  SUBCASE("garbage ndisp") {
    const fs::path path = temp_file("calib_bad.txt");
    write_bytes(path, "ndisp=lots\n");
    CHECK_THROWS_AS(sg::read_calib(path.string()), sg::FormatError);
  }
}

TEST_CASE("falsecolor map runs blue to red") {
  unsigned char rgb[3];
  sg::falsecolor_entry(0, rgb);
  CHECK(rgb[0] == 0);
  CHECK(rgb[1] == 0);
  CHECK(rgb[2] == 128);
  sg::falsecolor_entry(64, rgb);
  CHECK(rgb[0] == 0);
  CHECK(rgb[1] == 129);  // the ramp passes exactly through 128.5 here
  CHECK(rgb[2] == 255);
  sg::falsecolor_entry(255, rgb);
  CHECK(rgb[0] == 128);
  CHECK(rgb[1] == 0);
  CHECK(rgb[2] == 0);
}

TEST_CASE("rendered falsecolor pngs place extremes and invalids") {
  sg::DisparityMap map(3, 1);
  map.at(0, 0) = 2.0f;
  map.at(1, 0) = sg::kInvalidDisparity;
  map.at(2, 0) = 7.0f;
  const fs::path path = temp_file("render.png");
  sg::render_falsecolor(map, path.string());

  const pngtest::Rgb8Image image = pngtest::read_png_rgb8(path.string());
  REQUIRE(image.width == 3);
  REQUIRE(image.height == 1);
  unsigned char lo[3], hi[3];
  sg::falsecolor_entry(0, lo);
  sg::falsecolor_entry(255, hi);
  CHECK(image.rgb[0] == lo[0]);
  CHECK(image.rgb[1] == lo[1]);
  CHECK(image.rgb[2] == lo[2]);
  CHECK(image.rgb[3] == 0);  // invalid pixels are black
  CHECK(image.rgb[4] == 0);
  CHECK(image.rgb[5] == 0);
  CHECK(image.rgb[6] == hi[0]);
  CHECK(image.rgb[7] == hi[1]);
  CHECK(image.rgb[8] == hi[2]);
}

TEST_CASE("a constant map renders as a single mid-scale hue") {
  sg::DisparityMap map(2, 1, 3.0f);
  const fs::path path = temp_file("render_const.png");
  sg::render_falsecolor(map, path.string());
  const pngtest::Rgb8Image image = pngtest::read_png_rgb8(path.string());
  unsigned char mid[3];
  sg::falsecolor_entry(128, mid);
  for (int x = 0; x < 2; ++x) {
    CHECK(image.rgb[x * 3 + 0] == mid[0]);
    CHECK(image.rgb[x * 3 + 1] == mid[1]);
    CHECK(image.rgb[x * 3 + 2] == mid[2]);
  }
}

TEST_CASE("sign flip negates valid pixels and is an involution") {
  sg::DisparityMap map(3, 1);
  map.at(0, 0) = 4.0f;
  map.at(1, 0) = -2.5f;
  map.at(2, 0) = sg::kInvalidDisparity;
  const sg::DisparityMap flipped = sg::flip_disparity_sign(map);
  CHECK(flipped.at(0, 0) == -4.0f);
  CHECK(flipped.at(1, 0) == 2.5f);
  CHECK_FALSE(flipped.valid(2, 0));
  CHECK(sg::flip_disparity_sign(flipped).data() == map.data());
}

TEST_CASE("dataset pair validation") {
  sg::DatasetPair pair;
  pair.left = sg::ImageGrid(4, 4);
  pair.right = sg::ImageGrid(4, 4);
  CHECK_NOTHROW(pair.validate());
  pair.gt = sg::DisparityMap(4, 3);
  CHECK_THROWS_AS(pair.validate(), std::invalid_argument);
  pair.gt = sg::DisparityMap(4, 4);
  pair.d_max = -1;
  CHECK_THROWS_AS(pair.validate(), std::invalid_argument);
  pair.d_max = 63;
  pair.right = sg::ImageGrid(5, 4);
  CHECK_THROWS_AS(pair.validate(), std::invalid_argument);
}

TEST_CASE("missing files raise runtime errors naming the path") {
  try {
    sg::read_pfm("/nonexistent/stereoguide.pfm");
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent/stereoguide.pfm") !=
          std::string::npos);
  }
  CHECK_THROWS_AS(sg::load_gray("/nonexistent/stereoguide.png"), std::runtime_error);
  CHECK_THROWS_AS(sg::read_calib("/nonexistent/calib.txt"), std::runtime_error);
}
