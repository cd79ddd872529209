#include "ersdp/io.hpp"

#include <doctest.h>

#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace ersdp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "ersdp_test_io") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3, -2.5e-300, 1.7976931348623157e308, 4.9e-324}) {
    const std::string text = format_double(v);
    double back = 1;
    std::from_chars(text.data(), text.data() + text.size(), back);
    CHECK(back == v);
    CHECK(std::signbit(back) == std::signbit(v));
  }
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("little-endian float64 files") {
  TempDir dir;
  const std::vector<double> v{1.0, -0.5, 3.25e10, std::numeric_limits<double>::infinity()};
  write_f64_le(dir.file("a.bin"), v);
  CHECK(read_f64_le(dir.file("a.bin")) == v);
  CHECK(fs::file_size(dir.file("a.bin")) == 32);

  // 1.0 is 0x3ff0000000000000: the last stored byte is 0x3f
  std::ifstream in(dir.file("a.bin"), std::ios::binary);
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  CHECK(bytes[0] == 0x00);
  CHECK(bytes[6] == 0xf0);
  CHECK(bytes[7] == 0x3f);

  write_text(dir.file("bad.bin"), "abc");
  CHECK_THROWS_AS(read_f64_le(dir.file("bad.bin")), std::runtime_error);
  CHECK_THROWS_AS(read_f64_le(dir.file("missing.bin")), std::runtime_error);
}

TEST_CASE("matrix CSV") {
  TempDir dir;
  MatrixXd M(2, 3);
  M << 1, 2, 3, 4.5, -1, 0;
  write_matrix_csv(dir.file("m.csv"), M, {{"k", "v"}});
  std::ifstream in(dir.file("m.csv"));
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  CHECK(l1 == "# k=v");
  CHECK(l2 == "1,2,3");
  CHECK(l3 == "4.5,-1,0");
}

TEST_CASE("edge lists") {
  TempDir dir;
  write_text(dir.file("g.txt"), "# comment\n0 1\n\n1 2 0.5\n  2 2 3\n");
  const auto g = read_edge_list(dir.file("g.txt"));
  CHECK(g.n() == 3);
  CHECK(g.coeff(0, 1) == 1.0);
  CHECK(g.coeff(1, 0) == 1.0);
  CHECK(g.coeff(2, 1) == 0.5);
  CHECK(g.coeff(2, 2) == 3.0);
  CHECK(read_edge_list(dir.file("g.txt"), 5).n() == 5);
  CHECK_THROWS_AS(read_edge_list(dir.file("g.txt"), 2), std::runtime_error);

  write_edge_list(dir.file("out.txt"), g);
  const auto back = read_edge_list(dir.file("out.txt"));
  CHECK(back.to_dense() == g.to_dense());

  write_text(dir.file("bad1.txt"), "0 x\n");
  write_text(dir.file("bad2.txt"), "0 1 w\n");
  write_text(dir.file("bad3.txt"), "0 1 1 extra\n");
  write_text(dir.file("bad4.txt"), "-1 1\n");
  for (const char* f : {"bad1.txt", "bad2.txt", "bad3.txt", "bad4.txt", "none.txt"})
    CHECK_THROWS_AS(read_edge_list(dir.file(f)), std::runtime_error);
}
