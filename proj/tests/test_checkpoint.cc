#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "seq2slate/checkpoint.h"
#include "seq2slate/error.h"
#include "seq2slate/optim.h"

using namespace seq2slate;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "s2sl_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("checkpoint round trip is bit exact") {
  Rng rng(110);
  PointerNetParams params = init_params(6, 4, 5, rng);  // includes a projection
  auto p1 = temp_path("ckpt_a.s2sl");
  auto p2 = temp_path("ckpt_b.s2sl");
  save_checkpoint(params, p1.string());
  PointerNetParams loaded = load_checkpoint(p1.string());
  CHECK(loaded == params);
  save_checkpoint(loaded, p2.string());
  CHECK(read_bytes(p1) == read_bytes(p2));
}

TEST_CASE("checkpoint rejects corruption") {
  Rng rng(111);
  PointerNetParams params = init_params(3, 3, 4, rng);
  auto path = temp_path("ckpt_corrupt.s2sl");
  save_checkpoint(params, path.string());

  SUBCASE("flipped payload byte fails the CRC") {
    std::string bytes = read_bytes(path);
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x40);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
    out.close();
    CHECK_THROWS_AS(load_checkpoint(path.string()), DataError);
  }
  SUBCASE("bad magic") {
    std::string bytes = read_bytes(path);
    bytes[0] = 'X';
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
    out.close();
    CHECK_THROWS_AS(load_checkpoint(path.string()), DataError);
  }
  SUBCASE("truncation") {
    std::string bytes = read_bytes(path);
    bytes.resize(bytes.size() / 2);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
    out.close();
    CHECK_THROWS_AS(load_checkpoint(path.string()), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/nope.s2sl"), DataError);
  }
}

TEST_CASE("checkpoint preserves exact doubles") {
  PointerNetParams params = PointerNetParams::make(2, 2, 2);
  params.v[0] = 0.1;  // not exactly representable
  params.v[1] = -3.0e-308;
  params.go[0] = 1.0 / 3.0;
  auto path = temp_path("ckpt_exact.s2sl");
  save_checkpoint(params, path.string());
  PointerNetParams loaded = load_checkpoint(path.string());
  CHECK(loaded.v[0] == params.v[0]);
  CHECK(loaded.v[1] == params.v[1]);
  CHECK(loaded.go[0] == params.go[0]);
}
