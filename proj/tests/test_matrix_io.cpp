#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cw/matrix_io.hpp"
#include "cw/random.hpp"

using namespace cw;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const auto dir = fs::temp_directory_path() / "chaoswishart-io-test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("entry dump round trip") {
  std::vector<wishart::EntryMatrix> xs;
  for (std::size_t r = 0; r < 3; ++r) {
    Stream s(41, r);
    xs.push_back(wishart::gen_independent_entries(std::vector<int>{1, 3}, 5, s));
  }
  const auto p = scratch("entries.bin");
  io::write_entry_dump(p, xs);
  const auto back = io::read_dump(p);
  CHECK(back.kind == io::DumpKind::entry);
  CHECK(back.regime == wishart::Regime::independent_chaos);
  CHECK(back.rows == 2);
  CHECK(back.cols == 5);
  CHECK(back.orders == std::vector<std::uint32_t>{1, 3});
  REQUIRE(back.replicas.size() == 3);
  for (std::size_t r = 0; r < 3; ++r) CHECK(back.replicas[r] == xs[r].entries);
  CHECK(fs::file_size(p) == 4 + 4 * 4 + 8 * 4 + 8 + 2 * 4 + 3 * 10 * 8);
}

TEST_CASE("Wishart dump round trip") {
  std::vector<wishart::WishartMatrix> ws;
  for (std::size_t r = 0; r < 2; ++r) {
    Stream s(42, r);
    ws.push_back(wishart::renormalize(wishart::build_wishart(wishart::gen_independent_entries(std::vector<int>{2, 2, 2}, 7, s)),
                                      wishart::RenormMode::clt()));
  }
  const auto p = scratch("wishart.bin");
  io::write_wishart_dump(p, ws, wishart::Regime::independent_chaos, {2, 2, 2});
  const auto back = io::read_dump(p);
  CHECK(back.kind == io::DumpKind::wishart);
  CHECK(back.renorm == wishart::Renorm::clt);
  CHECK(back.source_d == 7);
  CHECK(back.rows == 3);
  CHECK(back.cols == 3);
  for (std::size_t r = 0; r < 2; ++r) CHECK(back.replicas[r] == ws[r].w);
}

TEST_CASE("corrupt dumps are rejected") {
  const auto p = scratch("bad.bin");
  {
    std::ofstream f(p, std::ios::binary);
    f << "NOPE0000000000000000000000000000000000000000000000";
  }
  CHECK_THROWS(io::read_dump(p));
  std::vector<wishart::EntryMatrix> xs;
  Stream s(43, 0);
  xs.push_back(wishart::gen_independent_entries(std::vector<int>{1}, 4, s));
  io::write_entry_dump(p, xs);
  fs::resize_file(p, fs::file_size(p) - 8);
  CHECK_THROWS(io::read_dump(p));
  CHECK_THROWS(io::read_dump(scratch("missing.bin")));
}
