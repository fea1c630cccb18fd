#pragma once

// Binary dump of entry or Wishart matrix replicas. Little-endian layout:
//   magic     4 bytes  "CWMX"
//   version   u32      1
//   kind      u32      0 = entry matrix, 1 = Wishart matrix
//   regime    u32      0 = independent chaos, 1 = correlated Rosenblatt
//   renorm    u32      0 = none, 1 = clt, 2 = rosenblatt
//   rows      u64      n
//   cols      u64      d for entry matrices, n for Wishart matrices
//   source_d  u64
//   count     u64      number of replicas
//   h         f64      Hurst index, 0 for the independent regime
//   orders    n x u32  chaos order per row, all 0 for the correlated regime
//   payload   count x rows x cols f64, each replica row-major

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cw/wishart.hpp"

namespace cw::io {

inline constexpr std::uint32_t kMatrixDumpVersion = 1;

enum class DumpKind : std::uint32_t { entry = 0, wishart = 1 };

struct MatrixDump {
  DumpKind kind = DumpKind::entry;
  wishart::Regime regime = wishart::Regime::independent_chaos;
  wishart::Renorm renorm = wishart::Renorm::none;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint64_t source_d = 0;
  double h = 0.0;
  std::vector<std::uint32_t> orders;
  std::vector<Eigen::MatrixXd> replicas;
};

void write_entry_dump(const std::filesystem::path& path, const std::vector<wishart::EntryMatrix>& xs);
void write_wishart_dump(const std::filesystem::path& path, const std::vector<wishart::WishartMatrix>& ws,
                        wishart::Regime regime, std::vector<std::uint32_t> orders = {});
MatrixDump read_dump(const std::filesystem::path& path);

}  // namespace cw::io
