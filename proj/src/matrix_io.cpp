#include "cw/matrix_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "cw/errors.hpp"

namespace cw::io {
namespace {

constexpr char kMagic[4] = {'C', 'W', 'M', 'X'};

template <class T>
void put(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ResourceError("matrix dump: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ResourceError("matrix dump: cannot open " + path.string());
  return os;
}

void write_header(std::ostream& os, const MatrixDump& h, std::uint64_t count) {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kMatrixDumpVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(h.kind));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(h.regime));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(h.renorm));
  put<std::uint64_t>(os, h.rows);
  put<std::uint64_t>(os, h.cols);
  put<std::uint64_t>(os, h.source_d);
  put<std::uint64_t>(os, count);
  put<double>(os, h.h);
  for (std::uint64_t i = 0; i < h.rows; ++i) put<std::uint32_t>(os, i < h.orders.size() ? h.orders[i] : 0u);
}

void write_payload(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) put<double>(os, m(i, j));
  }
}

}  // namespace

void write_entry_dump(const std::filesystem::path& path, const std::vector<wishart::EntryMatrix>& xs) {
  if (xs.empty()) throw DomainError("matrix dump: nothing to write");
  MatrixDump h;
  h.kind = DumpKind::entry;
  h.regime = xs.front().regime;
  h.rows = xs.front().n;
  h.cols = xs.front().d;
  h.source_d = xs.front().d;
  h.h = xs.front().h;
  h.orders.assign(xs.front().orders.begin(), xs.front().orders.end());
  auto os = open_out(path);
  write_header(os, h, xs.size());
  for (const auto& x : xs) {
    if (x.n != h.rows || x.d != h.cols) throw DomainError("matrix dump: replicas differ in shape");
    write_payload(os, x.entries);
  }
  if (!os) throw ResourceError("matrix dump: write failed for " + path.string());
}

void write_wishart_dump(const std::filesystem::path& path, const std::vector<wishart::WishartMatrix>& ws,
                        wishart::Regime regime, std::vector<std::uint32_t> orders) {
  if (ws.empty()) throw DomainError("matrix dump: nothing to write");
  MatrixDump h;
  h.kind = DumpKind::wishart;
  h.regime = regime;
  h.renorm = ws.front().renorm;
  h.rows = ws.front().n;
  h.cols = ws.front().n;
  h.source_d = ws.front().source_d;
  h.h = ws.front().h;
  h.orders = std::move(orders);
  auto os = open_out(path);
  write_header(os, h, ws.size());
  for (const auto& w : ws) {
    if (w.n != h.rows) throw DomainError("matrix dump: replicas differ in shape");
    write_payload(os, w.w);
  }
  if (!os) throw ResourceError("matrix dump: write failed for " + path.string());
}

MatrixDump read_dump(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ResourceError("matrix dump: cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw DomainError("matrix dump: bad magic");
  if (get<std::uint32_t>(is) != kMatrixDumpVersion) throw DomainError("matrix dump: unsupported version");
  MatrixDump d;
  d.kind = static_cast<DumpKind>(get<std::uint32_t>(is));
  d.regime = static_cast<wishart::Regime>(get<std::uint32_t>(is));
  d.renorm = static_cast<wishart::Renorm>(get<std::uint32_t>(is));
  d.rows = get<std::uint64_t>(is);
  d.cols = get<std::uint64_t>(is);
  d.source_d = get<std::uint64_t>(is);
  const auto count = get<std::uint64_t>(is);
  d.h = get<double>(is);
  if (d.rows > (1u << 20) || d.cols > (1u << 28)) throw DomainError("matrix dump: implausible shape");
  d.orders.resize(d.rows);
  for (auto& q : d.orders) q = get<std::uint32_t>(is);
  d.replicas.reserve(count);
  for (std::uint64_t r = 0; r < count; ++r) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(d.rows), static_cast<Eigen::Index>(d.cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = get<double>(is);
    }
    d.replicas.push_back(std::move(m));
  }
  return d;
}

}  // namespace cw::io
