#include "repairlab/gf256.hpp"

#include <mutex>
#include <stdexcept>

namespace repairlab::gf {

namespace {
std::uint8_t g_exp[512];
std::uint8_t g_log[256];
std::once_flag g_once;

void build() {
  unsigned x = 1;
  for (unsigned i = 0; i < 255; ++i) {
    g_exp[i] = static_cast<std::uint8_t>(x);
    g_log[x] = static_cast<std::uint8_t>(i);
    x <<= 1;
    if (x & 0x100) x ^= 0x11d;
  }
  for (unsigned i = 255; i < 512; ++i) g_exp[i] = g_exp[i - 255];
}
}  // namespace

void init_tables() { std::call_once(g_once, build); }

std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
  if (a == 0 || b == 0) return 0;
  init_tables();
  return g_exp[static_cast<unsigned>(g_log[a]) + g_log[b]];
}

std::uint8_t inv(std::uint8_t a) {
  if (a == 0) throw std::invalid_argument("gf256 inverse of zero");
  init_tables();
  return g_exp[255 - g_log[a]];
}

std::uint8_t pow(std::uint8_t a, unsigned e) {
  if (e == 0) return 1;
  if (a == 0) return 0;
  init_tables();
  return g_exp[(static_cast<unsigned>(g_log[a]) * e) % 255];
}

Matrix mul(const Matrix& x, const Matrix& y) {
  if (x.cols != y.rows) throw std::invalid_argument("gf256 matrix shape");
  Matrix out(x.rows, y.cols);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < y.cols; ++j) {
      std::uint8_t s = 0;
      for (std::size_t t = 0; t < x.cols; ++t)
        s ^= mul(x.at(i, t), y.at(t, j));
      out.at(i, j) = s;
    }
  return out;
}

Matrix invert(const Matrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("gf256 invert: not square");
  const std::size_t n = m.rows;
  Matrix a = m;
  Matrix inv_m(n, n);
  for (std::size_t i = 0; i < n; ++i) inv_m.at(i, i) = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a.at(piv, col) == 0) ++piv;
    if (piv == n) throw std::invalid_argument("gf256 invert: singular");
    if (piv != col)
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a.a[piv * n + j], a.a[col * n + j]);
        std::swap(inv_m.a[piv * n + j], inv_m.a[col * n + j]);
      }
    const std::uint8_t s = inv(a.at(col, col));
    for (std::size_t j = 0; j < n; ++j) {
      a.at(col, j) = mul(a.at(col, j), s);
      inv_m.at(col, j) = mul(inv_m.at(col, j), s);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const std::uint8_t f = a.at(r, col);
      if (f == 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a.at(r, j) ^= mul(f, a.at(col, j));
        inv_m.at(r, j) ^= mul(f, inv_m.at(col, j));
      }
    }
  }
  return inv_m;
}

}  // namespace repairlab::gf
