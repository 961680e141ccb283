#pragma once

#include <cstdint>
#include <vector>

namespace repairlab::gf {

// GF(2^8) with the usual reduction polynomial x^8+x^4+x^3+x^2+1 (0x11d).
void init_tables();
std::uint8_t mul(std::uint8_t a, std::uint8_t b);
std::uint8_t inv(std::uint8_t a);  // a != 0
std::uint8_t pow(std::uint8_t a, unsigned e);

// Row-major dense matrix over GF(256).
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::uint8_t> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0) {}
  std::uint8_t& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  std::uint8_t at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

Matrix mul(const Matrix& x, const Matrix& y);
// Gauss-Jordan inverse; throws std::invalid_argument on singular input.
Matrix invert(const Matrix& m);

}  // namespace repairlab::gf
