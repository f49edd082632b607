#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pspec {

using Complex = std::complex<double>;

inline constexpr int kMaxDimension = 4;

/// Lattice coordinate m in Z^d, stored inline (d <= kMaxDimension).
class Cell {
 public:
  Cell() = default;
  explicit Cell(int dim);
  Cell(std::initializer_list<std::int64_t> coords);
  explicit Cell(std::span<const std::int64_t> coords);

  static Cell unit(int dim, int axis);

  int dim() const noexcept { return dim_; }
  std::int64_t operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
  std::int64_t& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }
  std::span<const std::int64_t> coords() const noexcept {
    return {c_.data(), static_cast<std::size_t>(dim_)};
  }
  bool is_zero() const noexcept;
  std::int64_t max_abs() const noexcept;

  Cell operator+(const Cell& o) const;
  Cell operator-(const Cell& o) const;
  Cell operator-() const;

  // Lexicographic in the coordinates; unused slots are always zero.
  auto operator<=>(const Cell&) const = default;
  bool operator==(const Cell&) const = default;

  std::string to_string() const;

 private:
  std::array<std::int64_t, kMaxDimension> c_{};
  int dim_ = 0;
};

/// Vertex (m, v_i) of a Z^d-periodic graph or of a perturbation of one.
/// Labels are 0-based; labels >= s denote vertices added by a perturbation.
struct Vertex {
  Cell cell;
  int label = 0;

  auto operator<=>(const Vertex&) const = default;
  bool operator==(const Vertex&) const = default;

  std::string to_string() const;  // 1-based label, e.g. "(3,-1):2"
};

struct VertexHash {
  std::size_t operator()(const Vertex& v) const noexcept;
};

/// Finitely supported function on vertices. Ordered so every traversal and
/// every accumulated sum is independent of hashing and thread count.
using VertexFunction = std::map<Vertex, Complex>;

inline Complex value_at(const VertexFunction& f, const Vertex& v) {
  auto it = f.find(v);
  return it == f.end() ? Complex{} : it->second;
}

/// Closed integer box [lo, hi] in Z^d (inclusive on both ends).
struct Box {
  Cell lo;
  Cell hi;

  int dim() const noexcept { return lo.dim(); }
  bool empty() const noexcept;
  bool contains(const Cell& c) const noexcept;
  std::int64_t extent(int axis) const noexcept { return hi[axis] - lo[axis] + 1; }
  std::uint64_t cell_count() const noexcept;

  static Box cube(const Cell& center, std::int64_t radius);
};

/// Visits every cell of the box in lexicographic order (last axis fastest).
template <class F>
void for_each_cell(const Box& box, F&& f) {
  if (box.empty()) return;
  Cell c = box.lo;
  const int d = box.dim();
  while (true) {
    f(static_cast<const Cell&>(c));
    int axis = d - 1;
    while (axis >= 0) {
      if (c[axis] < box.hi[axis]) {
        ++c[axis];
        break;
      }
      c[axis] = box.lo[axis];
      --axis;
    }
    if (axis < 0) return;
  }
}

/// Pairwise (cascade) summation; error grows as O(log n) rather than O(n).
double pairwise_sum(std::span<const double> values);

}  // namespace pspec
