#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fedcorr/matrix.hpp"

namespace fedcorr {

// Axis labels for the source tensor of a reshape. Flat marks a plain
// vector with no tensor structure.
enum class AxisLabel : std::uint8_t { O, I, H, W, Flat };

const char* axis_name(AxisLabel a);

struct AxisDim {
  AxisLabel label;
  std::size_t length;
};

// Describes how a parameter vector maps onto an m x n update matrix.
//
// Flat specs fill column-major: column i holds elements i*m .. i*m+m-1
// of the vector, zero-padded at the tail, so each column ("model update
// slice") is a contiguous parameter segment.
//
// Conv specs map a 4-axis tensor traversed in (O, I, H, W)
// outer-to-inner order; the row index is the mixed-radix combination of
// the row-axis coordinates (in that same order), the column index of
// the remaining axes.
struct ReshapeSpec {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<AxisDim> source_shape;
  std::vector<AxisLabel> row_axes;

  // cols defaults to ceil(dim / rows).
  static ReshapeSpec flat(std::size_t dim, std::size_t rows);
  static ReshapeSpec flat(std::size_t dim, std::size_t rows, std::size_t cols);

  bool is_flat() const {
    return source_shape.size() == 1 &&
           source_shape.front().label == AxisLabel::Flat;
  }
  std::size_t source_dim() const;
};

// Partition of the four conv axes into row and column groups.
// row_axes must be a non-empty proper subset of {O, I, H, W}.
ReshapeSpec conv_axis_spec(std::size_t o, std::size_t i, std::size_t h,
                           std::size_t w,
                           const std::vector<AxisLabel>& row_axes);

struct UpdateMatrix {
  Matrix g_mat;
  ReshapeSpec spec;
  std::size_t pad_count = 0;
};

UpdateMatrix reshape_to_matrix(const ParamVector& g, const ReshapeSpec& spec);
ParamVector flatten_from_matrix(const UpdateMatrix& gm);

}  // namespace fedcorr
