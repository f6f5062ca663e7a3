#include "fedcorr/updates.hpp"

#include <algorithm>
#include <array>

#include "fedcorr/error.hpp"

namespace fedcorr {

const char* axis_name(AxisLabel a) {
  switch (a) {
    case AxisLabel::O:
      return "O";
    case AxisLabel::I:
      return "I";
    case AxisLabel::H:
      return "H";
    case AxisLabel::W:
      return "W";
    case AxisLabel::Flat:
      return "FLAT";
  }
  return "?";
}

ReshapeSpec ReshapeSpec::flat(std::size_t dim, std::size_t rows) {
  if (rows == 0) throw InvalidInput("ReshapeSpec: rows must be positive");
  return flat(dim, rows, (dim + rows - 1) / rows);
}

ReshapeSpec ReshapeSpec::flat(std::size_t dim, std::size_t rows,
                              std::size_t cols) {
  if (dim == 0 || rows == 0 || cols == 0)
    throw InvalidInput("ReshapeSpec: zero dimension");
  ReshapeSpec spec;
  spec.rows = rows;
  spec.cols = cols;
  spec.source_shape = {{AxisLabel::Flat, dim}};
  return spec;
}

std::size_t ReshapeSpec::source_dim() const {
  std::size_t d = 1;
  for (const auto& a : source_shape) d *= a.length;
  return d;
}

ReshapeSpec conv_axis_spec(std::size_t o, std::size_t i, std::size_t h,
                           std::size_t w,
                           const std::vector<AxisLabel>& row_axes) {
  const std::array<AxisDim, 4> axes{{{AxisLabel::O, o},
                                     {AxisLabel::I, i},
                                     {AxisLabel::H, h},
                                     {AxisLabel::W, w}}};
  if (o == 0 || i == 0 || h == 0 || w == 0)
    throw InvalidInput("conv_axis_spec: zero axis length");
  if (row_axes.empty() || row_axes.size() >= 4)
    throw InvalidInput("conv_axis_spec: row_axes must be a proper subset");
  auto in_rows = [&](AxisLabel l) {
    return std::find(row_axes.begin(), row_axes.end(), l) != row_axes.end();
  };
  for (AxisLabel l : row_axes) {
    if (l == AxisLabel::Flat)
      throw InvalidInput("conv_axis_spec: FLAT is not a conv axis");
    if (std::count(row_axes.begin(), row_axes.end(), l) != 1)
      throw InvalidInput("conv_axis_spec: duplicate row axis");
  }

  ReshapeSpec spec;
  spec.source_shape.assign(axes.begin(), axes.end());
  spec.rows = 1;
  spec.cols = 1;
  for (const auto& a : axes) {
    if (in_rows(a.label)) {
      spec.rows *= a.length;
      spec.row_axes.push_back(a.label);
    } else {
      spec.cols *= a.length;
    }
  }
  return spec;
}

namespace {

// Matrix position of source element f under a conv spec: decompose f in
// the (O, I, H, W) mixed radix, then combine the row-axis digits and
// the column-axis digits separately, preserving axis order.
std::pair<std::size_t, std::size_t> conv_position(const ReshapeSpec& spec,
                                                  std::size_t f) {
  std::array<std::size_t, 4> digit{};
  for (std::size_t a = spec.source_shape.size(); a-- > 0;) {
    digit[a] = f % spec.source_shape[a].length;
    f /= spec.source_shape[a].length;
  }
  std::size_t row = 0;
  std::size_t col = 0;
  for (std::size_t a = 0; a < spec.source_shape.size(); ++a) {
    const AxisLabel l = spec.source_shape[a].label;
    const bool is_row = std::find(spec.row_axes.begin(), spec.row_axes.end(),
                                  l) != spec.row_axes.end();
    if (is_row) {
      row = row * spec.source_shape[a].length + digit[a];
    } else {
      col = col * spec.source_shape[a].length + digit[a];
    }
  }
  return {row, col};
}

}  // namespace

UpdateMatrix reshape_to_matrix(const ParamVector& g, const ReshapeSpec& spec) {
  const std::size_t d = g.size();
  const std::size_t cells = spec.rows * spec.cols;
  if (cells < d)
    throw ShapeMismatch("reshape_to_matrix: m*n smaller than vector length");
  if (!spec.is_flat() && spec.source_dim() != d)
    throw ShapeMismatch("reshape_to_matrix: tensor shape does not match d");

  UpdateMatrix out;
  out.spec = spec;
  out.pad_count = cells - d;
  out.g_mat = Matrix(spec.rows, spec.cols);
  if (spec.is_flat()) {
    for (std::size_t f = 0; f < d; ++f)
      out.g_mat(f % spec.rows, f / spec.rows) = g[f];
  } else {
    for (std::size_t f = 0; f < d; ++f) {
      const auto [r, c] = conv_position(spec, f);
      out.g_mat(r, c) = g[f];
    }
  }
  return out;
}

ParamVector flatten_from_matrix(const UpdateMatrix& gm) {
  const std::size_t cells = gm.spec.rows * gm.spec.cols;
  if (gm.pad_count > cells)
    throw InvalidInput("flatten_from_matrix: pad_count exceeds matrix size");
  const std::size_t d = cells - gm.pad_count;
  ParamVector g(d);
  if (gm.spec.is_flat()) {
    for (std::size_t f = 0; f < d; ++f)
      g[f] = gm.g_mat(f % gm.spec.rows, f / gm.spec.rows);
  } else {
    for (std::size_t f = 0; f < d; ++f) {
      const auto [r, c] = conv_position(gm.spec, f);
      g[f] = gm.g_mat(r, c);
    }
  }
  return g;
}

}  // namespace fedcorr
