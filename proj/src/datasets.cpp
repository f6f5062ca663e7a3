#include "fedcorr/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fedcorr/error.hpp"
#include "fedcorr/rng.hpp"

namespace fedcorr {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

bool parse_double(const std::string& tok, double& out) {
  std::size_t consumed = 0;
  try {
    out = std::stod(tok, &consumed);
  } catch (const std::exception&) {
    return false;
  }
  return consumed == tok.size();
}

bool parse_index(const std::string& tok, std::size_t& out) {
  if (tok.empty() ||
      !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }))
    return false;
  try {
    out = std::stoull(tok);
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

}  // namespace

LabeledDataset parse_libsvm(std::istream& in, std::size_t feature_dim,
                            bool normalize_binary_labels) {
  if (feature_dim == 0) throw InvalidInput("parse_libsvm: feature_dim == 0");
  LabeledDataset data;
  data.feature_dim = feature_dim;

  std::string line;
  std::size_t line_no = 0;
  bool saw_zero_label = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) throw ParseError("libsvm: missing label", line_no);
    double label = 0.0;
    if (!parse_double(tok, label))
      throw ParseError("libsvm: malformed label '" + tok + "'", line_no);
    if (label == 0.0) saw_zero_label = true;

    ParamVector row(feature_dim, 0.0);
    std::size_t prev_index = 0;  // indices are 1-based and ascending
    while (ls >> tok) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError("libsvm: malformed pair '" + tok + "'", line_no);
      std::size_t index = 0;
      if (!parse_index(tok.substr(0, colon), index) || index == 0)
        throw ParseError("libsvm: malformed index in '" + tok + "'", line_no);
      if (index <= prev_index)
        throw ParseError("libsvm: non-ascending index " + std::to_string(index),
                         line_no);
      if (index > feature_dim)
        throw ParseError("libsvm: index " + std::to_string(index) +
                             " exceeds declared dimension " +
                             std::to_string(feature_dim),
                         line_no);
      double value = 0.0;
      if (!parse_double(tok.substr(colon + 1), value))
        throw ParseError("libsvm: malformed value in '" + tok + "'", line_no);
      row[index - 1] = value;
      prev_index = index;
    }
    data.features.push_back(std::move(row));
    data.labels.push_back(label);
  }

  if (normalize_binary_labels && saw_zero_label) {
    // {0,1} labelled sets map onto the -1/+1 convention of the
    // logistic loss.
    bool binary01 = true;
    for (double l : data.labels) {
      if (l != 0.0 && l != 1.0) {
        binary01 = false;
        break;
      }
    }
    if (binary01) {
      for (double& l : data.labels) l = l == 0.0 ? -1.0 : 1.0;
    }
  }
  return data;
}

LabeledDataset load_libsvm(const std::string& path, std::size_t feature_dim,
                           bool normalize_binary_labels) {
  std::ifstream in(path);
  if (!in) throw ParseError("libsvm: cannot open " + path);
  return parse_libsvm(in, feature_dim, normalize_binary_labels);
}

void write_libsvm(std::ostream& out, const LabeledDataset& data) {
  out.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.labels[i];
    for (std::size_t j = 0; j < data.feature_dim; ++j) {
      if (data.features[i][j] != 0.0)
        out << ' ' << (j + 1) << ':' << data.features[i][j];
    }
    out << '\n';
  }
}

IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto read_u32 = [&]() -> std::uint32_t {
    if (pos + 4 > bytes.size()) throw ParseError("idx: truncated header");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes[pos++];
    return v;
  };

  const std::uint32_t magic = read_u32();
  std::size_t ndims = 0;
  if (magic == kIdxImagesMagic) {
    ndims = 3;
  } else if (magic == kIdxLabelsMagic) {
    ndims = 1;
  } else {
    throw ParseError("idx: bad magic");
  }

  IdxTensor tensor;
  std::size_t total = 1;
  for (std::size_t i = 0; i < ndims; ++i) {
    const std::size_t dim = read_u32();
    tensor.dims.push_back(dim);
    total *= dim;
  }
  if (bytes.size() - pos < total) throw ParseError("idx: truncated payload");
  if (bytes.size() - pos > total) throw ParseError("idx: trailing bytes");
  tensor.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                     bytes.end());
  return tensor;
}

IdxTensor load_idx(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("idx: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_idx(bytes);
}

std::vector<std::uint8_t> write_idx(const IdxTensor& tensor) {
  if (tensor.dims.size() != 1 && tensor.dims.size() != 3)
    throw InvalidInput("write_idx: only 1-d labels or 3-d images");
  std::vector<std::uint8_t> out;
  auto put_u32 = [&](std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
  };
  put_u32(tensor.dims.size() == 3 ? kIdxImagesMagic : kIdxLabelsMagic);
  std::size_t total = 1;
  for (std::size_t d : tensor.dims) {
    put_u32(static_cast<std::uint32_t>(d));
    total *= d;
  }
  if (tensor.data.size() != total)
    throw InvalidInput("write_idx: payload size does not match dims");
  out.insert(out.end(), tensor.data.begin(), tensor.data.end());
  return out;
}

LabeledDataset dataset_from_idx(const IdxTensor& images,
                                const IdxTensor& labels) {
  if (images.dims.size() != 3 || labels.dims.size() != 1)
    throw InvalidInput("dataset_from_idx: expected image and label tensors");
  const std::size_t n = images.dims[0];
  if (labels.dims[0] != n)
    throw ShapeMismatch("dataset_from_idx: image/label counts differ");
  const std::size_t pixels = images.dims[1] * images.dims[2];

  LabeledDataset data;
  data.feature_dim = pixels;
  data.features.resize(n);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.features[i].resize(pixels);
    for (std::size_t p = 0; p < pixels; ++p)
      data.features[i][p] = images.data[i * pixels + p] / 255.0;
    data.labels[i] = labels.data[i];
  }
  return data;
}

LabeledDataset synth_linreg(std::size_t n, std::size_t feature_dim,
                            double noise, std::uint64_t seed) {
  if (n == 0 || feature_dim == 0)
    throw InvalidInput("synth_linreg: n and feature_dim must be positive");
  Rng rng(Rng::derive(seed, 11));
  ParamVector weights(feature_dim);
  for (auto& w : weights) w = rng.normal();
  const double bias = rng.normal();

  LabeledDataset data;
  data.feature_dim = feature_dim;
  data.features.resize(n);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.features[i].resize(feature_dim);
    double y = bias;
    for (std::size_t j = 0; j < feature_dim; ++j) {
      data.features[i][j] = rng.normal();
      y += weights[j] * data.features[i][j];
    }
    data.labels[i] = y + noise * rng.normal();
  }
  return data;
}

LabeledDataset synth_logreg(std::size_t n, std::size_t feature_dim,
                            double margin, std::uint64_t seed) {
  if (n == 0 || feature_dim == 0)
    throw InvalidInput("synth_logreg: n and feature_dim must be positive");
  if (margin <= 0.0) throw InvalidInput("synth_logreg: margin must be positive");
  Rng rng(Rng::derive(seed, 12));

  ParamVector direction(feature_dim);
  double nn = 0.0;
  for (auto& u : direction) {
    u = rng.normal();
    nn += u * u;
  }
  const double inv = 1.0 / std::sqrt(nn);
  for (auto& u : direction) u *= inv;

  LabeledDataset data;
  data.feature_dim = feature_dim;
  data.features.resize(n);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = (rng.next_u64() & 1) ? 1.0 : -1.0;
    ParamVector x(feature_dim);
    double along = 0.0;
    for (std::size_t j = 0; j < feature_dim; ++j) {
      x[j] = rng.normal();
      along += x[j] * direction[j];
    }
    // Remove the component along the separating direction and place the
    // sample at distance >= margin on its class side.
    const double offset = y * (margin + std::abs(rng.normal()));
    for (std::size_t j = 0; j < feature_dim; ++j)
      x[j] += (offset - along) * direction[j];
    data.features[i] = std::move(x);
    data.labels[i] = y;
  }
  return data;
}

std::pair<IdxTensor, IdxTensor> synth_digits(std::size_t n, std::size_t side,
                                             std::size_t classes, double noise,
                                             std::uint64_t seed) {
  if (n == 0 || side == 0 || classes == 0)
    throw InvalidInput("synth_digits: zero size");
  Rng rng(Rng::derive(seed, 13));
  const std::size_t pixels = side * side;

  std::vector<std::vector<std::uint8_t>> prototypes(classes);
  for (auto& proto : prototypes) {
    proto.resize(pixels);
    for (auto& p : proto)
      p = static_cast<std::uint8_t>(rng.uniform_index(256));
  }

  IdxTensor images;
  images.dims = {n, side, side};
  images.data.resize(n * pixels);
  IdxTensor labels;
  labels.dims = {n};
  labels.data.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = static_cast<std::size_t>(rng.uniform_index(classes));
    labels.data[i] = static_cast<std::uint8_t>(c);
    for (std::size_t p = 0; p < pixels; ++p) {
      const double v =
          prototypes[c][p] + noise * 255.0 * rng.normal();
      images.data[i * pixels + p] =
          static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return {std::move(images), std::move(labels)};
}

}  // namespace fedcorr
