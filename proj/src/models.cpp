#include "fedcorr/models.hpp"

#include <cmath>
#include <limits>

#include "fedcorr/error.hpp"
#include "fedcorr/kernels.hpp"
#include "fedcorr/rng.hpp"

namespace fedcorr {

namespace {

std::size_t default_slice_rows(std::size_t d) {
  std::size_t m = static_cast<std::size_t>(
      std::round(std::sqrt(static_cast<double>(d))));
  return m == 0 ? 1 : m;
}

// log(1 + exp(m)) without overflow.
double log1p_exp(double m) {
  if (m > 0.0) return m + std::log1p(std::exp(-m));
  return std::log1p(std::exp(m));
}

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

struct MlpLayout {
  std::size_t w1 = 0;  // offsets into the parameter vector
  std::size_t b1 = 0;
  std::size_t w2 = 0;
  std::size_t b2 = 0;
  std::size_t in = 0;
  std::size_t hid = 0;
  std::size_t cls = 0;
};

MlpLayout mlp_layout(const ModelSpec& spec) {
  MlpLayout l;
  l.in = spec.input_dim;
  l.hid = spec.hidden;
  l.cls = spec.classes;
  l.w1 = 0;
  l.b1 = l.w1 + l.in * l.hid;
  l.w2 = l.b1 + l.hid;
  l.b2 = l.w2 + l.hid * l.cls;
  return l;
}

// Forward + optional backward for one sample. Weight blocks are stored
// unit-major: unit j of fc1 owns the contiguous fan-in segment
// w1[j*in .. j*in+in), which is exactly slice j of the block's reshape.
double mlp_sample(const MlpLayout& l, std::span<const double> params,
                  const ParamVector& x, int label, std::span<double> grad,
                  double scale, std::size_t* predicted) {
  std::vector<double> z1(l.hid);
  std::vector<double> a1(l.hid);
  for (std::size_t j = 0; j < l.hid; ++j) {
    z1[j] = params[l.b1 + j] +
            kernels::dot(params.data() + l.w1 + j * l.in, x.data(), l.in);
    a1[j] = z1[j] > 0.0 ? z1[j] : 0.0;
  }
  std::vector<double> z2(l.cls);
  for (std::size_t c = 0; c < l.cls; ++c) {
    z2[c] = params[l.b2 + c] +
            kernels::dot(params.data() + l.w2 + c * l.hid, a1.data(), l.hid);
  }

  double zmax = z2[0];
  std::size_t argmax = 0;
  for (std::size_t c = 1; c < l.cls; ++c) {
    if (z2[c] > zmax) {
      zmax = z2[c];
      argmax = c;
    }
  }
  if (predicted != nullptr) *predicted = argmax;

  double sum_exp = 0.0;
  for (std::size_t c = 0; c < l.cls; ++c) sum_exp += std::exp(z2[c] - zmax);
  const double log_z = zmax + std::log(sum_exp);
  const double loss = log_z - z2[static_cast<std::size_t>(label)];

  if (!grad.empty()) {
    std::vector<double> dz2(l.cls);
    for (std::size_t c = 0; c < l.cls; ++c) {
      dz2[c] = std::exp(z2[c] - log_z);
      if (c == static_cast<std::size_t>(label)) dz2[c] -= 1.0;
      dz2[c] *= scale;
    }
    std::vector<double> da1(l.hid, 0.0);
    for (std::size_t c = 0; c < l.cls; ++c) {
      if (dz2[c] != 0.0) {
        kernels::axpy(dz2[c], a1.data(), grad.data() + l.w2 + c * l.hid, l.hid);
        kernels::axpy(dz2[c], params.data() + l.w2 + c * l.hid, da1.data(),
                      l.hid);
        grad[l.b2 + c] += dz2[c];
      }
    }
    for (std::size_t j = 0; j < l.hid; ++j) {
      if (z1[j] > 0.0 && da1[j] != 0.0) {
        kernels::axpy(da1[j], x.data(), grad.data() + l.w1 + j * l.in, l.in);
        grad[l.b1 + j] += da1[j];
      }
    }
  }
  return loss;
}

}  // namespace

std::size_t ModelSpec::param_count() const {
  switch (kind) {
    case Kind::kLinReg:
      return input_dim + 1;  // weights plus bias
    case Kind::kLogReg:
      return input_dim;
    case Kind::kMlp:
      return input_dim * hidden + hidden + hidden * classes + classes;
  }
  return 0;
}

std::vector<LayerSpec> ModelSpec::layers() const {
  switch (kind) {
    case Kind::kLinReg:
    case Kind::kLogReg: {
      const std::size_t d = param_count();
      return {{"x", d, slice_rows != 0 ? slice_rows : default_slice_rows(d)}};
    }
    case Kind::kMlp:
      return {{"fc1.weight", input_dim * hidden, input_dim},
              {"fc1.bias", hidden, hidden},
              {"fc2.weight", hidden * classes, hidden},
              {"fc2.bias", classes, classes}};
  }
  return {};
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  ParamVector params(spec.param_count(), 0.0);
  if (spec.kind != ModelSpec::Kind::kMlp) return params;

  Rng rng(Rng::derive(seed, 21));
  const MlpLayout l = mlp_layout(spec);
  const double bound1 = std::sqrt(6.0 / static_cast<double>(l.in + l.hid));
  for (std::size_t i = 0; i < l.in * l.hid; ++i)
    params[l.w1 + i] = rng.uniform(-bound1, bound1);
  const double bound2 = std::sqrt(6.0 / static_cast<double>(l.hid + l.cls));
  for (std::size_t i = 0; i < l.hid * l.cls; ++i)
    params[l.w2 + i] = rng.uniform(-bound2, bound2);
  return params;
}

double model_loss_grad(const ModelSpec& spec, std::span<const double> params,
                       const LabeledDataset& data,
                       std::span<const std::size_t> batch,
                       std::span<double> grad) {
  if (params.size() != spec.param_count())
    throw ShapeMismatch("model: parameter count mismatch");
  if (batch.empty()) throw InvalidInput("model: empty batch");
  if (!grad.empty() && grad.size() != params.size())
    throw ShapeMismatch("model: gradient buffer size mismatch");

  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;

  switch (spec.kind) {
    case ModelSpec::Kind::kLinReg: {
      const std::size_t d = spec.input_dim;
      for (std::size_t idx : batch) {
        const ParamVector& x = data.features[idx];
        const double pred =
            kernels::dot(params.data(), x.data(), d) + params[d];
        const double err = pred - data.labels[idx];
        loss += err * err * scale;
        if (!grad.empty()) {
          kernels::axpy(2.0 * err * scale, x.data(), grad.data(), d);
          grad[d] += 2.0 * err * scale;
        }
      }
      return loss;
    }
    case ModelSpec::Kind::kLogReg: {
      const std::size_t d = spec.input_dim;
      for (std::size_t idx : batch) {
        const ParamVector& x = data.features[idx];
        const double y = data.labels[idx];
        const double z = kernels::dot(params.data(), x.data(), d);
        loss += log1p_exp(-y * z) * scale;
        if (!grad.empty()) {
          const double w = -y * logistic(-y * z) * scale;
          kernels::axpy(w, x.data(), grad.data(), d);
        }
      }
      return loss;
    }
    case ModelSpec::Kind::kMlp: {
      const MlpLayout l = mlp_layout(spec);
      for (std::size_t idx : batch) {
        loss += scale * mlp_sample(l, params, data.features[idx],
                                   data.label_as_int(idx), grad, scale,
                                   nullptr);
      }
      return loss;
    }
  }
  throw InvalidInput("model: unknown kind");
}

double model_loss(const ModelSpec& spec, std::span<const double> params,
                  const LabeledDataset& data,
                  std::span<const std::size_t> batch) {
  return model_loss_grad(spec, params, data, batch, {});
}

double model_accuracy(const ModelSpec& spec, std::span<const double> params,
                      const LabeledDataset& data,
                      std::span<const std::size_t> batch) {
  if (batch.empty()) throw InvalidInput("model: empty batch");
  switch (spec.kind) {
    case ModelSpec::Kind::kLinReg:
      return std::numeric_limits<double>::quiet_NaN();
    case ModelSpec::Kind::kLogReg: {
      std::size_t hits = 0;
      for (std::size_t idx : batch) {
        const double z = kernels::dot(params.data(),
                                      data.features[idx].data(),
                                      spec.input_dim);
        const double pred = z >= 0.0 ? 1.0 : -1.0;
        if (pred == data.labels[idx]) ++hits;
      }
      return static_cast<double>(hits) / static_cast<double>(batch.size());
    }
    case ModelSpec::Kind::kMlp: {
      const MlpLayout l = mlp_layout(spec);
      std::size_t hits = 0;
      for (std::size_t idx : batch) {
        std::size_t predicted = 0;
        mlp_sample(l, params, data.features[idx], data.label_as_int(idx), {},
                   0.0, &predicted);
        if (predicted == static_cast<std::size_t>(data.label_as_int(idx)))
          ++hits;
      }
      return static_cast<double>(hits) / static_cast<double>(batch.size());
    }
  }
  throw InvalidInput("model: unknown kind");
}

}  // namespace fedcorr
