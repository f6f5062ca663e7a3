#include "fedcorr/wire.hpp"

#include <bit>
#include <cstring>

#include "fedcorr/error.hpp"

namespace fedcorr::wire {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int s = 0; s < 64; s += 8)
    out.push_back(static_cast<std::uint8_t>(bits >> s));
}

void put_f64_span(std::vector<std::uint8_t>& out, std::span<const double> v) {
  for (double x : v) put_f64(out, x);
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int s = 0; s < 32; s += 8) v |= std::uint32_t{bytes_[pos_++]} << s;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int s = 0; s < 64; s += 8) bits |= std::uint64_t{bytes_[pos_++]} << s;
    return std::bit_cast<double>(bits);
  }

  std::vector<double> f64_vec(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }

  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw ParseError("wire: truncated record");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffULL)
    throw InvalidInput(std::string("wire: ") + what + " exceeds u32");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<std::uint8_t> serialize(const CompressedUpdate& update) {
  std::vector<std::uint8_t> out;
  std::visit(
      [&out](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RawPayload>) {
          out.push_back(static_cast<std::uint8_t>(Tag::kRaw));
          put_u32(out, checked_u32(p.g.size(), "dimension"));
          put_f64_span(out, p.g);
        } else if constexpr (std::is_same_v<T, SubspaceCoeffsPayload>) {
          out.push_back(static_cast<std::uint8_t>(Tag::kSubspaceCoeffs));
          put_u32(out, checked_u32(p.coeffs.size(), "rank"));
          put_f64_span(out, p.coeffs);
        } else if constexpr (std::is_same_v<T, PcaSlicesPayload>) {
          out.push_back(static_cast<std::uint8_t>(Tag::kPcaSlices));
          put_u32(out, checked_u32(p.slices.size(), "slice count"));
          for (const auto& s : p.slices) {
            put_u32(out, checked_u32(s.size(), "slice rank"));
            put_f64_span(out, s);
          }
        } else if constexpr (std::is_same_v<T, LowRankDiagPayload>) {
          out.push_back(static_cast<std::uint8_t>(Tag::kLowRankDiag));
          put_u32(out, checked_u32(p.diag.size(), "rank"));
          put_f64_span(out, p.diag);
        } else {
          out.push_back(static_cast<std::uint8_t>(Tag::kPredictive));
          put_u32(out, checked_u32(p.coeffs.size(), "window"));
          put_f64_span(out, p.coeffs);
          put_u32(out, checked_u32(p.residual.dim, "dimension"));
          put_u32(out, checked_u32(p.residual.indices.size(), "kept count"));
          for (std::uint32_t idx : p.residual.indices) put_u32(out, idx);
          put_f64_span(out, p.residual.values);
        }
      },
      update.payload);
  return out;
}

CompressedUpdate deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const std::uint8_t tag = r.u8();
  CompressedUpdate update;
  switch (static_cast<Tag>(tag)) {
    case Tag::kRaw: {
      const std::uint32_t d = r.u32();
      update.payload = RawPayload{r.f64_vec(d)};
      break;
    }
    case Tag::kSubspaceCoeffs: {
      const std::uint32_t n = r.u32();
      update.payload = SubspaceCoeffsPayload{r.f64_vec(n)};
      break;
    }
    case Tag::kPcaSlices: {
      const std::uint32_t count = r.u32();
      PcaSlicesPayload p;
      p.slices.reserve(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t rank = r.u32();
        p.slices.push_back(r.f64_vec(rank));
      }
      update.payload = std::move(p);
      break;
    }
    case Tag::kLowRankDiag: {
      const std::uint32_t n = r.u32();
      update.payload = LowRankDiagPayload{r.f64_vec(n)};
      break;
    }
    case Tag::kPredictive: {
      PredictivePayload p;
      const std::uint32_t h = r.u32();
      p.coeffs = r.f64_vec(h);
      p.residual.dim = r.u32();
      const std::uint32_t k = r.u32();
      p.residual.indices.resize(k);
      std::uint32_t prev = 0;
      for (std::uint32_t i = 0; i < k; ++i) {
        p.residual.indices[i] = r.u32();
        if (p.residual.indices[i] >= p.residual.dim)
          throw ParseError("wire: residual index out of range");
        if (i > 0 && p.residual.indices[i] <= prev)
          throw ParseError("wire: residual indices not increasing");
        prev = p.residual.indices[i];
      }
      p.residual.values = r.f64_vec(k);
      update.payload = std::move(p);
      break;
    }
    default:
      throw ParseError("wire: unknown payload tag");
  }
  if (!r.exhausted()) throw ParseError("wire: trailing bytes");
  return update;
}

}  // namespace fedcorr::wire
