#include "rateval/resample.h"

#include <algorithm>
#include <vector>

namespace rateval {
namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;  // weight of `hi`
};

std::vector<Tap> Taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  for (std::size_t i = 0; i < out; ++i) {
    if (in == 1 || out == 1) {
      taps[i] = {0, 0, 0.0};
      continue;
    }
    // Exact rational position i * (in - 1) / (out - 1).
    const std::size_t num = i * (in - 1);
    const std::size_t den = out - 1;
    const std::size_t lo = num / den;
    const std::size_t hi = std::min(lo + 1, in - 1);
    const double frac = static_cast<double>(num % den) / static_cast<double>(den);
    taps[i] = {lo, hi, frac};
  }
  return taps;
}

}  // namespace

Tensor2D ResampleBilinear(const Tensor2D& src, std::size_t out_height,
                          std::size_t out_width) {
  const std::size_t in_h = src.dim(0);
  const std::size_t in_w = src.dim(1);
  if (in_h == out_height && in_w == out_width) return src;

  const std::vector<Tap> rows = Taps(in_h, out_height);
  const std::vector<Tap> cols = Taps(in_w, out_width);
  Tensor2D out({out_height, out_width}, DType::kFloat64);
  for (std::size_t r = 0; r < out_height; ++r) {
    const Tap& tr = rows[r];
    for (std::size_t c = 0; c < out_width; ++c) {
      const Tap& tc = cols[c];
      const double top = src(tr.lo, tc.lo) +
                         tc.frac * (src(tr.lo, tc.hi) - src(tr.lo, tc.lo));
      const double bottom = src(tr.hi, tc.lo) +
                            tc.frac * (src(tr.hi, tc.hi) - src(tr.hi, tc.lo));
      out(r, c) = top + tr.frac * (bottom - top);
    }
  }
  return out;
}

}  // namespace rateval
