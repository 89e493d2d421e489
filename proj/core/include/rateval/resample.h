#ifndef RATEVAL_RESAMPLE_H_
#define RATEVAL_RESAMPLE_H_

#include <cstddef>

#include "rateval/tensor.h"

namespace rateval {

// Corner-anchored bilinear resampling ("align corners"): output pixel
// (r, c) samples the source at (r * (in_h - 1) / (out_h - 1),
// c * (in_w - 1) / (out_w - 1)). A unit output dimension samples source
// index 0. Resampling to the source size returns the input unchanged, and a
// constant input stays constant.
Tensor2D ResampleBilinear(const Tensor2D& src, std::size_t out_height,
                          std::size_t out_width);

}  // namespace rateval

#endif  // RATEVAL_RESAMPLE_H_
