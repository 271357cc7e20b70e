#pragma once

namespace ntt {

// Scalar type for all tensor math. Gradient verification needs double
// headroom, so the default build uses 64-bit floats; define
// NTT_SINGLE_PRECISION (cmake -DNTT_SINGLE_PRECISION=ON) for 32-bit
// training builds. Checkpoints always store 32-bit floats on disk.
#ifdef NTT_SINGLE_PRECISION
using real = float;
#else
using real = double;
#endif

}  // namespace ntt
