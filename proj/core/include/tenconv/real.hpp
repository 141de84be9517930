#pragma once

namespace tenconv {

// Element type of every tensor. Double precision is the default so that
// finite-difference checks have headroom; configure with
// -DTENCONV_SINGLE_PRECISION=ON for float training builds.
#ifdef TENCONV_USE_FLOAT
using Real = float;
#else
using Real = double;
#endif

inline constexpr bool kSinglePrecision = sizeof(Real) == sizeof(float);

}  // namespace tenconv
