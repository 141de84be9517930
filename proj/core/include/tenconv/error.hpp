#pragma once

#include <stdexcept>
#include <string>

namespace tenconv {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TENCONV_DEFINE_ERROR(Name)               \
  class Name : public Error {                    \
   public:                                       \
    explicit Name(const std::string& what)       \
        : Error(std::string(#Name ": ") + what) {} \
  };

TENCONV_DEFINE_ERROR(ShapeMismatch)
TENCONV_DEFINE_ERROR(RankError)
TENCONV_DEFINE_ERROR(DivisionByZero)
TENCONV_DEFINE_ERROR(OutOfBounds)
TENCONV_DEFINE_ERROR(EmptyInput)
TENCONV_DEFINE_ERROR(BadGeometry)
TENCONV_DEFINE_ERROR(NotScalarLoss)
TENCONV_DEFINE_ERROR(BatchTooSmall)
TENCONV_DEFINE_ERROR(IncompatibleSpec)
TENCONV_DEFINE_ERROR(IoError)
TENCONV_DEFINE_ERROR(FormatError)
TENCONV_DEFINE_ERROR(LabelOutOfRange)
TENCONV_DEFINE_ERROR(DataEmpty)
TENCONV_DEFINE_ERROR(ClassCountMismatch)
TENCONV_DEFINE_ERROR(NumericError)
TENCONV_DEFINE_ERROR(ConfigError)

#undef TENCONV_DEFINE_ERROR

}  // namespace tenconv
