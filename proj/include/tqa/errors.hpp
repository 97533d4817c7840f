#pragma once

#include <stdexcept>
#include <string>

namespace tqa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TQA_DEFINE_ERROR(Name)          \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  };

TQA_DEFINE_ERROR(IoError)
TQA_DEFINE_ERROR(SchemaError)
TQA_DEFINE_ERROR(InvariantError)
TQA_DEFINE_ERROR(DimMismatch)
TQA_DEFINE_ERROR(SpecError)
TQA_DEFINE_ERROR(EmptyInput)
TQA_DEFINE_ERROR(UnknownParagraph)
TQA_DEFINE_ERROR(UnknownQuestion)
TQA_DEFINE_ERROR(ShapeMismatch)
TQA_DEFINE_ERROR(NonScalarLoss)
TQA_DEFINE_ERROR(CandidateCountOutOfRange)
TQA_DEFINE_ERROR(ConfigError)
TQA_DEFINE_ERROR(CheckpointError)

#undef TQA_DEFINE_ERROR

}  // namespace tqa
