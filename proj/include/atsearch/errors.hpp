#pragma once

#include <stdexcept>
#include <string>

namespace atsearch {

/// Posterior update with normalizer Z = 0: every hypothesis with support was
/// just ruled out and there is nothing left to renormalize.
class DegeneratePosteriorError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Beta MLE on a sample set with no spread.
class DegenerateSampleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Training could not cover some (family, level, scale) triple.
class TrainingCoverageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A model or distance-table lookup has no entry for the requested triple.
class ModelCoverageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace atsearch
