#pragma once

#include <stdexcept>
#include <string>

namespace dynpriv {

// Root of every domain error raised by the library. Callers that only care
// about "the toolkit refused this input" catch this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DYNPRIV_DEFINE_ERROR(Name)          \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

DYNPRIV_DEFINE_ERROR(InvalidGraph);
DYNPRIV_DEFINE_ERROR(EmptyGraph);
DYNPRIV_DEFINE_ERROR(InvalidSize);
DYNPRIV_DEFINE_ERROR(InvalidLaplacian);
DYNPRIV_DEFINE_ERROR(InvalidParams);
DYNPRIV_DEFINE_ERROR(DimensionMismatch);
DYNPRIV_DEFINE_ERROR(NonnegativityBreach);
DYNPRIV_DEFINE_ERROR(WrongMaskFamily);
DYNPRIV_DEFINE_ERROR(NonUniformGrid);
DYNPRIV_DEFINE_ERROR(TooFewSamples);
DYNPRIV_DEFINE_ERROR(PreconditionUnmet);
DYNPRIV_DEFINE_ERROR(HorizonTooShort);
DYNPRIV_DEFINE_ERROR(ConfigError);

#undef DYNPRIV_DEFINE_ERROR

// Raised when build_laplacian meets a graph whose in/out weights disagree.
class UnbalancedGraph : public Error {
 public:
  UnbalancedGraph(std::size_t node, double imbalance)
      : Error("graph is not weight-balanced: node " + std::to_string(node) +
              " has in-weight minus out-weight " + std::to_string(imbalance)),
        node_(node),
        imbalance_(imbalance) {}

  std::size_t node() const noexcept { return node_; }
  double imbalance() const noexcept { return imbalance_; }

 private:
  std::size_t node_;
  double imbalance_;
};

}  // namespace dynpriv
